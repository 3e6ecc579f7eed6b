"""
Report models produced by the lab pipeline and the verification suites.

``wall_time`` is kept on the objects for console output but never written to
files, so reruns with the same seed produce identical bytes.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from core.automorphisms import AutomorphismCheck
from core.information import DecayFit
from schemas.experiment import ExperimentSpec


class ReportMetadata(BaseModel):
    versions: dict[str, str] = Field(default_factory=dict)
    boundary_prefix: str | None = None
    steps: list[dict] = Field(default_factory=list)
    wall_time: float = Field(default=0.0, exclude=True)


class ConvergenceRow(BaseModel):
    """Normalized information I(alpha_F)/|F| for one set F across replicas."""
    mode: str
    n: int
    set_size: int
    values: list[float]
    mean: float
    sd: float
    h_running: float


class DecompositionRow(BaseModel):
    """Block decomposition of the sphere of radius 2n."""
    n: int
    n_blocks: int
    identity_error: float = Field(description="max |nu-average - block sum / |S_2n||")
    gap_mean: float
    gap_max: float
    gap_bound: float | None = None
    within_bound: bool | None = None


class HComparison(BaseModel):
    n: int
    mode: str
    companion_mode: str
    h: float
    se: float
    h_companion: float
    se_companion: float
    difference: float
    z: float


class ConvergenceReport(BaseModel):
    spec: ExperimentSpec
    rows: list[ConvergenceRow] = Field(default_factory=list)
    decomposition: list[DecompositionRow] = Field(default_factory=list)
    comparison: HComparison | None = None
    metadata: ReportMetadata = Field(default_factory=ReportMetadata)


class PsiPoint(BaseModel):
    kind: str = Field(description="'singleton', 'block' or 'sphere-block'")
    n: int | None = None
    j: int | None = None
    distance: int
    size_u: int
    size_v: int
    psi: float
    bound: float | None = None
    within_bound: bool | None = None


class PsiDecayReport(BaseModel):
    spec: ExperimentSpec
    points: list[PsiPoint] = Field(default_factory=list)
    fit: DecayFit | None = None
    block_fit: DecayFit | None = None
    trivially_zero: bool = False
    skipped_blocks: int = 0
    metadata: ReportMetadata = Field(default_factory=ReportMetadata)


class MaximalRow(BaseModel):
    r: float
    tail: float
    stderr: float
    bound: float
    checked: bool
    violation: bool


class MaximalReport(BaseModel):
    spec: ExperimentSpec
    n_states: int
    r0: float
    r0_grid: float | None
    constant: float
    sup_mean: float
    sup_se: float
    within_constant: bool
    rows: list[MaximalRow] = Field(default_factory=list)
    metadata: ReportMetadata = Field(default_factory=ReportMetadata)

    @property
    def violations(self) -> int:
        return sum(row.violation for row in self.rows)


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SuiteResult(BaseModel):
    suite: str
    checks: list[CheckResult] = Field(default_factory=list)
    wall_time: float = Field(default=0.0, exclude=True)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class PartitionExport(BaseModel):
    """Blocks of the sphere of radius 2n, keyed by the site of S_(n+1) that generates them."""
    d: int
    n: int
    blocks: dict[str, list[str]]


class AutomorphismExport(BaseModel):
    """A finite-depth automorphism table as (site, image) string pairs."""
    kind: str = Field(description="'flip', 'geodesic' or 'horosphere'")
    d: int
    radius: int
    root_image: str
    pairs: list[tuple[str, str]]
    check: AutomorphismCheck
