"""
Experiment specification read by ``treequipart.py run | psi | maximal``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from config import DEFAULT_K_MAX, DEFAULT_REPLICAS, DEFAULT_SEED, MAX_RADIUS
from core.processes import ProcessModel, load_model

Mode = Literal["metric-spheres", "horoball", "horoshell", "folner-F"]


class BoundarySource(BaseModel):
    """Where the boundary point xi comes from."""
    source: Literal["fixed", "patterson-sullivan"] = Field(
        default="patterson-sullivan",
        description="'fixed' uses `prefix`; 'patterson-sullivan' draws xi from nu with the spec seed.",
    )
    prefix: str | None = Field(
        default=None,
        description="Letter string of xi_1 ... xi_N, required for the fixed source.",
    )

    @model_validator(mode="after")
    def _prefix_for_fixed(self) -> "BoundarySource":
        if self.source == "fixed" and not self.prefix:
            raise ValueError("A fixed boundary source needs a prefix")
        return self


class ExperimentSpec(BaseModel):
    """One experiment: a process, a family of finite sets and a sampling plan."""
    model: ProcessModel | None = Field(default=None, description="Inline process model.")
    model_path: str | None = Field(default=None, description="JSON model file, relative to the spec file.")
    mode: Mode = "metric-spheres"
    d: int = Field(default=3, gt=2)
    n_range: tuple[int, int] = (1, 4)
    replicas: int = Field(default=DEFAULT_REPLICAS, ge=1)
    seed: int = DEFAULT_SEED
    boundary: BoundarySource = Field(default_factory=BoundarySource)
    output: str | None = None
    format: Literal["csv", "json"] = "csv"
    k_max: int = Field(default=DEFAULT_K_MAX, ge=2)
    r_grid: tuple[float, float, int] = (0.0, 5.0, 51)
    companion: bool = True

    @model_validator(mode="after")
    def _check(self) -> "ExperimentSpec":
        if (self.model is None) == (self.model_path is None):
            raise ValueError("Give exactly one of model and model_path")
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise ValueError(f"n_range must satisfy 1 <= lo <= hi, got {self.n_range}")
        if 2 * hi > MAX_RADIUS:
            raise ValueError(f"n_range upper end {hi} needs radius {2 * hi} > cap {MAX_RADIUS}")
        if self.model is not None and self.model.d != self.d:
            raise ValueError(f"Model degree {self.model.d} differs from spec degree {self.d}")
        if self.r_grid[2] < 1:
            raise ValueError("r_grid needs at least one point")
        return self

    def resolve_model(self, base_dir: str | Path | None = None) -> ProcessModel:
        if self.model is not None:
            return self.model
        path = Path(self.model_path)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        model = load_model(path)
        if model.d != self.d:
            raise ValueError(f"Model degree {model.d} differs from spec degree {self.d}")
        return model


def load_spec(path: str | Path) -> ExperimentSpec:
    return ExperimentSpec.model_validate_json(Path(path).read_text(encoding="utf-8"))
