"""
LangGraph node implementations for the experiment pipeline.

Each function takes and returns a LabState dict, updating the relevant
fields. Nodes:

1. prepare           - resolve the model, build the group, fix the boundary prefix
2. run_smb_node      - normalized information along a family of finite sets
3. run_psi_node      - psi-coefficients, decay fit, sphere-block coefficients
4. run_maximal_node  - tail of the maximal function against its analytic bound
5. summarize         - attach the trace to the report and log the headline numbers
"""

from __future__ import annotations

import logging
import math
import platform

import numpy as np
import pydantic
import scipy

from config import (
    BOUNDARY_STREAM,
    MAX_BRUTE_FORCE_ATOMS,
    MC_SIGMA,
    PSI_BOUND_RTOL,
    PSI_MAX_SPHERE_LEVEL,
)
from core.boundary import (
    BoundaryGroup,
    folner_F,
    horoball,
    horoshell,
    ps_cylinder_weight,
    ps_sample,
    site_of,
    sphere_partition,
)
from core.errors import ConstructionError, DegenerateFitError
from core.information import (
    DecayFit,
    block_sum,
    boundary_average,
    find_r0_on_grid,
    fit_decay,
    gap_bound,
    info_batch,
    maximal_constant,
    maximal_tail_bound,
    maximal_threshold,
    psi_coeff,
    region_columns,
)
from core.processes import ProcessModel, sample_batch
from core.tree import (
    ROOT,
    Alphabet,
    Site,
    alternating_word,
    format_site,
    parse_site,
    set_distance,
    shortlex,
    sphere,
)
from lab.state import LabState
from schemas.report import (
    ConvergenceReport,
    ConvergenceRow,
    DecompositionRow,
    HComparison,
    MaximalReport,
    MaximalRow,
    PsiDecayReport,
    PsiPoint,
    ReportMetadata,
)

logger = logging.getLogger(__name__)

PACKAGE_VERSION = "0.1.0"

COMPANION_MODE = {
    "metric-spheres": "horoball",
    "horoball": "metric-spheres",
    "horoshell": "metric-spheres",
    "folner-F": "metric-spheres",
}


# ─── Shared helpers ──────────────────────────────────────────────────────────

def _add_step(state: dict, step_name: str, detail: str) -> list[dict]:
    """Append a step to the pipeline trace."""
    steps = list(state.get("steps", []))
    steps.append({"step": step_name, "detail": detail})
    return steps


def _versions() -> dict[str, str]:
    return {
        "treequipart": PACKAGE_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def _metadata(state: LabState) -> ReportMetadata:
    return ReportMetadata(versions=_versions(), boundary_prefix=format_site(state["xi"]))


def expected_set_size(mode: str, d: int, n: int) -> int:
    """Closed-form size of the n-th set of a family."""
    if mode == "metric-spheres":
        return d * (d - 1) ** (2 * n - 1)
    if mode == "horoball":
        return (d - 1) ** n
    if mode == "horoshell":
        return (d - 2) * (d - 1) ** (n - 1)
    if mode == "folner-F":
        return (d - 1) ** (n - 1)
    raise ValueError(f"Unknown mode '{mode}'")


def mode_set(group: BoundaryGroup, xi: tuple[int, ...], mode: str, n: int) -> list[Site]:
    """The n-th finite set of the family selected by ``mode``."""
    if mode == "metric-spheres":
        sites = list(sphere(group.alphabet, 2 * n))
    elif mode == "horoball":
        sites = horoball(group, xi, n)
    elif mode == "horoshell":
        sites = horoshell(group, xi, n)
    elif mode == "folner-F":
        sites = shortlex(site_of(group, g, xi) for g in folner_F(group, xi, n))
    else:
        raise ValueError(f"Unknown mode '{mode}'")
    expected = expected_set_size(mode, group.alphabet.d, n)
    if len(sites) != expected:
        raise ConstructionError(f"{mode} at n={n} has {len(sites)} sites, expected {expected}")
    return sites


def _spread(values: np.ndarray) -> float:
    return float(values.std(ddof=1)) if values.size > 1 else 0.0


def singleton_points(model: ProcessModel, k_max: int) -> list[PsiPoint]:
    return [
        PsiPoint(kind="singleton", distance=k, size_u=1, size_v=1,
                 psi=psi_coeff(model, [ROOT], [alternating_word(k)]))
        for k in range(1, k_max + 1)
    ]


def block_points(model: ProcessModel, k_max: int) -> list[PsiPoint]:
    points = []
    U = [ROOT, (2,)]
    for k in range(1, k_max + 1):
        w = alternating_word(k)
        V = [w, w + (2 if w[-1] == 1 else 1,)]
        points.append(PsiPoint(kind="block", distance=set_distance(U, V), size_u=2, size_v=2,
                               psi=psi_coeff(model, U, V)))
    return points


def fit_points(points: list[PsiPoint], d: int) -> DecayFit | None:
    try:
        return fit_decay([(p.distance, p.psi, p.size_u, p.size_v) for p in points], d)
    except DegenerateFitError as exc:
        logger.info("Decay fit skipped: %s", exc)
        return None


# ─── Node 1: Prepare ─────────────────────────────────────────────────────────

def prepare(state: LabState) -> dict:
    """Resolve the model, bind the group, and fix the boundary prefix.

    Updates: model, group, xi, steps
    """
    spec = state["spec"]
    model = spec.resolve_model(state.get("base_dir"))
    alphabet = Alphabet(d=spec.d)
    group = BoundaryGroup(alphabet)
    depth = 2 * spec.n_range[1] + 1

    if spec.boundary.source == "fixed":
        xi = parse_site(spec.boundary.prefix)
        group.check_prefix(xi, spec.n_range[1] + 1)
    else:
        xi = ps_sample(alphabet, depth, np.random.default_rng([spec.seed, BOUNDARY_STREAM]))

    logger.info("Prepared %s model on d=%d, xi=%s", model.kind, spec.d, format_site(xi))
    steps = _add_step(
        state,
        "Prepare",
        f"model={model.kind} states={len(model.states)} d={spec.d} xi={format_site(xi)}",
    )
    return {"model": model, "group": group, "xi": xi, "steps": steps}


# ─── Node 2: Equipartition along set families ───────────────────────────────

def run_smb_node(state: LabState) -> dict:
    """Sample once per replica and evaluate I(alpha_F)/|F| along the family.

    Updates: report, steps
    """
    spec, model, group, xi = state["spec"], state["model"], state["group"], state["xi"]
    lo, hi = spec.n_range
    ns = list(range(lo, hi + 1))
    modes = [spec.mode] + ([COMPANION_MODE[spec.mode]] if spec.companion else [])

    sets = {(mode, n): mode_set(group, xi, mode, n) for mode in modes for n in ns}
    partitions = (
        {n: sphere_partition(group, n) for n in ns} if spec.mode == "metric-spheres" else {}
    )
    region = shortlex({u for sites in sets.values() for u in sites})
    values = sample_batch(model, region, spec.seed, spec.replicas)
    logger.info("Sampled %d replicas on %d sites", spec.replicas, len(region))

    rows: list[ConvergenceRow] = []
    sums: dict[tuple[str, int], np.ndarray] = {}
    for mode in modes:
        weight, total = 0, 0.0
        for n in ns:
            sites = sets[(mode, n)]
            infos = info_batch(model, sites, values[:, region_columns(region, sites)])
            sums[(mode, n)] = infos
            normalized = infos / len(sites)
            mean = float(normalized.mean())
            weight += len(sites)
            total += len(sites) * mean
            rows.append(ConvergenceRow(
                mode=mode, n=n, set_size=len(sites), values=normalized.tolist(),
                mean=mean, sd=_spread(normalized), h_running=total / weight,
            ))

    decomposition: list[DecompositionRow] = []
    if partitions:
        fit = None if model.is_independent else fit_points(singleton_points(model, spec.k_max), spec.d)
        weight, total = 0, 0.0
        for n in ns:
            blocks = partitions[n]
            size = len(sets[("metric-spheres", n)])
            weights = {u: ps_cylinder_weight(group.alphabet, u) for u in blocks}
            average = boundary_average(model, blocks, weights, region, values)
            summed = block_sum(model, list(blocks.values()), region, values)
            gap = np.abs(summed - sums[("metric-spheres", n)]) / size
            bound = gap_bound(fit.C, fit.lam, spec.d, n) if fit else None
            decomposition.append(DecompositionRow(
                n=n,
                n_blocks=len(blocks),
                identity_error=float(np.abs(average - summed / size).max()),
                gap_mean=float(gap.mean()),
                gap_max=float(gap.max()),
                gap_bound=bound,
                within_bound=None if bound is None else bool(gap.max() <= bound),
            ))
            mean = float(average.mean())
            weight += size
            total += size * mean
            rows.append(ConvergenceRow(
                mode="block-average", n=n, set_size=size, values=average.tolist(),
                mean=mean, sd=_spread(average), h_running=total / weight,
            ))

    comparison = None
    if spec.companion:
        comparison = _compare(rows, spec.mode, modes[1], hi)

    report = ConvergenceReport(
        spec=spec, rows=rows, decomposition=decomposition,
        comparison=comparison, metadata=_metadata(state),
    )
    detail = f"{len(rows)} rows over n={lo}..{hi}, modes={','.join(modes)}"
    if comparison:
        detail += f", z={comparison.z:.3f}"
    return {"report": report, "steps": _add_step(state, "Equipartition", detail)}


def _compare(rows: list[ConvergenceRow], mode: str, companion: str, n: int) -> HComparison:
    first = next(r for r in rows if r.mode == mode and r.n == n)
    second = next(r for r in rows if r.mode == companion and r.n == n)
    se = first.sd / math.sqrt(len(first.values))
    se_c = second.sd / math.sqrt(len(second.values))
    diff = first.mean - second.mean
    scale = math.hypot(se, se_c)
    if scale > 0:
        z = diff / scale
    else:
        z = 0.0 if math.isclose(diff, 0.0, abs_tol=1e-12) else math.copysign(math.inf, diff)
    return HComparison(
        n=n, mode=mode, companion_mode=companion, h=first.mean, se=se,
        h_companion=second.mean, se_companion=se_c, difference=diff, z=z,
    )


# ─── Node 3: psi decay ───────────────────────────────────────────────────────

def run_psi_node(state: LabState) -> dict:
    """Measure psi at growing distances, fit the decay, test sphere blocks.

    Updates: report, steps
    """
    spec, model, group = state["spec"], state["model"], state["group"]
    singles = singleton_points(model, spec.k_max)
    pairs = block_points(model, spec.k_max)
    trivially_zero = model.is_independent or all(p.psi == 0 for p in singles + pairs)
    fit = None if trivially_zero else fit_points(singles, spec.d)
    block_fit = None if trivially_zero else fit_points(pairs, spec.d)

    sphere_points: list[PsiPoint] = []
    skipped = 0
    for n in range(1, min(spec.n_range[1], PSI_MAX_SPHERE_LEVEL) + 1):
        blocks = list(sphere_partition(group, n).values())
        for j in range(1, len(blocks)):
            U = [u for block in blocks[:j] for u in block]
            V = blocks[j]
            if model.n_states ** (len(U) + len(V)) > MAX_BRUTE_FORCE_ATOMS:
                skipped += 1
                continue
            psi = psi_coeff(model, U, V)
            dist = set_distance(U, V)
            bound = fit.C * len(U) * len(V) * math.exp(-fit.lam * dist) if fit else None
            sphere_points.append(PsiPoint(
                kind="sphere-block", n=n, j=j, distance=dist, size_u=len(U), size_v=len(V),
                psi=psi, bound=bound,
                within_bound=None if bound is None else psi <= bound * (1 + PSI_BOUND_RTOL),
            ))

    report = PsiDecayReport(
        spec=spec, points=singles + pairs + sphere_points, fit=fit, block_fit=block_fit,
        trivially_zero=trivially_zero, skipped_blocks=skipped, metadata=_metadata(state),
    )
    if trivially_zero:
        detail = "all psi-coefficients vanish"
    elif fit:
        detail = f"lambda={fit.lam:.5f} C={fit.C:.5f} threshold={fit.threshold:.5f}"
    else:
        detail = "decay fit degenerate"
    return {"report": report, "steps": _add_step(state, "Psi Decay", detail)}


# ─── Node 4: Maximal inequality ─────────────────────────────────────────────

def run_maximal_node(state: LabState) -> dict:
    """Tail of sup_n I(alpha_{F_n})/|F_n| against |E|^2 e^(-r).

    Updates: report, steps
    """
    spec, model, group, xi = state["spec"], state["model"], state["group"], state["xi"]
    lo, hi = spec.n_range
    sets = [mode_set(group, xi, spec.mode, n) for n in range(lo, hi + 1)]
    region = shortlex({u for sites in sets for u in sites})
    values = sample_batch(model, region, spec.seed, spec.replicas)
    normalized = np.stack(
        [info_batch(model, sites, values[:, region_columns(region, sites)]) / len(sites) for sites in sets],
        axis=1,
    )
    sup = normalized.max(axis=1)

    n_states = model.n_states
    r0 = maximal_threshold(n_states)
    start, stop, num = spec.r_grid
    grid = np.linspace(start, stop, int(num))
    rows = []
    for r in grid:
        tail = float((sup > r).mean())
        stderr = math.sqrt(tail * (1 - tail) / sup.size)
        bound = maximal_tail_bound(n_states, float(r))
        checked = bool(r > r0)
        rows.append(MaximalRow(
            r=float(r), tail=tail, stderr=stderr, bound=bound, checked=checked,
            violation=checked and tail - MC_SIGMA * stderr > bound,
        ))

    constant = maximal_constant(n_states)
    sup_mean = float(sup.mean())
    sup_se = _spread(sup) / math.sqrt(sup.size)
    report = MaximalReport(
        spec=spec, n_states=n_states, r0=r0, r0_grid=find_r0_on_grid(n_states, grid),
        constant=constant, sup_mean=sup_mean, sup_se=sup_se,
        within_constant=sup_mean <= constant + MC_SIGMA * sup_se,
        rows=rows, metadata=_metadata(state),
    )
    detail = f"r0={r0:.4f} C={constant:.4f} violations={report.violations}"
    return {"report": report, "steps": _add_step(state, "Maximal Inequality", detail)}


# ─── Node 5: Summarize ───────────────────────────────────────────────────────

def summarize(state: LabState) -> dict:
    """Copy the trace into the report metadata.

    Updates: report, steps
    """
    steps = _add_step(state, "Summarize", f"kind={state['kind']}")
    report = state["report"]
    report.metadata.steps = steps
    for step in steps:
        logger.info("%s: %s", step["step"], step["detail"])
    return {"report": report, "steps": steps}


# ─── Conditional edge functions ─────────────────────────────────────────────

def route_by_kind(state: LabState) -> str:
    """Decide which experiment node runs after preparation."""
    return {"smb": "run_smb_node", "psi": "run_psi_node", "maximal": "run_maximal_node"}[state["kind"]]
