"""
Information-theoretic quantities computed exactly from a ProcessModel.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from pydantic import BaseModel
from scipy.special import logsumexp

from config import (
    BATCH_CHUNK_SIZE,
    MAX_BRUTE_FORCE_ATOMS,
    MAX_ENTROPY_ATOMS,
    PSI_ZERO_ATOM_POLICY,
)
from core.errors import CapExceededError, DegenerateFitError, InvalidSiteError, ZeroProbabilityAtomError
from core.processes import Configuration, ProcessModel, exact_region_prob, log_prob_batch
from core.tree import Site

logger = logging.getLogger(__name__)


def info_value(model: ProcessModel, config: Configuration) -> float:
    """I(alpha_region) at the sampled configuration, in nats."""
    return -exact_region_prob(model, config)


def info_batch(model: ProcessModel, region, values: np.ndarray) -> np.ndarray:
    return -log_prob_batch(model, region, values)


# ─── Atom enumeration ────────────────────────────────────────────────────────

def _atom_count(model: ProcessModel, size: int, cap: int) -> int:
    count = model.n_states ** size
    if count > cap:
        raise CapExceededError(f"{count} atoms on {size} sites exceed the cap {cap}")
    return count


def atom_codes(n_states: int, size: int, lo: int, hi: int) -> np.ndarray:
    """Rows lo..hi-1 of the lexicographic enumeration of E^size (first site most significant)."""
    codes = np.arange(lo, hi, dtype=np.int64)
    powers = n_states ** np.arange(size - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % n_states


def atom_log_probs(model: ProcessModel, region, cap: int | None = None) -> np.ndarray:
    """log mu of every atom of alpha_region, in lexicographic order."""
    region = tuple(region)
    total = _atom_count(model, len(region), MAX_ENTROPY_ATOMS if cap is None else cap)
    out = np.empty(total)
    for lo in range(0, total, BATCH_CHUNK_SIZE):
        hi = min(lo + BATCH_CHUNK_SIZE, total)
        out[lo:hi] = log_prob_batch(model, region, atom_codes(model.n_states, len(region), lo, hi))
    return out


def entropy_exact(model: ProcessModel, region, cap: int | None = None) -> float:
    """Shannon entropy H(alpha_region) in nats by exhaustive atom enumeration."""
    logp = atom_log_probs(model, region, cap)
    live = np.isfinite(logp)
    return float(-(np.exp(logp[live]) * logp[live]).sum())


# ─── Dependence between regions ─────────────────────────────────────────────

def _region_key(region) -> list[tuple[int, Site]]:
    return sorted((len(u), u) for u in region)


def _canonical_pair(U, V) -> tuple[tuple, tuple]:
    """Order the two regions so that (U, V) and (V, U) give the same computation."""
    U, V = tuple(U), tuple(V)
    return (U, V) if _region_key(U) <= _region_key(V) else (V, U)


def _joint_table(model: ProcessModel, U, V) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    U, V = _canonical_pair(U, V)
    if not U or not V:
        raise InvalidSiteError("psi needs two non-empty regions")
    if set(U) & set(V):
        raise InvalidSiteError("psi needs disjoint regions")
    joint = atom_log_probs(model, U + V, MAX_BRUTE_FORCE_ATOMS)
    joint = joint.reshape(model.n_states ** len(U), model.n_states ** len(V))
    with np.errstate(divide="ignore"):
        log_u = logsumexp(joint, axis=1)
        log_v = logsumexp(joint, axis=0)
    return joint, log_u, log_v


def psi_coeff(model: ProcessModel, U, V, policy: str | None = None) -> float:
    """sup over atom pairs of |mu(A cap B) / (mu(A) mu(B)) - 1|.

    Parameters
    ----------
    model : ProcessModel
        The process law.
    U, V : sequence of Site
        Disjoint regions.
    policy : str, optional
        ``"exclude"`` drops atoms of probability zero from the supremum,
        ``"infinite"`` returns ``inf`` as soon as one exists.
        Defaults to ``PSI_ZERO_ATOM_POLICY``.

    Raises
    ------
    ZeroProbabilityAtomError
        If excluding zero atoms leaves nothing to take the supremum over.
    """
    policy = policy or PSI_ZERO_ATOM_POLICY
    joint, log_u, log_v = _joint_table(model, U, V)
    live_u, live_v = np.isfinite(log_u), np.isfinite(log_v)
    if not (live_u.all() and live_v.all()):
        logger.debug("psi: %d zero atoms on U, %d on V", (~live_u).sum(), (~live_v).sum())
        if policy == "infinite":
            return math.inf
    if not live_u.any() or not live_v.any():
        raise ZeroProbabilityAtomError("Every atom on one side has probability zero")
    block = joint[np.ix_(live_u, live_v)] - log_u[live_u, None] - log_v[None, live_v]
    return float(np.abs(np.exp(block) - 1.0).max())


def correlation_gap(model: ProcessModel, U, V) -> float:
    """sup over atom pairs of |mu(A cap B) - mu(A) mu(B)|."""
    joint, log_u, log_v = _joint_table(model, U, V)
    return float(np.abs(np.exp(joint) - np.exp(log_u[:, None] + log_v[None, :])).max())


# ─── Decay fits ──────────────────────────────────────────────────────────────

class DecayFit(BaseModel):
    """Fitted psi(U, V) <= C |U| |V| exp(-lambda d(U, V))."""

    lam: float
    C: float
    n_points: int
    threshold: float | None = None
    exceeds_threshold: bool | None = None


def mixing_threshold(d: int) -> float:
    """Decay rate the equipartition argument on spheres needs: 2 log(d-1)."""
    return 2.0 * math.log(d - 1)


def fit_decay(points: list[tuple[int, float, int, int]], d: int | None = None) -> DecayFit:
    """Least-squares fit of log psi - log(|U||V|) against distance.

    Parameters
    ----------
    points : list of (distance, psi, |U|, |V|)
        Measured coefficients. Points with psi <= 0 or infinite are dropped.
    d : int, optional
        Tree degree; when given the fit is compared with 2 log(d-1).

    Raises
    ------
    DegenerateFitError
        Fewer than two usable points, or all at one distance.
    """
    usable = [(k, psi, a, b) for k, psi, a, b in points if psi > 0 and math.isfinite(psi)]
    if len(usable) < 2:
        raise DegenerateFitError(f"Need at least two points with psi > 0, got {len(usable)}")
    x = np.array([k for k, _, _, _ in usable], dtype=float)
    if np.ptp(x) == 0:
        raise DegenerateFitError("All points share one distance")
    y = np.array([math.log(psi) - math.log(a * b) for _, psi, a, b in usable])
    slope, intercept = np.polyfit(x, y, 1)
    fit = DecayFit(lam=float(-slope), C=float(math.exp(intercept)), n_points=len(usable))
    if d is not None:
        fit.threshold = mixing_threshold(d)
        fit.exceeds_threshold = fit.lam > fit.threshold
    return fit


# ─── Block decompositions ───────────────────────────────────────────────────

def region_columns(region: list[Site], sites) -> np.ndarray:
    """Column index of each of ``sites`` within a sample matrix laid out over ``region``."""
    index = {u: i for i, u in enumerate(region)}
    return np.array([index[u] for u in sites], dtype=np.int64)


def block_informations(
    model: ProcessModel,
    blocks: list[list[Site]],
    region: list[Site],
    values: np.ndarray,
) -> np.ndarray:
    """(B, m) matrix of I(alpha_block) for each block, read off samples on ``region``."""
    out = np.empty((values.shape[0], len(blocks)))
    for j, block in enumerate(blocks):
        out[:, j] = info_batch(model, block, values[:, region_columns(region, block)])
    return out


def block_sum(model, blocks, region, values) -> np.ndarray:
    return block_informations(model, blocks, region, values).sum(axis=1)


def boundary_average(
    model: ProcessModel,
    blocks: dict[Site, list[Site]],
    weights: dict[Site, float],
    region: list[Site],
    values: np.ndarray,
) -> np.ndarray:
    """Exact nu-average over cylinders u of I(alpha_block(u)) / |block(u)|."""
    keys = list(blocks)
    infos = block_informations(model, [blocks[u] for u in keys], region, values)
    scale = np.array([weights[u] / len(blocks[u]) for u in keys])
    return infos @ scale


def dependence_log_ratio(model, blocks, region, values) -> np.ndarray:
    """log( mu(intersection of block atoms) / product of mu(block atoms) ) per sample."""
    union = [u for block in blocks for u in block]
    joint = -info_batch(model, union, values[:, region_columns(region, union)])
    return joint + block_sum(model, blocks, region, values)


def telescoping_bounds(model: ProcessModel, blocks: list[list[Site]]) -> tuple[float, float]:
    """(prod (1 - psi_j), prod (1 + psi_j)) with psi_j = psi(first j blocks, block j+1)."""
    lower, upper = 1.0, 1.0
    for j in range(1, len(blocks)):
        head = [u for block in blocks[:j] for u in block]
        psi = psi_coeff(model, head, blocks[j])
        lower *= max(0.0, 1.0 - psi)
        upper *= 1.0 + psi
    return lower, upper


def gap_bound(C: float, lam: float, d: int, n: int) -> float:
    """log(1 + C0 (d-1)^(-2 eps n)) with C0 = C d^2/(d-1)^2 and eps = lam / (2 log(d-1)) - 1."""
    eps = lam / mixing_threshold(d) - 1.0
    c0 = C * d ** 2 / (d - 1) ** 2
    return math.log1p(c0 * (d - 1) ** (-2.0 * eps * n))


# ─── Maximal inequality ─────────────────────────────────────────────────────

def maximal_threshold(n_states: int) -> float:
    """Smallest r with e^(r - log|E|) >= 1 + e^(-2 log|E|) e^r, i.e. log(|E|^2 / (|E| - 1))."""
    return math.log(n_states ** 2 / (n_states - 1))


def find_r0_on_grid(n_states: int, grid) -> float | None:
    for r in grid:
        if math.exp(r) / n_states >= 1.0 + math.exp(r) / n_states ** 2:
            return float(r)
    return None


def maximal_constant(n_states: int) -> float:
    r0 = maximal_threshold(n_states)
    return r0 + n_states ** 2 * math.exp(-r0)


def maximal_tail_bound(n_states: int, r: float) -> float:
    return n_states ** 2 * math.exp(-r)
