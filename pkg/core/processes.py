"""
Exactly evaluable processes on the tree: i.i.d. fields and homogeneous Markov
tree fields.

A Markov tree field draws the root from ``pi`` and then applies the kernel
``M`` along every edge pointing away from the root. Detailed balance makes the
law independent of the root choice, hence invariant under every tree
automorphism. An i.i.d. field is the special case where every row of ``M``
equals ``p``, and both kinds share one sampler and one evaluator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.special import logsumexp

from config import BATCH_CHUNK_SIZE, MAX_SPANNING_SITES
from core.errors import CapExceededError, InvalidSiteError
from core.tree import Site, format_site, prefix_closure

logger = logging.getLogger(__name__)

_PROB_TOL = 1e-9


class ProcessModel(BaseModel):
    """Law of an invariant process over a finite state set.

    Model files are JSON objects with exactly these fields.
    """

    kind: Literal["iid", "markov-tree"]
    d: int = Field(gt=2, description="Degree of the tree the process lives on.")
    states: list[str] = Field(min_length=2)
    p: list[float] | None = Field(default=None, description="Site law for iid.")
    pi: list[float] | None = Field(default=None, description="Root law for markov-tree.")
    M: list[list[float]] | None = Field(default=None, description="Edge kernel for markov-tree.")
    beta: float | None = None
    N: int | None = None

    @model_validator(mode="after")
    def _check_law(self) -> "ProcessModel":
        size = len(self.states)
        if len(set(self.states)) != size:
            raise ValueError("State names must be distinct")
        if self.kind == "iid":
            if self.p is None:
                raise ValueError("An iid model needs the site law p")
            _check_vector(self.p, size, "p")
        else:
            if self.pi is None or self.M is None:
                raise ValueError("A markov-tree model needs pi and M")
            _check_vector(self.pi, size, "pi")
            if len(self.M) != size:
                raise ValueError(f"M must have {size} rows")
            for i, row in enumerate(self.M):
                _check_vector(row, size, f"M[{i}]")
            flow = np.asarray(self.pi)[:, None] * np.asarray(self.M)
            residual = float(np.abs(flow - flow.T).max())
            if residual > _PROB_TOL:
                raise ValueError(f"Kernel violates detailed balance (residual {residual:.3g})")
        return self

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def root_law(self) -> np.ndarray:
        return np.asarray(self.p if self.kind == "iid" else self.pi, dtype=float)

    @property
    def kernel(self) -> np.ndarray:
        if self.kind == "iid":
            return np.tile(np.asarray(self.p, dtype=float), (self.n_states, 1))
        return np.asarray(self.M, dtype=float)

    @property
    def is_independent(self) -> bool:
        """True when every kernel row equals the root law."""
        return bool(np.allclose(self.kernel, self.root_law[None, :]))


def _check_vector(values: list[float], size: int, name: str) -> None:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (size,):
        raise ValueError(f"{name} must have length {size}")
    if (arr < 0).any():
        raise ValueError(f"{name} has negative entries")
    if abs(arr.sum() - 1.0) > _PROB_TOL:
        raise ValueError(f"{name} sums to {arr.sum():.12g}, not 1")


# ─── Presets ─────────────────────────────────────────────────────────────────

def build_iid(d: int, p: list[float], states: list[str] | None = None) -> ProcessModel:
    names = states or [str(i) for i in range(len(p))]
    return ProcessModel(kind="iid", d=d, states=names, p=list(p))


def build_ising(d: int, beta: float) -> ProcessModel:
    """Free-boundary Ising field: neighbours agree with probability 1 / (1 + e^(-2 beta))."""
    same = 1.0 / (1.0 + np.exp(-2.0 * beta))
    return ProcessModel(
        kind="markov-tree",
        d=d,
        states=["+", "-"],
        pi=[0.5, 0.5],
        M=[[same, 1.0 - same], [1.0 - same, same]],
        beta=beta,
    )


def build_potts(d: int, N: int, beta: float) -> ProcessModel:
    """Antiferromagnetic Potts field: M_ij proportional to exp(-beta * [i == j])."""
    if N < 2:
        raise ValueError(f"Potts model needs N >= 2, got {N}")
    stay = np.exp(-beta)
    norm = stay + N - 1
    M = [[(stay if i == j else 1.0) / norm for j in range(N)] for i in range(N)]
    return ProcessModel(
        kind="markov-tree",
        d=d,
        states=[str(i + 1) for i in range(N)],
        pi=[1.0 / N] * N,
        M=M,
        beta=beta,
        N=N,
    )


def load_model(path: str | Path) -> ProcessModel:
    return ProcessModel.model_validate_json(Path(path).read_text(encoding="utf-8"))


# ─── Configurations ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Configuration:
    """Assignment of state indices to the sites of a finite region."""

    region: tuple[Site, ...]
    values: tuple[int, ...]

    def as_dict(self, model: ProcessModel) -> dict[str, str]:
        return {format_site(u): model.states[v] for u, v in zip(self.region, self.values)}


class _Spanning:
    """Prefix closure of a region with parent links and level groups."""

    def __init__(self, region: list[Site] | tuple[Site, ...]):
        if len(set(region)) != len(region):
            raise InvalidSiteError("Region contains repeated sites")
        self.nodes = prefix_closure(region)
        if len(self.nodes) > MAX_SPANNING_SITES:
            raise CapExceededError(
                f"Spanning subtree has {len(self.nodes)} sites, cap is {MAX_SPANNING_SITES}"
            )
        index = {u: i for i, u in enumerate(self.nodes)}
        self.region_index = np.array([index[u] for u in region], dtype=np.int64)
        depth = max((len(u) for u in self.nodes), default=0)
        self.levels: list[tuple[np.ndarray, np.ndarray]] = []
        for k in range(1, depth + 1):
            members = [i for i, u in enumerate(self.nodes) if len(u) == k]
            parents = [index[self.nodes[i][:-1]] for i in members]
            self.levels.append((np.array(members, dtype=np.int64), np.array(parents, dtype=np.int64)))

    def __len__(self) -> int:
        return len(self.nodes)


# ─── Sampling ────────────────────────────────────────────────────────────────

def _sweep(model: ProcessModel, span: _Spanning, uniforms: np.ndarray) -> np.ndarray:
    """Turn (B, S) uniforms into (B, S) state indices by inverse-CDF along edges."""
    last = model.n_states - 1
    root_cdf = np.cumsum(model.root_law)
    row_cdf = np.cumsum(model.kernel, axis=1)
    states = np.zeros(uniforms.shape, dtype=np.int64)
    states[:, 0] = np.minimum((uniforms[:, 0, None] > root_cdf[None, :]).sum(axis=1), last)
    for members, parents in span.levels:
        cdf = row_cdf[states[:, parents]]
        draws = (uniforms[:, members, None] > cdf).sum(axis=2)
        states[:, members] = np.minimum(draws, last)
    return states


def sample_region(model: ProcessModel, region, rng: np.random.Generator) -> Configuration:
    """Exact sample of the process restricted to ``region``."""
    region = tuple(region)
    if not region:
        return Configuration((), ())
    span = _Spanning(region)
    states = _sweep(model, span, rng.random((1, len(span))))
    return Configuration(region, tuple(int(v) for v in states[0, span.region_index]))


def sample_batch(model: ProcessModel, region, seed: int, replicas: int, start: int = 0) -> np.ndarray:
    """Samples for replicas ``start .. start+replicas-1``, one row each.

    Replica r draws from ``numpy.random.default_rng([seed, r])``, so a replica's
    row does not depend on how the batch is split.

    Returns
    -------
    np.ndarray
        Integer array of shape (replicas, len(region)).
    """
    region = tuple(region)
    if not region:
        return np.zeros((replicas, 0), dtype=np.int64)
    span = _Spanning(region)
    uniforms = np.stack(
        [np.random.default_rng([seed, r]).random(len(span)) for r in range(start, start + replicas)]
    )
    logger.debug("sampled %d replicas on %d spanning sites", replicas, len(span))
    return _sweep(model, span, uniforms)[:, span.region_index]


# ─── Exact probabilities ────────────────────────────────────────────────────

def _log(arr: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(arr)


def _upward_pass(model: ProcessModel, span: _Spanning, values: np.ndarray) -> np.ndarray:
    log_pi = _log(model.root_law)
    log_M = _log(model.kernel)
    n_states = model.n_states
    batch = values.shape[0]

    local = np.zeros((batch, len(span), n_states))
    evidence = np.full((batch, len(span.region_index), n_states), -np.inf)
    np.put_along_axis(evidence, values[:, :, None], 0.0, axis=2)
    local[:, span.region_index, :] = evidence

    with np.errstate(divide="ignore", invalid="ignore"):
        for members, parents in reversed(span.levels):
            # message(parent state i) = log sum_j M_ij exp(local_child(j))
            msg = logsumexp(log_M[None, None, :, :] + local[:, members, None, :], axis=3)
            np.add.at(local.transpose(1, 0, 2), parents, msg.transpose(1, 0, 2))
        return logsumexp(log_pi[None, :] + local[:, 0, :], axis=1)


def log_prob_batch(model: ProcessModel, region, values: np.ndarray) -> np.ndarray:
    """Log-probabilities of many configurations on one region.

    Parameters
    ----------
    model : ProcessModel
        The process law.
    region : sequence of Site
        Distinct sites; column k of ``values`` belongs to ``region[k]``.
    values : np.ndarray
        Integer state indices of shape (B, len(region)).

    Returns
    -------
    np.ndarray
        Shape (B,) array of log mu(atom); ``-inf`` for impossible atoms.
    """
    region = tuple(region)
    values = np.asarray(values, dtype=np.int64)
    if values.ndim != 2 or values.shape[1] != len(region):
        raise ValueError(f"values must have shape (B, {len(region)}), got {values.shape}")
    if not region:
        return np.zeros(values.shape[0])
    if values.size and (values.min() < 0 or values.max() >= model.n_states):
        raise ValueError("State index out of range")
    span = _Spanning(region)
    out = np.empty(values.shape[0])
    for lo in range(0, values.shape[0], BATCH_CHUNK_SIZE):
        hi = lo + BATCH_CHUNK_SIZE
        out[lo:hi] = _upward_pass(model, span, values[lo:hi])
    return out


def exact_region_prob(model: ProcessModel, config: Configuration) -> float:
    """log mu of the atom of alpha_region containing ``config``."""
    values = np.asarray([config.values], dtype=np.int64).reshape(1, len(config.region))
    return float(log_prob_batch(model, config.region, values)[0])
