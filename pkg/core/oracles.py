"""
Brute-force reference computations.

These enumerate every assignment of the spanning subtree and multiply kernel
entries directly. They are slow and share no code with the sum-product
evaluator, which is what makes them useful as cross-checks.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np

from config import MAX_BRUTE_FORCE_ATOMS
from core.errors import CapExceededError
from core.processes import ProcessModel
from core.tree import Site, prefix_closure


def _joint_law(model: ProcessModel, sites: list[Site]):
    """Yield (assignment dict, probability) over the prefix closure of ``sites``."""
    nodes = prefix_closure(sites)
    count = model.n_states ** len(nodes)
    if count > MAX_BRUTE_FORCE_ATOMS:
        raise CapExceededError(f"Brute force over {len(nodes)} sites exceeds {MAX_BRUTE_FORCE_ATOMS} atoms")
    pi, M = model.root_law, model.kernel
    for assignment in itertools.product(range(model.n_states), repeat=len(nodes)):
        state = dict(zip(nodes, assignment))
        prob = pi[state[()]]
        for u in nodes[1:]:
            prob *= M[state[u[:-1]], state[u]]
        yield state, prob


def brute_force_log_prob(model: ProcessModel, region: list[Site], values) -> float:
    """log mu(region = values) by summing over every interior assignment."""
    target = dict(zip(region, values))
    total = 0.0
    for state, prob in _joint_law(model, list(region)):
        if all(state[u] == v for u, v in target.items()):
            total += prob
    return math.log(total) if total > 0 else -math.inf


def brute_force_marginal(model: ProcessModel, region: list[Site]) -> dict[tuple[int, ...], float]:
    table: dict[tuple[int, ...], float] = defaultdict(float)
    for state, prob in _joint_law(model, list(region)):
        table[tuple(state[u] for u in region)] += prob
    return dict(table)


def brute_force_psi(model: ProcessModel, U: list[Site], V: list[Site]) -> float:
    """psi(U, V) from an explicit joint table, skipping zero-probability marginal atoms."""
    joint = brute_force_marginal(model, list(U) + list(V))
    pu: dict[tuple, float] = defaultdict(float)
    pv: dict[tuple, float] = defaultdict(float)
    for key, prob in joint.items():
        pu[key[:len(U)]] += prob
        pv[key[len(U):]] += prob
    worst = 0.0
    for a, p_a in pu.items():
        for b, p_b in pv.items():
            if p_a <= 0 or p_b <= 0:
                continue
            worst = max(worst, abs(joint.get(a + b, 0.0) / (p_a * p_b) - 1.0))
    return worst


def brute_force_entropy(model: ProcessModel, region: list[Site]) -> float:
    probs = np.array([p for p in brute_force_marginal(model, list(region)).values() if p > 0])
    return float(-(probs * np.log(probs)).sum())


def ising_psi(beta: float, k: int) -> float:
    """Singleton psi-coefficient of the free-boundary Ising field at distance k."""
    return math.tanh(beta) ** k


def binary_entropy(p: float) -> float:
    return -(p * math.log(p) + (1 - p) * math.log(1 - p))
