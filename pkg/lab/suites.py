"""
Exhaustive verification suites behind ``treequipart.py verify``.

Every suite enumerates all small cases it covers (or a seeded random sample
where enumeration is too large) and records one CheckResult per property.
"""

from __future__ import annotations

import logging
import math
import time
from collections import defaultdict
from itertools import combinations

import numpy as np

from core.automorphisms import flip, geodesic_mapper, horosphere_mapper, left_translation
from core.boundary import (
    BoundaryGroup,
    boundary_prefixes,
    busemann,
    cocycle_phi,
    export_partition,
    folner_defect,
    folner_F,
    horoball,
    horoshell,
    ps_cylinder_weight,
    ps_sample,
    site_of,
    sphere_partition,
    tempered_ratio,
)
from core.information import (
    boundary_average,
    block_sum,
    correlation_gap,
    dependence_log_ratio,
    entropy_exact,
    psi_coeff,
    telescoping_bounds,
)
from core.oracles import binary_entropy, brute_force_log_prob, brute_force_psi, ising_psi
from core.processes import (
    build_iid,
    build_ising,
    build_potts,
    log_prob_batch,
    sample_batch,
)
from core.tree import (
    ROOT,
    Alphabet,
    Site,
    alternating_word,
    ball,
    concat_reduce,
    distance,
    shortlex,
    sphere,
)
from schemas.report import CheckResult, SuiteResult

logger = logging.getLogger(__name__)

HAND_PARTITION_D3_N1 = {
    "12": ["13"], "13": ["12"], "21": ["23"], "23": ["21"], "31": ["32"], "32": ["31"],
}
EXACT_TOL = 1e-10
ORACLE_ATOMS = 2 ** 14      # brute-force joint table size per oracle case
ORACLE_DEPTH = 4
ORACLE_MAX_REGION = 12


def _record(result: SuiteResult, name: str, passed: bool, detail: str = "") -> None:
    result.checks.append(CheckResult(name=name, passed=bool(passed), detail=detail))
    if not passed:
        logger.warning("Check failed: %s %s", name, detail)


def _iterate(group: BoundaryGroup, g, xi, times: int):
    for _ in range(times):
        xi = group.act(g, xi)
    return xi


# ─── Group structure ────────────────────────────────────────────────────────

def group_suite(degrees: tuple[int, ...] = (3, 4), depth: int = 5) -> SuiteResult:
    result = SuiteResult(suite="group")
    for d in degrees:
        alphabet = Alphabet(d=d)
        group = BoundaryGroup(alphabet)
        q = group.q
        prefixes = boundary_prefixes(alphabet, depth)

        ok = all(
            group.act(group.generator(n), xi) == _iterate(group, group.generator(n + 1), xi, q)
            for n in range(1, depth - 1) for xi in prefixes
        )
        _record(result, f"d={d} g_n = g_(n+1)^(d-1)", ok)

        ok = True
        for n in range(1, depth - 1):
            g = group.generator(n)
            for xi in prefixes:
                cur, steps = group.act(g, xi), 1
                while cur != xi:
                    cur, steps = group.act(g, cur), steps + 1
                ok &= steps == q ** n
        _record(result, f"d={d} exact order (d-1)^n of g_n", ok)

        level3 = group.elements(3)
        moved = {h: {xi: group.act(h, xi) for xi in prefixes} for h in level3}
        ok = all(
            group.act(group.mul(g, h), xi) == group.act(g, moved[h][xi])
            for g in level3 for h in level3 for xi in prefixes
        )
        _record(result, f"d={d} act(gh) = act(g) act(h) on G_3", ok)

        by_tail: dict[tuple, dict] = defaultdict(lambda: defaultdict(set))
        for xi in prefixes:
            for n in range(depth):
                by_tail[n][xi[n:]].add(xi)
        ok = all(
            {group.act(g, xi) for g in group.elements(n)} == by_tail[n][xi[n:]]
            for n in range(depth) for xi in prefixes
        )
        _record(result, f"d={d} G_n orbits are R_0^n classes", ok)

        level2 = group.elements(2)
        ok = all(
            cocycle_phi(group, group.mul(g, h), xi)
            == concat_reduce(cocycle_phi(group, g, group.act(h, xi)), cocycle_phi(group, h, xi))
            for g in level2 for h in level2 for xi in prefixes
        )
        _record(result, f"d={d} cocycle identity on G_2", ok)

        ok = all(
            len({site_of(group, g, xi) for g in group.elements(n)}) == q ** n
            for n in range(depth) for xi in prefixes
        )
        _record(result, f"d={d} s(., xi) injective on G_n", ok)

        ok = True
        ball_sets = {n: set(ball(alphabet, 2 * n)) for n in range(depth)}
        for n in range(depth):
            for xi in prefixes:
                shell = horoshell(group, xi, n)
                ok &= set(horoball(group, xi, n)) <= ball_sets[n]
                ok &= all(len(s) == 2 * n for s in shell)
                ok &= len(shell) == (1 if n == 0 else (q - 1) * q ** (n - 1))
        _record(result, f"d={d} horoball and horoshell shapes", ok)

        deep = boundary_prefixes(alphabet, 7)
        ok = all(busemann(site_of(group, g, xi), xi) == 0 for g in level3 for xi in deep)
        _record(result, f"d={d} horospherical sites have Busemann value 0", ok)

        ok = True
        for n in range(2, depth):
            for xi in prefixes:
                F = folner_F(group, xi, n)
                ok &= all(folner_defect(group, F, g) == 0 for g in group.elements(n - 1))
        _record(result, f"d={d} G_(n-1) stabilizes F_n", ok)

        balls = [group.elements(n) for n in range(depth)]
        shells = [group.elements_of_level(n) for n in range(1, depth)]
        worst_f = max(
            tempered_ratio(group, [folner_F(group, xi, n) for n in range(1, depth)])
            for xi in prefixes
        )
        _record(
            result, f"d={d} tempered ratios",
            tempered_ratio(group, balls) <= 1
            and tempered_ratio(group, shells) <= q / (q - 1)
            and worst_f <= q,
            f"F ratio {worst_f:.3f}",
        )
    return result


# ─── Sphere partition ───────────────────────────────────────────────────────

def partition_suite(levels: dict[int, int] | None = None) -> SuiteResult:
    result = SuiteResult(suite="partition")
    levels = levels or {3: 4, 4: 3}
    for d, top in levels.items():
        alphabet = Alphabet(d=d)
        group = BoundaryGroup(alphabet)
        for n in range(1, top + 1):
            blocks = sphere_partition(group, n)
            members = [s for block in blocks.values() for s in block]
            target = sphere(alphabet, 2 * n)
            _record(result, f"d={d} n={n} blocks partition S_2n",
                    len(members) == len(set(members)) and set(members) == set(target))
            _record(result, f"d={d} n={n} block size (d-1)^(n-1)",
                    all(len(block) == (d - 1) ** (n - 1) for block in blocks.values()))
            gap = min(
                distance(a, b)
                for x, y in combinations(blocks.values(), 2)
                for a in x for b in y
            )
            _record(result, f"d={d} n={n} blocks at distance >= 2n", gap >= 2 * n, f"min {gap}")
            if d == 3 and n == 1:
                _record(result, "d=3 n=1 matches the hand table", export_partition(blocks) == HAND_PARTITION_D3_N1)
    return result


# ─── Automorphisms ──────────────────────────────────────────────────────────

def automorphism_suite(seed: int = 0, pairs: int = 20) -> SuiteResult:
    result = SuiteResult(suite="automorphism")
    rng = np.random.default_rng(seed)
    for d in (3, 4):
        alphabet = Alphabet(d=d)
        ok, outside_fixed, involution = True, True, True
        for radius in range(2, 7):
            for _ in range(4):
                length = int(rng.integers(0, radius))
                u = ps_sample(alphabet, max(length, 1), rng)[:length]
                a, b = (int(x) for x in rng.choice(alphabet.others(u[-1] if u else 0), 2, replace=False))
                phi = flip(alphabet, u, a, b, radius)
                check = phi.verify()
                ok &= check.ok and check.parity_preserving
                outside_fixed &= all(
                    v == w for v, w in phi.table.items()
                    if not (len(v) > len(u) and v[:len(u)] == u and v[len(u)] in (a, b))
                )
                involution &= all(phi.apply(w) == v for v, w in phi.table.items())
        _record(result, f"d={d} flips verify", ok)
        _record(result, f"d={d} flips fix everything outside the two subtrees", outside_fixed)
        _record(result, f"d={d} flips are involutions", involution)

        ok, stages = True, True
        for radius in range(1, 7):
            xi, zeta = ps_sample(alphabet, radius, rng), ps_sample(alphabet, radius, rng)
            phi = geodesic_mapper(alphabet, xi, zeta, radius)
            check = phi.verify()
            ok &= check.ok and check.parity_preserving and phi.root_image == ROOT
            ok &= all(phi.apply(xi[:k]) == zeta[:k] for k in range(radius + 1))
            for k in range(radius + 1):
                partial = geodesic_mapper(alphabet, xi, zeta, radius, stage=k)
                stages &= all(partial.apply(v) == phi.apply(v) for v in ball(alphabet, k))
        _record(result, f"d={d} geodesic mappers verify and follow the geodesic", ok)
        _record(result, f"d={d} geodesic stages stabilize", stages)

    for d, count, n in ((3, pairs, 3), (4, max(1, pairs // 4), 3)):
        alphabet = Alphabet(d=d)
        group = BoundaryGroup(alphabet)
        radius = 2 * n
        ok = True
        for _ in range(count):
            xi, zeta = ps_sample(alphabet, radius + 1, rng), ps_sample(alphabet, radius + 1, rng)
            phi = horosphere_mapper(group, xi, zeta, n, radius)
            check = phi.verify()
            ok &= check.ok and check.parity_preserving and phi.root_image == ROOT
            ok &= all(
                phi.apply(site_of(group, g, xi)) == site_of(group, g, zeta)
                for g in group.elements(n)
            )
        _record(result, f"d={d} horosphere mappers send s(g, xi) to s(g, zeta) on G_{n}", ok)

    alphabet = Alphabet(d=3)
    group = BoundaryGroup(alphabet)
    ok = True
    level2 = group.elements(2)
    for xi in boundary_prefixes(alphabet, 5):
        for h in level2:
            phi = horosphere_mapper(group, xi, group.act(group.inv(h), xi), 2, 4)
            theta = left_translation(alphabet, site_of(group, h, xi), 4)
            ok &= all(
                site_of(group, group.mul(h, g), xi) == theta.apply(phi.apply(site_of(group, g, xi)))
                for g in level2
            )
    _record(result, "d=3 s(hg, xi) = theta(phi(s(g, xi))) on G_2", ok)
    return result


# ─── Processes ───────────────────────────────────────────────────────────────

def _random_subtree(alphabet: Alphabet, size: int, depth: int, rng: np.random.Generator) -> list[Site]:
    """A rooted subtree of ``size`` sites inside ball(depth), grown one child at a time."""
    nodes = [ROOT]
    frontier = [(x,) for x in alphabet.letters]
    while len(nodes) < size and frontier:
        u = frontier.pop(int(rng.integers(len(frontier))))
        nodes.append(u)
        if len(u) < depth:
            frontier.extend(u + (x,) for x in alphabet.others(u[-1]))
    return nodes


def _oracle_region(alphabet: Alphabet, n_states: int, rng: np.random.Generator) -> list[Site]:
    """Up to ORACLE_MAX_REGION sites whose spanning subtree fits the brute-force budget.

    Every leaf of the subtree is observed, so the unobserved sites are interior
    chains the sum-product pass has to marginalize out.
    """
    cap = int(math.log(ORACLE_ATOMS) / math.log(n_states) + 1e-9)
    tree = _random_subtree(alphabet, int(rng.integers(2, cap + 1)), ORACLE_DEPTH, rng)
    leaves = [u for u in tree if not any(v[:-1] == u for v in tree if v)]
    inner = [u for u in tree if u not in leaves]
    if len(leaves) >= ORACLE_MAX_REGION:
        picks = rng.choice(len(leaves), ORACLE_MAX_REGION, replace=False)
        return shortlex(leaves[k] for k in picks)
    extra = int(rng.integers(0, min(len(inner), ORACLE_MAX_REGION - len(leaves)) + 1))
    picks = rng.choice(len(inner), extra, replace=False)
    return shortlex(leaves + [inner[k] for k in picks])


def _oracle_cases(rng: np.random.Generator, count: int):
    d3 = Alphabet(d=3)
    models = [
        build_ising(3, 0.2),
        build_ising(3, 0.9),
        build_iid(3, [0.3, 0.7]),
        build_potts(3, 3, 1.0),
    ]
    for i in range(count):
        model = models[i % len(models)]
        region = _oracle_region(d3, model.n_states, rng)
        values = [int(v) for v in rng.integers(0, model.n_states, len(region))]
        yield model, region, values


def _disjoint_pair(rng: np.random.Generator, pool: list[Site], max_size: int):
    order = rng.permutation(len(pool))
    a = int(rng.integers(1, max_size + 1))
    b = int(rng.integers(1, max_size + 1))
    U = [pool[k] for k in order[:a]]
    V = [pool[k] for k in order[a:a + b]]
    return U, V


def process_suite(seed: int = 0, cases: int = 200) -> SuiteResult:
    result = SuiteResult(suite="process")
    rng = np.random.default_rng(seed)
    d3 = Alphabet(d=3)
    ising = build_ising(3, 0.2)

    worst = 0.0
    for model, region, values in _oracle_cases(rng, cases):
        exact = log_prob_batch(model, region, np.array([values]))[0]
        worst = max(worst, abs(exact - brute_force_log_prob(model, region, values)))
    _record(result, "sum-product matches brute force", worst <= EXACT_TOL, f"max error {worst:.2e}")

    worst = 0.0
    pool = list(ball(d3, 2))
    ternary_pool = list(ball(d3, 1)) + [(1, 2), (1, 3), (2, 1), (2, 3)]
    for model in (ising, build_ising(3, 0.9), build_potts(3, 3, 1.0)):
        sub = pool if model.n_states == 2 else ternary_pool
        for _ in range(10):
            U, V = _disjoint_pair(rng, sub, 4)
            worst = max(worst, abs(psi_coeff(model, U, V) - brute_force_psi(model, U, V)))
    _record(result, "psi matches brute force", worst <= EXACT_TOL, f"max error {worst:.2e}")

    closed = max(abs(psi_coeff(ising, [ROOT], [alternating_word(k)]) - ising_psi(0.2, k))
                 for k in range(1, 7))
    _record(result, "Ising singleton psi = tanh(beta)^k", closed <= EXACT_TOL, f"{closed:.2e}")

    U, V = [ROOT, (2,)], [(1, 3), (1, 2, 1)]
    _record(result, "psi is symmetric", psi_coeff(ising, U, V) == psi_coeff(ising, V, U))

    group = BoundaryGroup(d3)
    worst = {"geodesic": 0.0, "flip": 0.0, "horosphere": 0.0}
    for model in (ising, build_potts(3, 3, 1.0)):
        for _ in range(5):
            region = [pool[k] for k in sorted(rng.choice(len(pool), 4, replace=False))]
            xi, zeta = ps_sample(d3, 3, rng), ps_sample(d3, 3, rng)
            u = pool[int(rng.integers(len(pool)))]
            a, b = (int(x) for x in rng.choice(d3.others(u[-1] if u else 0), 2, replace=False))
            maps = {
                "geodesic": geodesic_mapper(d3, xi, zeta, 3),
                "flip": flip(d3, u, a, b, 3),
                "horosphere": horosphere_mapper(group, xi, zeta, 1, 2),
            }
            h = entropy_exact(model, region)
            for kind, phi in maps.items():
                worst[kind] = max(worst[kind], abs(h - entropy_exact(model, phi.image(region))))
    for kind, error in worst.items():
        _record(result, f"entropy is invariant under {kind} automorphisms", error <= EXACT_TOL, f"{error:.2e}")

    same = ising.kernel[0, 0]
    h2 = entropy_exact(ising, [ROOT, (1,)])
    _record(result, "Ising two-site entropy = log 2 + H(M_same)",
            abs(h2 - (math.log(2) + binary_entropy(same))) <= EXACT_TOL)

    worst = 0.0
    for _ in range(20):
        region = [pool[k] for k in sorted(rng.choice(len(pool), 3, replace=False))]
        extra = next(s for s in pool if s not in region)
        values = [int(v) for v in rng.integers(0, 2, 3)]
        base = log_prob_batch(ising, region, np.array([values]))[0]
        ext = log_prob_batch(ising, region + [extra], np.array([values + [0], values + [1]]))
        worst = max(worst, abs(math.exp(base) - np.exp(ext).sum()))
    _record(result, "marginals are consistent", worst <= EXACT_TOL, f"{worst:.2e}")

    gaps = []
    for k in range(1, 9):
        theta = left_translation(d3, alternating_word(k), 1)
        gaps.append(correlation_gap(ising, [ROOT], [theta.apply(ROOT)]))
    _record(result, "correlations decay along translates",
            all(b < a for a, b in zip(gaps, gaps[1:])), f"last {gaps[-1]:.2e}")

    blocks = list(sphere_partition(group, 1).values())
    lower, upper = telescoping_bounds(ising, blocks)
    union = [s for block in blocks for s in block]
    atoms = np.array(list(np.ndindex(*(2,) * len(union))))
    ratios = np.exp(dependence_log_ratio(ising, blocks, union, atoms))
    _record(result, "telescoping bounds hold on S_2",
            bool((ratios >= lower - 1e-12).all() and (ratios <= upper + 1e-12).all()),
            f"[{lower:.4f}, {upper:.4f}]")

    worst = 0.0
    for n in range(1, 4):
        partition = sphere_partition(group, n)
        region = list(sphere(d3, 2 * n))
        values = sample_batch(ising, region, seed, 20)
        weights = {u: ps_cylinder_weight(d3, u) for u in partition}
        average = boundary_average(ising, partition, weights, region, values)
        summed = block_sum(ising, list(partition.values()), region, values)
        worst = max(worst, float(np.abs(average - summed / len(region)).max()))
    _record(result, "nu-average equals block sum over |S_2n|", worst <= 1e-12, f"{worst:.2e}")
    return result


SUITES = {
    "group": group_suite,
    "partition": partition_suite,
    "automorphism": automorphism_suite,
    "process": process_suite,
}


def run_suite(name: str) -> list[SuiteResult]:
    """Run one suite by name, or every suite for ``"all"``."""
    names = list(SUITES) if name == "all" else [name]
    results = []
    for key in names:
        started = time.perf_counter()
        logger.info("Running %s suite", key)
        suite = SUITES[key]()
        suite.wall_time = time.perf_counter() - started
        results.append(suite)
    return results
