"""
Boundary of the tree at finite depth and the group G acting on it.

A boundary point is represented by a finite prefix (a reduced word read as
xi_1 xi_2 ... xi_N). Two prefixes lie in the same R_0^n class when they agree
from position n+1 on. Inside a class the members are linearly ordered; the
position of xi in its class is ``rank(xi, n)``, a number in base q = d-1 whose
m-th digit is the index of xi_m among the letters different from xi_{m+1}.

G is the union of the cyclic groups G_n of order q^n, realised as the rationals
m / q^n modulo 1. The generator g_n shifts the rank inside every R_0^n class
by one, so g_n = g_{n+1}^q holds by construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from config import FOLNER_STRICT_ORDER, MAX_GROUP_LEVEL
from core.errors import (
    CapExceededError,
    ConstructionError,
    DepthError,
    GroupElementError,
    InvalidSiteError,
)
from core.tree import (
    Alphabet,
    Site,
    concat_reduce,
    digit_letter,
    distance,
    format_site,
    inverse,
    letter_digit,
    shortlex,
    sphere,
)

logger = logging.getLogger(__name__)

BoundaryPrefix = Site


@dataclass(frozen=True, order=True)
class GroupElement:
    """g_n^m in lowest terms: level 0 means identity, otherwise q does not divide m."""

    level: int
    exponent: int

    def __str__(self) -> str:
        return f"{self.level}:{self.exponent}"

    @property
    def is_identity(self) -> bool:
        return self.level == 0


IDENTITY = GroupElement(0, 0)


class BoundaryGroup:
    """The group G for a fixed alphabet, together with its action on prefixes.

    Parameters
    ----------
    alphabet : Alphabet
        Letters of the tree. The group order at level n is (d-1)^n.
    max_level : int, optional
        Largest level accepted when enumerating. Defaults to config value.
    """

    def __init__(self, alphabet: Alphabet, max_level: int | None = None):
        self.alphabet = alphabet
        self.q = alphabet.d - 1
        self.max_level = MAX_GROUP_LEVEL if max_level is None else max_level

    # ─── Elements ────────────────────────────────────────────────────────

    def element(self, n: int, m: int) -> GroupElement:
        """Canonical form of g_n^m (m is reduced modulo q^n first)."""
        if n < 0:
            raise GroupElementError(f"Level must be non-negative, got {n}")
        m %= self.q ** n
        while n > 0 and m % self.q == 0:
            m //= self.q
            n -= 1
        if n == 0:
            m = 0
        return GroupElement(n, m)

    def generator(self, n: int) -> GroupElement:
        return self.element(n, 1)

    def parse(self, text: str) -> GroupElement:
        """Parse the ``"n:m"`` form and canonicalize it."""
        try:
            n, m = (int(part) for part in text.split(":"))
        except ValueError as exc:
            raise GroupElementError(f"Cannot parse group element '{text}'") from exc
        return self.element(n, m)

    def exponent_at(self, g: GroupElement, n: int) -> int:
        """The m with g = g_n^m, i.e. the permutation psi_n^m on R_0^n classes."""
        if g.level > n:
            raise GroupElementError(f"Element {g} does not lie in G_{n}")
        return g.exponent * self.q ** (n - g.level)

    def mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        n = max(g.level, h.level)
        return self.element(n, self.exponent_at(g, n) + self.exponent_at(h, n))

    def inv(self, g: GroupElement) -> GroupElement:
        return self.element(g.level, -g.exponent)

    def pow(self, g: GroupElement, k: int) -> GroupElement:
        return self.element(g.level, g.exponent * k)

    def order(self, g: GroupElement) -> int:
        return self.q ** g.level

    def _check_level(self, n: int) -> None:
        if n < 0:
            raise GroupElementError(f"Level must be non-negative, got {n}")
        if n > self.max_level:
            raise CapExceededError(f"Level {n} exceeds the group level cap {self.max_level}")

    def elements(self, n: int) -> list[GroupElement]:
        """All of G_n, ordered by their exponent at level n."""
        self._check_level(n)
        return [self.element(n, m) for m in range(self.q ** n)]

    def elements_of_level(self, n: int) -> list[GroupElement]:
        """V_n = G_n minus G_{n-1}; for n = 0 only the identity."""
        if n == 0:
            return [IDENTITY]
        return [g for g in self.elements(n) if g.level == n]

    # ─── Ranks and the action ────────────────────────────────────────────

    def check_prefix(self, xi: BoundaryPrefix, depth: int) -> None:
        self.alphabet.check_site(xi)
        if len(xi) < depth:
            raise DepthError(
                f"Prefix {format_site(xi)} has depth {len(xi)}, at least {depth} required"
            )

    def rank(self, xi: BoundaryPrefix, n: int) -> int:
        """Zero-based position of xi inside its R_0^n class."""
        self.check_prefix(xi, n + 1)
        r = 0
        for m in range(n):
            r = r * self.q + letter_digit(xi[m], xi[m + 1])
        return r

    def unrank(self, r: int, n: int, tail: BoundaryPrefix) -> BoundaryPrefix:
        """The member of rank ``r`` in the R_0^n class whose entries from n+1 on are ``tail``."""
        if not tail:
            raise DepthError("unrank needs at least the entry at position n+1")
        if not 0 <= r < self.q ** n:
            raise GroupElementError(f"Rank {r} is outside [0, {self.q ** n})")
        head: list[int] = []
        nxt = tail[0]
        for _ in range(n):
            r, digit = divmod(r, self.q)
            nxt = digit_letter(digit, nxt)
            head.append(nxt)
        return tuple(reversed(head)) + tuple(tail)

    def act(self, g: GroupElement, xi: BoundaryPrefix) -> BoundaryPrefix:
        if g.is_identity:
            self.check_prefix(xi, 1)
            return tuple(xi)
        n = g.level
        r = (self.rank(xi, n) + g.exponent) % self.q ** n
        return self.unrank(r, n, xi[n:])

    def r0_class(self, xi: BoundaryPrefix, n: int) -> list[BoundaryPrefix]:
        """The R_0^n class of xi in increasing order."""
        self.check_prefix(xi, n + 1)
        return [self.unrank(r, n, xi[n:]) for r in range(self.q ** n)]


# ─── Patterson-Sullivan measure ─────────────────────────────────────────────

def ps_sample(alphabet: Alphabet, depth: int, rng: np.random.Generator) -> BoundaryPrefix:
    """Draw a prefix of the given depth from the Patterson-Sullivan measure."""
    if depth < 1:
        raise DepthError(f"Depth must be at least 1, got {depth}")
    first = int(rng.integers(1, alphabet.d + 1))
    word = [first]
    for _ in range(depth - 1):
        x = int(rng.integers(1, alphabet.d))
        if x >= word[-1]:
            x += 1
        word.append(x)
    return tuple(word)


def ps_cylinder_weight(alphabet: Alphabet, u: Site) -> float:
    """nu-measure of the cylinder of boundary points starting with u."""
    if not u:
        return 1.0
    return 1.0 / (alphabet.d * (alphabet.d - 1) ** (len(u) - 1))


def boundary_prefixes(alphabet: Alphabet, depth: int) -> tuple[BoundaryPrefix, ...]:
    """Every reduced prefix of the given depth; each carries nu-weight d^-1 (d-1)^-(depth-1)."""
    return sphere(alphabet, depth)


# ─── Cocycle and site map ───────────────────────────────────────────────────

def cocycle_u(xi: BoundaryPrefix, zeta: BoundaryPrefix, n: int) -> Site:
    """Shortest word u with zeta = u^-1 xi, for prefixes that agree after position n."""
    if len(xi) < n + 1 or len(zeta) < n + 1:
        raise DepthError(f"cocycle_u needs prefixes of depth at least {n + 1}")
    common = min(len(xi), len(zeta))
    if xi[n:common] != zeta[n:common]:
        raise InvalidSiteError(
            f"Prefixes {format_site(xi)} and {format_site(zeta)} differ beyond position {n}"
        )
    return concat_reduce(xi[:n], inverse(zeta[:n]))


def site_of(group: BoundaryGroup, g: GroupElement, xi: BoundaryPrefix) -> Site:
    """The site s(g, xi) = u(xi, g^-1 xi)."""
    return cocycle_u(xi, group.act(group.inv(g), xi), g.level)


def cocycle_phi(group: BoundaryGroup, g: GroupElement, xi: BoundaryPrefix) -> Site:
    """phi(g, xi) = u(g xi, xi), a cocycle for the action of G on the boundary."""
    return cocycle_u(group.act(g, xi), xi, g.level)


def busemann(v: Site, xi: BoundaryPrefix) -> int:
    """Busemann value of v with respect to xi, normalised to vanish at the root."""
    if len(xi) < len(v) + 1:
        raise DepthError(
            f"busemann needs depth at least {len(v) + 1}, prefix has {len(xi)}"
        )
    return distance(v, tuple(xi)) - len(xi)


def horoball(group: BoundaryGroup, xi: BoundaryPrefix, n: int) -> list[Site]:
    """B_n^xi = {s(g, xi) : g in G_n}, in shortlex order."""
    group.check_prefix(xi, n + 1)
    return shortlex(site_of(group, g, xi) for g in group.elements(n))


def horoshell(group: BoundaryGroup, xi: BoundaryPrefix, n: int) -> list[Site]:
    """S_n^xi = {s(g, xi) : g in V_n}; lies on the metric sphere of radius 2n."""
    group.check_prefix(xi, n + 1)
    return shortlex(site_of(group, g, xi) for g in group.elements_of_level(n))


# ─── Folner sets ─────────────────────────────────────────────────────────────

def _folner_letter(alphabet: Alphabet, xi: BoundaryPrefix, n: int, strict: bool) -> int:
    candidates = alphabet.others(xi[n - 1])
    pivot = xi[n]
    larger = [x for x in candidates if (x > pivot if strict else x >= pivot)]
    return larger[0] if larger else candidates[0]


def folner_F(
    group: BoundaryGroup,
    xi: BoundaryPrefix,
    n: int,
    strict: bool | None = None,
) -> list[GroupElement]:
    """The coset F_n^xi = g_n^j G_{n-1}.

    Parameters
    ----------
    group : BoundaryGroup
        Group bound to the alphabet.
    xi : BoundaryPrefix
        Boundary prefix of depth at least n+1; only xi_1 ... xi_{n+1} are read.
    n : int
        Scale, n >= 1.
    strict : bool, optional
        Whether the selected letter must be strictly larger than xi_{n+1}.
        Defaults to ``FOLNER_STRICT_ORDER``.

    Returns
    -------
    list[GroupElement]
        The (d-1)^(n-1) elements of the coset, ordered as G_{n-1}.

    Raises
    ------
    ConstructionError
        If no power g_n^j moves entry n onto the selected letter.
    """
    if n < 1:
        raise GroupElementError(f"folner_F needs n >= 1, got {n}")
    group.check_prefix(xi, n + 1)
    strict = FOLNER_STRICT_ORDER if strict is None else strict
    target = _folner_letter(group.alphabet, xi, n, strict)

    hits = [
        j for j in range(1, group.q + 1)
        if group.act(group.element(n, j), xi)[n - 1] == target
    ]
    if not hits:
        raise ConstructionError(
            f"No power of g_{n} sends entry {n} of {format_site(xi[:n + 1])} to letter {target}"
        )
    if len(hits) > 1:
        logger.debug("folner_F tie at %s, n=%d: candidates %s, picked %d",
                     format_site(xi[:n + 1]), n, hits, hits[0])
    shift = group.element(n, hits[0])
    return [group.mul(shift, h) for h in group.elements(n - 1)]


def sphere_partition(group: BoundaryGroup, n: int) -> dict[Site, list[Site]]:
    """The blocks {s(g, u) : g in F_n^u} for every u on the sphere of radius n+1.

    The blocks partition the sphere of radius 2n into pieces of size (d-1)^(n-1)
    that are pairwise at distance at least 2n.
    """
    if n < 1:
        raise GroupElementError(f"sphere_partition needs n >= 1, got {n}")
    blocks: dict[Site, list[Site]] = {}
    for u in sphere(group.alphabet, n + 1):
        blocks[u] = shortlex(site_of(group, g, u) for g in folner_F(group, u, n))
    return blocks


def folner_defect(group: BoundaryGroup, F: list[GroupElement], g: GroupElement) -> float:
    """|gF symmetric-difference F| / |F|."""
    base = set(F)
    moved = {group.mul(g, f) for f in F}
    return len(moved ^ base) / len(base)


def tempered_ratio(group: BoundaryGroup, sets: list[list[GroupElement]]) -> float:
    """max_n |union_{k<n} F_k^-1 F_n| / |F_n| over the given sequence."""
    worst = 0.0
    for n in range(1, len(sets)):
        spread = {
            group.mul(group.inv(a), b)
            for k in range(n)
            for a in sets[k]
            for b in sets[n]
        }
        worst = max(worst, len(spread) / len(sets[n]))
    return worst


def export_partition(blocks: dict[Site, list[Site]]) -> dict[str, list[str]]:
    """JSON-ready form of :func:`sphere_partition`."""
    return {format_site(u): [format_site(s) for s in block] for u, block in blocks.items()}
