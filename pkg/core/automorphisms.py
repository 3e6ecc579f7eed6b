"""
Tree automorphisms restricted to finite balls.

An automorphism is stored as a total table on ball(R). Root-fixing maps send
ball(R) onto itself; left translations send it onto the ball of radius R
around their image of the root. The constructive maps (flips, geodesic
mappers, horosphere mappers) are built by composing flips on a working table.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from pydantic import BaseModel, Field

from core.boundary import BoundaryGroup, BoundaryPrefix, GroupElement, site_of
from core.errors import ConstructionError, DepthError, InvalidSiteError, OutsideRadiusError
from core.tree import (
    ROOT,
    Alphabet,
    Site,
    ball,
    concat_reduce,
    digit_letter,
    distance,
    format_site,
    letter_digit,
    parity,
)

logger = logging.getLogger(__name__)


class AutomorphismCheck(BaseModel):
    """Outcome of :meth:`DepthAutomorphism.verify`."""

    radius: int
    bijective: bool
    adjacency_preserving: bool
    parity_preserving: bool
    violations: list[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.bijective and self.adjacency_preserving and not self.violations


@dataclass(frozen=True)
class DepthAutomorphism:
    """An automorphism of the tree known on the ball of radius ``radius``."""

    alphabet: Alphabet
    radius: int
    table: dict[Site, Site] = field(repr=False)

    def apply(self, u: Site) -> Site:
        try:
            return self.table[u]
        except KeyError:
            raise OutsideRadiusError(
                f"Site {format_site(u)} lies outside the ball of radius {self.radius}"
            ) from None

    def image(self, sites) -> list[Site]:
        return [self.apply(u) for u in sites]

    @property
    def root_image(self) -> Site:
        return self.table[ROOT]

    @property
    def parity_preserving(self) -> bool:
        return all(parity(v) == parity(u) for u, v in self.table.items())

    def compose(self, other: DepthAutomorphism) -> DepthAutomorphism:
        """``self`` after ``other``, truncated to the smaller radius."""
        r = min(self.radius, other.radius)
        table = {u: self.apply(other.apply(u)) for u in ball(self.alphabet, r)}
        return DepthAutomorphism(self.alphabet, r, table)

    def inverse(self) -> DepthAutomorphism:
        if self.root_image != ROOT:
            raise ConstructionError("Only root-fixing tables can be inverted on the same ball")
        return DepthAutomorphism(self.alphabet, self.radius, {v: u for u, v in self.table.items()})

    def restrict(self, radius: int) -> DepthAutomorphism:
        if radius > self.radius:
            raise OutsideRadiusError(f"Cannot extend a radius-{self.radius} table to {radius}")
        return DepthAutomorphism(
            self.alphabet, radius, {u: self.table[u] for u in ball(self.alphabet, radius)}
        )

    def verify(self) -> AutomorphismCheck:
        """Re-check bijectivity onto the image ball, adjacency and parity."""
        violations: list[str] = []
        domain = ball(self.alphabet, self.radius)
        centre = self.table.get(ROOT)

        bijective = set(self.table) == set(domain) and centre is not None
        if not bijective:
            violations.append("table domain differs from the ball")
        else:
            images = list(self.table.values())
            if len(set(images)) != len(images):
                bijective = False
                violations.append("two sites share an image")
            for u, v in self.table.items():
                if distance(v, centre) > self.radius:
                    bijective = False
                    violations.append(
                        f"{format_site(u)} -> {format_site(v)} leaves the image ball"
                    )

        adjacency = True
        for u, v in self.table.items():
            if u and u[:-1] in self.table and distance(v, self.table[u[:-1]]) != 1:
                adjacency = False
                violations.append(f"edge at {format_site(u)} is not preserved")

        parity_ok = self.parity_preserving
        if centre == ROOT and not parity_ok:
            violations.append("root is fixed but parity is not preserved")

        return AutomorphismCheck(
            radius=self.radius,
            bijective=bijective,
            adjacency_preserving=adjacency,
            parity_preserving=parity_ok,
            violations=violations,
        )

    def export(self) -> list[tuple[str, str]]:
        """(site, image) string pairs in shortlex order of the site."""
        return [(format_site(u), format_site(self.table[u])) for u in ball(self.alphabet, self.radius)]


def identity(alphabet: Alphabet, radius: int) -> DepthAutomorphism:
    return DepthAutomorphism(alphabet, radius, {u: u for u in ball(alphabet, radius)})


def left_translation(alphabet: Alphabet, w: Site, radius: int) -> DepthAutomorphism:
    """theta_w : v -> w v on ball(radius)."""
    alphabet.check_site(w)
    return DepthAutomorphism(
        alphabet, radius, {v: concat_reduce(w, v) for v in ball(alphabet, radius)}
    )


# ─── Flips ───────────────────────────────────────────────────────────────────

def _reencode(w: Site, pos: int, letter: int) -> Site:
    """Replace w[pos] by ``letter`` and rewrite the rest with the same letter digits."""
    out = list(w[:pos]) + [letter]
    prev_old, prev_new = w[pos], letter
    for y in w[pos + 1:]:
        z = digit_letter(letter_digit(y, prev_old), prev_new)
        out.append(z)
        prev_old, prev_new = y, z
    return tuple(out)


def _flip_site(w: Site, u: Site, a: int, b: int) -> Site:
    p = len(u)
    if len(w) <= p or w[:p] != u:
        return w
    if w[p] == a:
        return _reencode(w, p, b)
    if w[p] == b:
        return _reencode(w, p, a)
    return w


def _check_flip(alphabet: Alphabet, u: Site, a: int, b: int) -> None:
    alphabet.check_site(u)
    alphabet.check_letter(a)
    alphabet.check_letter(b)
    if u and (u[-1] == a or u[-1] == b):
        raise InvalidSiteError(
            f"Letters {a}, {b} must both differ from the last letter of {format_site(u)}"
        )


def _flip_in_place(table: dict[Site, Site], u: Site, a: int, b: int) -> None:
    for key, value in table.items():
        table[key] = _flip_site(value, u, a, b)


def flip(alphabet: Alphabet, u: Site, a: int, b: int, radius: int) -> DepthAutomorphism:
    """Swap the subtrees under u·a and u·b, level by level in lexicographic order.

    Every vertex outside the two subtrees is fixed. The map is an involution.

    Raises
    ------
    InvalidSiteError
        If a or b equals the last letter of u.
    """
    _check_flip(alphabet, u, a, b)
    if radius < len(u) + 1:
        raise OutsideRadiusError(f"Flip at {format_site(u)} needs radius at least {len(u) + 1}")
    table = {v: _flip_site(v, u, a, b) for v in ball(alphabet, radius)}
    return DepthAutomorphism(alphabet, radius, table)


# ─── Geodesic and horosphere mappers ────────────────────────────────────────

def _geodesic_table(
    alphabet: Alphabet,
    xi: BoundaryPrefix,
    zeta: BoundaryPrefix,
    radius: int,
    stage: int | None = None,
) -> dict[Site, Site]:
    alphabet.check_site(xi)
    alphabet.check_site(zeta)
    if len(xi) < radius or len(zeta) < radius:
        raise DepthError(f"Geodesic mapper of radius {radius} needs prefixes of that depth")
    steps = radius if stage is None else min(stage, radius)
    table = {v: v for v in ball(alphabet, radius)}
    flips = 0
    for k in range(steps):
        current = table[xi[:k + 1]][k]
        if current != zeta[k]:
            _flip_in_place(table, zeta[:k], current, zeta[k])
            flips += 1
    logger.debug("geodesic mapper %s -> %s, radius %d: %d flips",
                 format_site(xi[:radius]), format_site(zeta[:radius]), radius, flips)
    return table


def geodesic_mapper(
    alphabet: Alphabet,
    xi: BoundaryPrefix,
    zeta: BoundaryPrefix,
    radius: int,
    stage: int | None = None,
) -> DepthAutomorphism:
    """Root-fixing automorphism with xi_1 ... xi_k -> zeta_1 ... zeta_k for k <= radius.

    Parameters
    ----------
    alphabet : Alphabet
        Letters of the tree.
    xi, zeta : BoundaryPrefix
        Prefixes of depth at least ``radius``.
    radius : int
        Radius of the table.
    stage : int, optional
        Stop after the first ``stage`` flip steps. The stage-k map already sends
        the first k geodesic vertices to their targets.
    """
    return DepthAutomorphism(alphabet, radius, _geodesic_table(alphabet, xi, zeta, radius, stage))


def horosphere_coset_word(group: BoundaryGroup, g: GroupElement) -> tuple[int, ...]:
    """Digits w_1 ... w_n with g = g_n^{w_1} g_{n-1}^{w_2} ... g_1^{w_n}."""
    word = []
    e = g.exponent
    for _ in range(g.level):
        e, digit = divmod(e, group.q)
        word.append(digit)
    return tuple(word)


def horosphere_mapper(
    group: BoundaryGroup,
    xi: BoundaryPrefix,
    zeta: BoundaryPrefix,
    n: int,
    radius: int,
) -> DepthAutomorphism:
    """Root-fixing automorphism with s(g, xi) -> s(g, zeta) for every g in G_n.

    Starts from the geodesic mapper and, level by level, rearranges the
    subtrees below each horospherical site so that its prefixes land on the
    matching prefixes of the zeta-site. Levels m = 1..n are handled in order;
    within a level prefixes are placed by increasing length and then by the
    coset word of g.

    Raises
    ------
    DepthError
        If radius < 2n or either prefix is shorter than radius + 1.
    ConstructionError
        If a parent prefix was not placed before its children.
    """
    if radius < 2 * n:
        raise DepthError(f"Horosphere mapper at level {n} needs radius at least {2 * n}")
    group.check_prefix(xi, radius + 1)
    group.check_prefix(zeta, radius + 1)
    table = _geodesic_table(group.alphabet, xi, zeta, radius)

    flips = 0
    for m in range(1, n + 1):
        level = sorted(group.elements_of_level(m), key=lambda g: horosphere_coset_word(group, g))
        pairs = [(site_of(group, g, xi), site_of(group, g, zeta)) for g in level]
        for length in range(m + 1, 2 * m + 1):
            for source, target in pairs:
                src, dst = source[:length], target[:length]
                parent = dst[:-1]
                if table[src[:-1]] != parent:
                    raise ConstructionError(
                        f"Parent of {format_site(src)} is not mapped onto {format_site(parent)}"
                    )
                current = table[src][-1]
                if current != dst[-1]:
                    _flip_in_place(table, parent, current, dst[-1])
                    flips += 1
    logger.debug("horosphere mapper level %d, radius %d: %d flips", n, radius, flips)
    return DepthAutomorphism(group.alphabet, radius, table)
