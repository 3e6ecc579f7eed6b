"""
The d-regular tree as the Cayley graph of the d-fold free product of Z_2.

Sites are reduced words over the letters ``1..d`` stored as tuples of ints;
the empty tuple is the root ``e``. Every letter is its own inverse, so the
inverse of a word is its reversal.
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache

from pydantic import BaseModel, ConfigDict, Field

from config import MAX_RADIUS
from core.errors import CapExceededError, InvalidSiteError

Site = tuple[int, ...]
ROOT: Site = ()

_LETTER_NAMES = "abcdefghijklmnopqrstuvwxyz"


class Parity(str, Enum):
    """Bipartition class of a vertex."""
    EVEN = "even"
    ODD = "odd"


class Alphabet(BaseModel):
    """The generating set a_1 < ... < a_d, encoded as the integers 1..d.

    Parameters
    ----------
    d : int
        Degree of the tree, d > 2.
    """

    model_config = ConfigDict(frozen=True)

    d: int = Field(gt=2, description="Degree of the regular tree.")

    @property
    def letters(self) -> tuple[int, ...]:
        return tuple(range(1, self.d + 1))

    def others(self, excluded: int) -> tuple[int, ...]:
        """Letters different from ``excluded`` in alphabet order (0 excludes nothing)."""
        return tuple(x for x in range(1, self.d + 1) if x != excluded)

    def check_letter(self, x: int) -> None:
        if not 1 <= x <= self.d:
            raise InvalidSiteError(f"Letter {x} is not in the alphabet 1..{self.d}")

    def check_site(self, u: Site) -> None:
        """Raise InvalidSiteError unless ``u`` is a reduced word over this alphabet."""
        prev = 0
        for x in u:
            self.check_letter(x)
            if x == prev:
                raise InvalidSiteError(f"Word {format_site(u)} is not reduced")
            prev = x


# ─── Letter digits ───────────────────────────────────────────────────────────

def letter_digit(x: int, prev: int) -> int:
    """Zero-based index of ``x`` among the letters different from ``prev``."""
    return x - 1 if prev == 0 or x < prev else x - 2


def digit_letter(digit: int, prev: int) -> int:
    """Inverse of :func:`letter_digit`."""
    x = digit + 1
    if prev != 0 and x >= prev:
        x += 1
    return x


# ─── Text form ───────────────────────────────────────────────────────────────

def parse_site(text: str) -> Site:
    """Parse a site from its string form.

    Digits ``"121"`` denote a_1 a_2 a_1; lowercase letters ``"aba"`` are accepted
    as a shorthand with ``a = 1``. Words over more than nine letters use dots
    (``"10.2.10"``). The empty string is the root.
    """
    text = text.strip()
    if not text:
        return ROOT
    if "." in text:
        return tuple(int(part) for part in text.split("."))
    if text.isdigit():
        return tuple(int(ch) for ch in text)
    if text.isalpha() and text.islower():
        return tuple(_LETTER_NAMES.index(ch) + 1 for ch in text)
    raise InvalidSiteError(f"Cannot parse site '{text}'")


def format_site(u: Site) -> str:
    """Inverse of :func:`parse_site` (digit form)."""
    if any(x > 9 for x in u):
        return ".".join(str(x) for x in u)
    return "".join(str(x) for x in u)


# ─── Group operations ───────────────────────────────────────────────────────

def inverse(u: Site) -> Site:
    return tuple(reversed(u))


def concat_reduce(u: Site, v: Site) -> Site:
    """Reduced word of the group product u·v."""
    out = list(u)
    for x in v:
        if out and out[-1] == x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def common_prefix_length(u: Site, v: Site) -> int:
    k = 0
    for x, y in zip(u, v):
        if x != y:
            break
        k += 1
    return k


def distance(u: Site, v: Site) -> int:
    """Path distance, i.e. the length of reduce(u⁻¹v)."""
    return len(u) + len(v) - 2 * common_prefix_length(u, v)


def set_distance(us, vs) -> int:
    """Minimal distance between two finite site sets."""
    return min(distance(u, v) for u in us for v in vs)


def compatible(u: Site, x: int) -> bool:
    return not u or u[-1] != x


def parity(u: Site) -> Parity:
    return Parity.EVEN if len(u) % 2 == 0 else Parity.ODD


# ─── Enumeration ─────────────────────────────────────────────────────────────

def _check_radius(r: int, max_radius: int | None) -> None:
    cap = MAX_RADIUS if max_radius is None else max_radius
    if r < 0:
        raise ValueError(f"Radius must be non-negative, got {r}")
    if r > cap:
        raise CapExceededError(f"Radius {r} exceeds the enumeration cap {cap}")


def extensions(alphabet: Alphabet, prev: int, k: int) -> list[Site]:
    """All reduced words v of length k whose first letter differs from ``prev``,
    in lexicographic order."""
    words: list[Site] = [ROOT]
    for _ in range(k):
        words = [
            w + (x,)
            for w in words
            for x in alphabet.others(w[-1] if w else prev)
        ]
    return words


@lru_cache(maxsize=64)
def _sphere(alphabet: Alphabet, r: int) -> tuple[Site, ...]:
    return tuple(extensions(alphabet, 0, r))


def sphere(alphabet: Alphabet, r: int, max_radius: int | None = None) -> tuple[Site, ...]:
    """All sites at distance ``r`` from the root, in lexicographic order."""
    _check_radius(r, max_radius)
    return _sphere(alphabet, r)


def ball(alphabet: Alphabet, r: int, max_radius: int | None = None) -> tuple[Site, ...]:
    """All sites at distance at most ``r`` from the root, in shortlex order."""
    _check_radius(r, max_radius)
    return tuple(u for k in range(r + 1) for u in _sphere(alphabet, k))


def sphere_size(alphabet: Alphabet, r: int) -> int:
    return 1 if r == 0 else alphabet.d * (alphabet.d - 1) ** (r - 1)


def subtree_level(alphabet: Alphabet, u: Site, k: int) -> list[Site]:
    """The k-th level L_u^k of the subtree under ``u``, in lexicographic order of v."""
    if not u:
        raise InvalidSiteError("The subtree under the root is not defined")
    if k < 0:
        raise ValueError(f"Level must be non-negative, got {k}")
    return [u + v for v in extensions(alphabet, u[-1], k)]


def children(alphabet: Alphabet, u: Site) -> list[Site]:
    return [u + (x,) for x in alphabet.others(u[-1] if u else 0)]


def neighbors(alphabet: Alphabet, u: Site) -> list[Site]:
    out = [u[:-1]] if u else []
    return out + children(alphabet, u)


def shortlex(sites) -> list[Site]:
    """Sites sorted by length, then lexicographically."""
    return sorted(sites, key=lambda w: (len(w), w))


def prefix_closure(sites) -> list[Site]:
    """Minimal subtree spanning ``sites`` and the root, in shortlex order."""
    closure: set[Site] = {ROOT}
    for u in sites:
        for k in range(1, len(u) + 1):
            closure.add(u[:k])
    return shortlex(closure)


def alternating_word(k: int) -> Site:
    """a_1 a_2 a_1 a_2 ... of length k, a site at distance k from the root."""
    return tuple(1 if i % 2 == 0 else 2 for i in range(k))
