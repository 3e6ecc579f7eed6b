"""Shared fixtures and hypothesis strategies."""

from __future__ import annotations

import pytest
from hypothesis import strategies as st
from hypothesis.strategies import DrawFn, composite

from core.boundary import BoundaryGroup
from core.processes import build_iid, build_ising, build_potts
from core.tree import Alphabet, Site


@pytest.fixture
def alphabet3() -> Alphabet:
    return Alphabet(d=3)


@pytest.fixture
def alphabet4() -> Alphabet:
    return Alphabet(d=4)


@pytest.fixture
def group3(alphabet3) -> BoundaryGroup:
    return BoundaryGroup(alphabet3)


@pytest.fixture
def group4(alphabet4) -> BoundaryGroup:
    return BoundaryGroup(alphabet4)


@pytest.fixture
def coin():
    return build_iid(3, [0.5, 0.5])


@pytest.fixture
def ising():
    return build_ising(3, 0.2)


@pytest.fixture
def potts():
    return build_potts(3, 3, 1.0)


@composite
def reduced_words(draw: DrawFn, d: int = 3, min_size: int = 0, max_size: int = 6) -> Site:
    """A reduced word over 1..d; each letter is drawn among those that differ from its predecessor."""
    size = draw(st.integers(min_size, max_size))
    word: list[int] = []
    for _ in range(size):
        choices = [x for x in range(1, d + 1) if not word or x != word[-1]]
        word.append(draw(st.sampled_from(choices)))
    return tuple(word)


def degrees() -> st.SearchStrategy[int]:
    return st.integers(3, 5)
