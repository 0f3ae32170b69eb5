"""Orbital index sets, excitation levels and the global coordinate order.

Conventions
-----------
All user-facing index sets are sorted tuples of **1-based** orbital labels,
e.g. ``(1, 4, 5)`` for the Plücker coordinate psi_145.  Internally an index set
is also available as a bitmask (bit ``i - 1`` set for orbital ``i``) and as a
**0-based position** in the global order returned by
:func:`enumerate_orbital_sets`.  This module is the only place where the two
numbering schemes meet.

The global order is level-major, lexicographic within a level, so the
reference set ``[d]`` always sits at position 0.  For ``(d, n) = (2, 5)`` it
reads 12, 13, 14, 15, 23, 24, 25, 34, 35, 45.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidDimensionError

OrbitalSet = tuple  # sorted tuple of 1-based ints

MAX_ORBITALS = 63


def _check_dims(d: int, n: int) -> None:
    if not (isinstance(d, (int, np.integer)) and isinstance(n, (int, np.integer))):
        raise InvalidDimensionError(f"d and n must be integers, got {d!r}, {n!r}")
    if d < 1 or n < 1 or d > n:
        raise InvalidDimensionError(f"need 1 <= d <= n, got d={d}, n={n}")
    if n > MAX_ORBITALS:
        raise InvalidDimensionError(
            f"n={n} exceeds the bitmask width ({MAX_ORBITALS} orbitals)")


def level(I: Sequence[int], d: int) -> int:
    """Excitation level ``|I \\ [d]|``."""
    return sum(1 for i in I if i > d)


def to_mask(I: Sequence[int]) -> int:
    m = 0
    for i in I:
        m |= 1 << (i - 1)
    return m


def from_mask(mask: int) -> OrbitalSet:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation that sorts ``seq`` (distinct entries)."""
    inv = 0
    s = list(seq)
    for a in range(len(s)):
        for b in range(a + 1, len(s)):
            if s[a] > s[b]:
                inv += 1
    return -1 if inv % 2 else 1


def enumerate_orbital_sets(d: int, n: int) -> list[OrbitalSet]:
    """All d-subsets of [n] in the global order (reference first)."""
    return list(orbital_basis(d, n).sets)


class BlockLabel(NamedTuple):
    """The (alpha, beta) label of a coordinate: holes alpha in [d], particles beta."""
    alpha: tuple
    beta: tuple


def to_block(I: Sequence[int], d: int) -> BlockLabel:
    Iset = set(I)
    alpha = tuple(i for i in range(1, d + 1) if i not in Iset)
    beta = tuple(sorted(i for i in I if i > d))
    return BlockLabel(alpha, beta)


def from_block(label: BlockLabel, d: int) -> OrbitalSet:
    alpha, beta = label
    if len(alpha) != len(beta):
        raise InvalidDimensionError("alpha and beta must have equal size")
    if any(a < 1 or a > d for a in alpha) or any(b <= d for b in beta):
        raise InvalidDimensionError(f"bad block label {label!r} for d={d}")
    return tuple(sorted((set(range(1, d + 1)) - set(alpha)) | set(beta)))


def dual_relabel(I: Sequence[int], d: int, n: int) -> OrbitalSet:
    """Particle-hole relabeling ``I -> {n + 1 - i : i not in I}``."""
    Iset = set(I)
    return tuple(sorted(n + 1 - i for i in range(1, n + 1) if i not in Iset))


@dataclass(frozen=True)
class OrbitalBasis:
    """The ordered coordinate system of wedge_d C^n."""
    d: int
    n: int
    sets: tuple
    levels: np.ndarray
    position: dict

    @property
    def size(self) -> int:
        return len(self.sets)

    def index(self, I: Sequence[int]) -> int:
        try:
            return self.position[tuple(I)]
        except KeyError:
            raise InvalidDimensionError(
                f"{tuple(I)!r} is not a sorted {self.d}-subset of [{self.n}]") from None

    def at_level(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.levels == k)

    def at_levels(self, ks) -> np.ndarray:
        return np.flatnonzero(np.isin(self.levels, list(ks)))

    @property
    def max_level(self) -> int:
        return min(self.d, self.n - self.d)


@lru_cache(maxsize=None)
def orbital_basis(d: int, n: int) -> OrbitalBasis:
    _check_dims(d, n)
    sets = sorted(combinations(range(1, n + 1), d), key=lambda I: (level(I, d), I))
    levels = np.array([level(I, d) for I in sets], dtype=int)
    levels.setflags(write=False)
    return OrbitalBasis(d, n, tuple(sets), levels, {I: k for k, I in enumerate(sets)})


@dataclass(frozen=True)
class TruncationSet:
    """A nonempty proper subset sigma of [d] selecting the retained levels."""
    sigma: tuple
    d: int
    n: int

    def __post_init__(self):
        _check_dims(self.d, self.n)
        s = tuple(sorted(set(int(k) for k in self.sigma)))
        object.__setattr__(self, "sigma", s)
        if not s:
            raise InvalidDimensionError("sigma must be nonempty")
        if s[0] < 1 or s[-1] > self.d:
            raise InvalidDimensionError(f"sigma={s} is not a subset of [{self.d}]")
        if len(s) == self.d:
            raise InvalidDimensionError("sigma must be a proper subset of [d]")

    @classmethod
    def parse(cls, text: str, d: int, n: int) -> "TruncationSet":
        """From a comma list such as ``"1,2"``."""
        try:
            sigma = [int(tok) for tok in str(text).split(",") if tok.strip()]
        except ValueError:
            raise InvalidDimensionError(f"cannot parse sigma {text!r}") from None
        return cls(tuple(sigma), d, n)

    @cached_property
    def basis(self) -> OrbitalBasis:
        return orbital_basis(self.d, self.n)

    @cached_property
    def tilde(self) -> np.ndarray:
        """Global positions of the index family sigma-tilde."""
        return self.basis.at_levels(self.sigma)

    @cached_property
    def tilde_sets(self) -> list:
        return [self.basis.sets[k] for k in self.tilde]

    @cached_property
    def rows(self) -> np.ndarray:
        """Positions of sigma-tilde together with the reference set."""
        return np.concatenate([[0], self.tilde])

    @cached_property
    def complement_levels(self) -> tuple:
        return tuple(k for k in range(1, self.d + 1) if k not in self.sigma)

    def __len__(self) -> int:
        return len(self.tilde)

    def expected_size(self) -> int:
        return sum(comb(self.d, k) * comb(self.n - self.d, k) for k in self.sigma)

    def label(self) -> str:
        return "{" + ",".join(map(str, self.sigma)) + "}"
