"""Uniform block permutations and the two master polynomials.

A uniform block permutation of [2d] pairs a set partition {alpha_i} of [d]
with blocks beta_i of {d+1, ..., 2d}, |alpha_i| = |beta_i|.  Each one indexes
one monomial t_pi = prod_i t_{alpha_i, beta_i} of the forward master
polynomial psi_{[2d] minus [d]}(x) and one monomial c_pi of the backward
master x_{[2d] minus [d]}(psi).

Monomials are written in the x/psi coordinates of the space (d, 2d): the
variable for block (alpha, beta) is the index set ([d] minus alpha) union beta.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Iterator, Sequence

from .errors import LevelMismatchError, ResourceLimitError
from .indexing import (BlockLabel, from_block, level, orbital_basis,
                       permutation_sign, to_block)
from .polynomial import SparsePolynomial

MAX_UBP_DEGREE = 6


@dataclass(frozen=True)
class UniformBlockPermutation:
    blocks: tuple  # of BlockLabel, ordered by min(alpha)
    sign: int
    nu: int

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def mobius(self) -> int:
        """(-1)^(k-1) (k-1)!"""
        return (-1) ** (self.k - 1) * factorial(self.k - 1)

    @property
    def backward_coefficient(self) -> int:
        return self.sign * (-1) ** (self.nu + self.k - 1) * factorial(self.k - 1)

    def variables(self, d: int) -> list:
        return [from_block(b, d) for b in self.blocks]


def set_partitions(items: Sequence) -> Iterator[list]:
    """Set partitions with blocks ordered by their smallest element."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _ordered_assignments(pool: tuple, sizes: list) -> Iterator[list]:
    if not sizes:
        yield []
        return
    for block in combinations(pool, sizes[0]):
        remaining = tuple(p for p in pool if p not in block)
        for tail in _ordered_assignments(remaining, sizes[1:]):
            yield [block] + tail


@lru_cache(maxsize=None)
def enumerate_ubp(d: int) -> tuple:
    """All uniform block permutations of [2d] with sign and nu populated."""
    if not 1 <= d <= MAX_UBP_DEGREE:
        raise ResourceLimitError(f"d={d} outside the supported range 1..{MAX_UBP_DEGREE}")
    bar = tuple(range(d + 1, 2 * d + 1))
    base_nu = d * (d - 1) // 2
    out = []
    for part in set_partitions(range(1, d + 1)):
        alphas = sorted((tuple(sorted(b)) for b in part), key=lambda a: a[0])
        sizes = [len(a) for a in alphas]
        alpha_sign = permutation_sign([i for a in alphas for i in a])
        nu = base_nu - sum(s * (s - 1) // 2 for s in sizes)
        for betas in _ordered_assignments(bar, sizes):
            beta_sign = permutation_sign([j for b in betas for j in b])
            blocks = tuple(BlockLabel(a, tuple(b)) for a, b in zip(alphas, betas))
            out.append(UniformBlockPermutation(blocks, alpha_sign * beta_sign, nu))
    out.sort(key=lambda p: (p.k, p.blocks))
    return tuple(out)


@lru_cache(maxsize=None)
def master_forward(d: int) -> SparsePolynomial:
    """psi_{[2d] minus [d]} as a polynomial in the amplitudes of (d, 2d)."""
    return SparsePolynomial({
        tuple((v, 1) for v in sorted(p.variables(d))): p.sign for p in enumerate_ubp(d)
    })


@lru_cache(maxsize=None)
def master_backward(d: int) -> SparsePolynomial:
    """x_{[2d] minus [d]} as a polynomial in the Plücker coordinates of (d, 2d)."""
    return SparsePolynomial({
        tuple((v, 1) for v in sorted(p.variables(d))): p.backward_coefficient
        for p in enumerate_ubp(d)
    })


def reference_sign(I: Sequence[int], d: int) -> int:
    """The sign e_I with psi_I(x) = e_I x_I + (lower levels)."""
    Iset = set(I)
    common = [i for i in range(1, d + 1) if i in Iset]
    holes = [i for i in range(1, d + 1) if i not in Iset]
    return permutation_sign(common + holes)


def replicate(master: SparsePolynomial, target: Sequence[int], d: int, n: int) -> SparsePolynomial:
    """Relabel a level-r master polynomial onto the coordinate ``target`` of (d, n).

    The holes of ``target`` take the place of [r] and its particles the place of
    {r+1, ..., 2r}, both order-preserving; the result is multiplied by the sign
    of the linear term of ``target``.
    """
    target = tuple(sorted(target))
    r = master.degree
    lev = level(target, d)
    if lev != r:
        raise LevelMismatchError(f"target {target} has level {lev}, master has degree {r}")
    orbital_basis(d, n).index(target)
    alpha, beta = to_block(target, d)
    phi = {i + 1: a for i, a in enumerate(alpha)}
    phi.update({r + j + 1: b for j, b in enumerate(beta)})
    eps = reference_sign(target, d)
    terms = {}
    for mono, c in master.terms.items():
        new = []
        for v, e in mono:
            a, b = to_block(v, r)
            new.append((from_block(BlockLabel(tuple(sorted(phi[i] for i in a)),
                                              tuple(sorted(phi[j] for j in b))), d), e))
        terms[tuple(new)] = eps * c
    return SparsePolynomial(terms)


def coordinate_polynomial(I: Sequence[int], d: int, n: int, direction: str = "forward") -> SparsePolynomial:
    """psi_I(x) (``forward``) or x_I(psi) (``backward``) as an explicit polynomial."""
    r = level(I, d)
    if r == 0:
        return SparsePolynomial.constant(1)
    master = master_forward(r) if direction == "forward" else master_backward(r)
    return replicate(master, I, d, n)
