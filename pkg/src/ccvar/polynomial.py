"""A small exact sparse polynomial type keyed by orbital index sets."""
from __future__ import annotations

from collections import defaultdict
from typing import Callable, Iterable, Mapping

import numpy as np


def _canon(powers: Mapping) -> tuple:
    return tuple(sorted((v, e) for v, e in powers.items() if e))


class SparsePolynomial:
    """Polynomial with exponent vectors over index-set variables.

    ``terms`` maps a canonical monomial (sorted tuple of ``(variable, exponent)``)
    to a nonzero coefficient.  Variables are sorted tuples of 1-based orbitals.
    Coefficients stay Python integers as long as the inputs are integral.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    key = _canon(dict(mono))
                    self.terms[key] = self.terms.get(key, 0) + c
            self.terms = {k: c for k, c in self.terms.items() if c}

    @classmethod
    def constant(cls, c) -> "SparsePolynomial":
        return cls({(): c})

    @classmethod
    def variable(cls, v) -> "SparsePolynomial":
        return cls({((tuple(v), 1),): 1})

    @classmethod
    def monomial(cls, variables: Iterable, coefficient=1) -> "SparsePolynomial":
        powers = defaultdict(int)
        for v in variables:
            powers[tuple(v)] += 1
        return cls({tuple(powers.items()): coefficient})

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            other = SparsePolynomial.constant(other)
        return isinstance(other, SparsePolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"SparsePolynomial({self.to_text()})"

    def __neg__(self):
        return SparsePolynomial({k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, SparsePolynomial):
            other = SparsePolynomial.constant(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return SparsePolynomial({k: c for k, c in out.items() if c})

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, SparsePolynomial) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, SparsePolynomial):
            return SparsePolynomial({k: c * other for k, c in self.terms.items()})
        out = defaultdict(int)
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                powers = defaultdict(int, k1)
                for v, e in k2:
                    powers[v] += e
                out[_canon(powers)] += c1 * c2
        return SparsePolynomial({k: c for k, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = SparsePolynomial.constant(1)
        for _ in range(e):
            out = out * self
        return out

    @property
    def variables(self) -> set:
        return {v for mono in self.terms for v, _ in mono}

    @property
    def degree(self) -> int:
        return max((sum(e for _, e in mono) for mono in self.terms), default=0)

    def coefficient(self, variables: Iterable) -> object:
        powers = defaultdict(int)
        for v in variables:
            powers[tuple(v)] += 1
        return self.terms.get(_canon(powers), 0)

    def subs(self, mapping: Mapping) -> "SparsePolynomial":
        """Substitute polynomials (or scalars) for variables; others are kept."""
        out = SparsePolynomial()
        for mono, c in self.terms.items():
            term = SparsePolynomial.constant(c)
            for v, e in mono:
                repl = mapping.get(v)
                if repl is None:
                    repl = SparsePolynomial.variable(v)
                elif not isinstance(repl, SparsePolynomial):
                    repl = SparsePolynomial.constant(repl)
                term = term * repl ** e
            out = out + term
        return out

    def evaluate(self, values: Mapping | Callable):
        """Evaluate at a point; ``values`` maps each variable to a scalar or array."""
        get = values if callable(values) else values.__getitem__
        total = 0
        for mono, c in self.terms.items():
            term = c
            for v, e in mono:
                term = term * get(v) ** e
            total = total + term
        return total

    def compile(self, position: Mapping) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorized evaluator over the last axis of an array of coordinates.

        ``position`` maps each variable to its column in the coordinate array.
        """
        by_deg = defaultdict(lambda: ([], []))
        for mono, c in self.terms.items():
            cols = [position[v] for v, e in mono for _ in range(e)]
            idx, coef = by_deg[len(cols)]
            idx.append(cols)
            coef.append(c)
        groups = [(np.array(idx, dtype=int).reshape(len(idx), k), np.array(coef))
                  for k, (idx, coef) in by_deg.items()]

        def f(X):
            X = np.asarray(X)
            out = np.zeros(X.shape[:-1], dtype=np.result_type(X, float))
            for idx, coef in groups:
                if idx.shape[1] == 0:
                    out = out + coef.sum()
                    continue
                prod = np.prod(X[..., idx], axis=-1)
                out = out + prod @ coef
            return out

        return f

    def to_records(self, name: str = "x") -> list[dict]:
        """JSON-ready ``[{monomial, coefficient}]``, monomial as a list of index sets."""
        recs = []
        for mono, c in sorted(self.terms.items(), key=lambda kv: (sum(e for _, e in kv[0]), kv[0])):
            factors = [list(v) for v, e in mono for _ in range(e)]
            recs.append({"monomial": factors, "coefficient": _jsonable(c), "variable": name})
        return recs

    def to_text(self, name: str = "x") -> str:
        if not self.terms:
            return "0"
        pieces = []
        ordered = sorted(self.terms.items(), key=lambda kv: (sum(e for _, e in kv[0]), kv[0]))
        for mono, c in ordered:
            factors = []
            for v, e in mono:
                lab = "".join(map(str, v)) if all(i < 10 for i in v) else ",".join(map(str, v))
                factors.append(f"{name}{lab}" + (f"^{e}" if e > 1 else ""))
            body = "*".join(factors)
            if isinstance(c, (int, np.integer)):
                mag = abs(int(c))
                sign = "-" if c < 0 else "+"
                coef = "" if (mag == 1 and body) else str(mag)
                sep = "*" if coef and body else ""
                pieces.append(f"{sign} {coef}{sep}{body}")
            else:
                pieces.append(f"+ ({c})*{body}" if body else f"+ ({c})")
        text = " ".join(pieces)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


def _jsonable(c):
    if isinstance(c, (int, np.integer)):
        return int(c)
    c = complex(c)
    return [c.real, c.imag] if c.imag else c.real
