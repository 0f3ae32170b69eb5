"""Integral files, electronic-structure Hamiltonians and spectrum reports.

Integrals are over spin orbitals with the reference (occupied) orbitals
numbered 1..d, so the determinant |1 2 ... d> is the reference state.  The
two-electron integrals use chemists' ordering v[p,q,r,s] = (pq|rs).
"""
from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .ccsystem import Hamiltonian, random_symmetric
from .errors import IntegralSymmetryError, InvalidDimensionError, ParseError
from .homotopy.solutions import SolutionSet
from .indexing import orbital_basis, permutation_sign
from .linalg import symmetric_eigen

HEADER = "CCVAR-INTEGRALS"
_SYM_TOL = 1e-12


def _v_orbit(p, q, r, s):
    """The (up to 8) index tuples equivalent to (p,q,r,s) for real orbitals."""
    return {(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
            (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)}


@dataclass
class IntegralTable:
    """One- and two-electron integrals over ``n`` spin orbitals (0-based arrays)."""
    n: int
    h: np.ndarray
    v: np.ndarray
    core: float = 0.0
    spins: np.ndarray | None = None  # +1 / -1 per orbital, or None if untagged
    d: int | None = None

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.h.shape != (self.n, self.n) or self.v.shape != (self.n,) * 4:
            raise InvalidDimensionError(f"integral arrays do not match n={self.n}")
        if self.spins is not None:
            self.spins = np.asarray(self.spins, dtype=int)
            if self.spins.shape != (self.n,) or not np.all(np.isin(self.spins, (-1, 1))):
                raise ValueError("spins must be +1/-1 per orbital")

    @classmethod
    def zeros(cls, n: int, **kw) -> "IntegralTable":
        return cls(n, np.zeros((n, n)), np.zeros((n,) * 4), **kw)

    @property
    def n_spin_orbitals(self) -> int:
        return self.n

    def check_symmetry(self, tol: float = _SYM_TOL) -> None:
        h, v = self.h, self.v
        if np.abs(h - h.T).max(initial=0) > tol:
            raise IntegralSymmetryError("h is not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.abs(v - v.transpose(perm)).max(initial=0) > tol:
                raise IntegralSymmetryError("v lacks 8-fold permutational symmetry")

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntegralTable):
            return NotImplemented
        same_spins = (self.spins is None and other.spins is None) or (
            self.spins is not None and other.spins is not None and np.array_equal(self.spins, other.spins))
        return (self.n == other.n and self.core == other.core and same_spins
                and np.array_equal(self.h, other.h) and np.array_equal(self.v, other.v))


class _Filler:
    """Accumulates declared entries and symmetry-completes them, flagging conflicts."""

    def __init__(self, n: int):
        self.table = IntegralTable.zeros(n)
        self.h_set = np.zeros((n, n), dtype=bool)
        self.v_set = np.zeros((n,) * 4, dtype=bool)

    def _put(self, arr, mask, keys, value, where):
        for k in keys:
            if mask[k] and abs(arr[k] - value) > _SYM_TOL * max(1.0, abs(value)):
                raise IntegralSymmetryError(
                    f"{where}: value {value!r} conflicts with {float(arr[k])!r} already implied for "
                    f"index {tuple(i + 1 for i in k)}")
        for k in keys:
            arr[k] = value
            mask[k] = True

    def one(self, p, q, value, where):
        self._put(self.table.h, self.h_set, {(p, q), (q, p)}, value, where)

    def two(self, p, q, r, s, value, where):
        self._put(self.table.v, self.v_set, _v_orbit(p, q, r, s), value, where)


def _parse_header(line: str, lineno: int) -> dict:
    parts = line.split()
    if not parts or parts[0] != HEADER:
        raise ParseError(f"expected header starting with {HEADER!r}", lineno)
    out = {}
    for tok in parts[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ParseError(f"header token {tok!r} is not key=value", lineno)
        out[key] = val
    if "n" not in out:
        raise ParseError("header must declare n=<spin orbitals>", lineno)
    return out


def loads_integrals(text: str, source: str = "<string>") -> IntegralTable:
    """Parse the text of an integral file; see :func:`parse_integrals`."""
    header = None
    filler = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = _parse_header(line, lineno)
            try:
                n = int(header["n"])
                d = int(header["d"]) if "d" in header else None
                core = float(header.get("core", 0.0))
            except ValueError as exc:
                raise ParseError(f"bad header value: {exc}", lineno) from None
            if n < 1 or (d is not None and not 0 <= d <= n):
                raise ParseError(f"invalid header dimensions n={n} d={d}", lineno)
            filler = _Filler(n)
            filler.table.core = core
            filler.table.d = d
            if "spins" in header:
                tags = header["spins"]
                if len(tags) != n or set(tags) - set("ab"):
                    raise ParseError("spins= must list one of a/b per orbital", lineno)
                filler.table.spins = np.array([1 if c == "a" else -1 for c in tags])
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ParseError(f"expected 'value p q r s', got {len(parts)} fields", lineno)
        try:
            value = float(parts[0])
            p, q, r, s = (int(x) for x in parts[1:])
        except ValueError:
            raise ParseError(f"cannot parse {line!r}", lineno) from None
        n = filler.table.n
        if not all(0 <= i <= n for i in (p, q, r, s)):
            raise ParseError(f"index out of range 0..{n}", lineno)
        where = f"{source}:{lineno}"
        if p == q == r == s == 0:
            filler.table.core = value
        elif r == s == 0 and p and q:
            filler.one(p - 1, q - 1, value, where)
        elif p and q and r and s:
            filler.two(p - 1, q - 1, r - 1, s - 1, value, where)
        else:
            raise ParseError(f"index pattern {p} {q} {r} {s} is neither core, one- nor two-electron", lineno)
    if header is None:
        raise ParseError(f"{source}: empty integral file", 1)
    return filler.table


def parse_integrals(path) -> IntegralTable:
    """Read an integral file.

    Header ``CCVAR-INTEGRALS n=<n> d=<d> core=<float>`` (optionally
    ``spins=aabb..``), then lines ``value p q r s`` with 1-based indices;
    ``r = s = 0`` is h[p,q] and all zeros is the core energy.  Entries are
    completed by symmetry; unspecified ones are zero.
    """
    with open(path) as fh:
        return loads_integrals(fh.read(), str(path))


def dumps_integrals(t: IntegralTable) -> str:
    head = [HEADER, f"n={t.n}"]
    if t.d is not None:
        head.append(f"d={t.d}")
    head.append(f"core={float(t.core)!r}")
    if t.spins is not None:
        head.append("spins=" + "".join("a" if s > 0 else "b" for s in t.spins))
    lines = [" ".join(head)]
    n = t.n
    for p in range(n):
        for q in range(p + 1):
            if t.h[p, q] != 0:
                lines.append(f"{float(t.h[p, q])!r} {p + 1} {q + 1} 0 0")
    pairs = [(p, q) for p in range(n) for q in range(p + 1)]
    for a, (p, q) in enumerate(pairs):
        for r, s in pairs[: a + 1]:
            if t.v[p, q, r, s] != 0:
                lines.append(f"{float(t.v[p, q, r, s])!r} {p + 1} {q + 1} {r + 1} {s + 1}")
    return "\n".join(lines) + "\n"


def write_integrals(t: IntegralTable, path) -> None:
    """Write the canonical (p >= q, r >= s, pq >= rs) entries; values round-trip exactly."""
    with open(path, "w") as fh:
        fh.write(dumps_integrals(t))


def random_integrals(n: int, seed=None, d: int | None = None, spins=None) -> IntegralTable:
    """Random real integrals with full symmetry; with ``spins`` the integrals conserve spin."""
    rng = np.random.default_rng(seed)
    h = np.triu(rng.normal(size=(n, n)))
    h = h + np.triu(h, 1).T
    v = np.zeros((n,) * 4)
    pairs = [(p, q) for p in range(n) for q in range(p + 1)]
    vals = rng.normal(size=len(pairs) * (len(pairs) + 1) // 2)
    k = 0
    for a, (p, q) in enumerate(pairs):
        for r, s in pairs[: a + 1]:
            for key in _v_orbit(p, q, r, s):
                v[key] = vals[k]
            k += 1
    if spins is not None:
        spins = np.asarray(spins)
        same = spins[:, None] == spins[None, :]
        h = h * same
        v = v * same[:, :, None, None] * same[None, None, :, :]
    return IntegralTable(n, h, v, 0.0, spins, d)


def spatial_to_spin(h, v, core: float = 0.0, n_occupied: int | None = None) -> IntegralTable:
    """Spin-orbital integrals from spatial ones (k spatial -> n = 2k spin orbitals).

    By default spin orbital i (0-based, i < k) is spatial i with spin up and
    k + i is spatial i with spin down.  With ``n_occupied`` = m the orbitals
    are reordered so the 2m occupied spin orbitals come first (up then down),
    which makes the closed-shell determinant the reference.
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(v, dtype=float)
    k = h.shape[0]
    spatial = np.concatenate([np.arange(k), np.arange(k)])
    spins = np.concatenate([np.ones(k, dtype=int), -np.ones(k, dtype=int)])
    if n_occupied is not None:
        m = n_occupied
        if not 0 <= m <= k:
            raise ValueError("n_occupied must lie in 0..k")
        order = np.concatenate([np.arange(m), k + np.arange(m), np.arange(m, k), k + np.arange(m, k)])
        spatial, spins = spatial[order], spins[order]
    same = spins[:, None] == spins[None, :]
    H1 = h[np.ix_(spatial, spatial)] * same
    V = v[np.ix_(spatial, spatial, spatial, spatial)] * same[:, :, None, None] * same[None, None, :, :]
    return IntegralTable(2 * k, H1, V, core, spins, None if n_occupied is None else 2 * n_occupied)


def _slater_condon(t: IntegralTable, I: tuple, J: tuple) -> float:
    """<Phi_I | H | Phi_J> for sorted 0-based occupation tuples (electronic part)."""
    h, v = t.h, t.v
    sI, sJ = set(I), set(J)
    only_i = [p for p in I if p not in sJ]
    if len(only_i) > 2:
        return 0.0
    only_j = [q for q in J if q not in sI]
    if not only_i:
        occ = list(I)
        e = sum(h[p, p] for p in occ)
        for a, p in enumerate(occ):
            for q in occ[a + 1:]:
                e += v[p, p, q, q] - v[p, q, q, p]
        return e
    if len(only_i) == 1:
        p, q = only_i[0], only_j[0]
        sign = (-1) ** (I.index(p) + J.index(q))
        common = [k for k in I if k != p]
        return sign * (h[p, q] + sum(v[p, q, k, k] - v[p, k, k, q] for k in common))
    (p, r), (q, s) = only_i, only_j
    sign = (-1) ** (I.index(p) + I.index(r) + J.index(q) + J.index(s))
    return sign * (v[p, q, r, s] - v[p, s, r, q])


def assemble_hamiltonian(t: IntegralTable, d: int, include_core: bool = True) -> Hamiltonian:
    """The C(n,d) x C(n,d) Hamiltonian in the global order, by Slater-Condon rules."""
    if t.d is not None and t.d != d:
        raise InvalidDimensionError(f"integral file declares d={t.d}, requested d={d}")
    if not 1 <= d <= t.n:
        raise InvalidDimensionError(f"need 1 <= d <= n={t.n}")
    sets = [tuple(i - 1 for i in I) for I in orbital_basis(d, t.n).sets]
    N = len(sets)
    H = np.zeros((N, N))
    for a in range(N):
        for b in range(a, N):
            H[a, b] = _slater_condon(t, sets[a], sets[b])
    H = np.triu(H) + np.triu(H, 1).T
    if include_core:
        H[np.diag_indices(N)] += t.core
    assert np.array_equal(H, H.T)
    return Hamiltonian(H, d, t.n, "slater-condon")


def assemble_permutation_formula(t: IntegralTable, d: int) -> np.ndarray:
    """Literal double sum over permutations of I and J (no normalization, no core).

    Exponential in d; intended as an independent check for d <= 3.
    """
    h, v = t.h, t.v
    sets = [tuple(i - 1 for i in I) for I in orbital_basis(d, t.n).sets]
    perms = [(p, permutation_sign(p)) for p in permutations(range(d))]
    N = len(sets)
    H = np.zeros((N, N))
    for a, I in enumerate(sets):
        for b, J in enumerate(sets):
            total = 0.0
            for rho, s_rho in perms:
                ri = [I[k] for k in rho]
                for pi, s_pi in perms:
                    pj = [J[k] for k in pi]
                    eq = [ri[k] == pj[k] for k in range(d)]
                    term = 0.0
                    for l in range(d):
                        if all(eq[k] for k in range(d) if k != l):
                            term += h[ri[l], pj[l]]
                        for j in range(l + 1, d):
                            if all(eq[k] for k in range(d) if k not in (l, j)):
                                term += v[ri[l], pj[l], ri[j], pj[j]]
                    total += s_rho * s_pi * term
            H[a, b] = total
    return H


def permutation_formula_constant(t: IntegralTable, d: int, tol: float = 1e-10) -> float:
    """The global factor c with permutation-formula = c * Slater-Condon (without core).

    Raises ValueError if no single constant relates the two assemblies.
    """
    A = assemble_permutation_formula(t, d)
    B = assemble_hamiltonian(t, d, include_core=False).matrix
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    if B[k] == 0:
        raise ValueError("Slater-Condon matrix vanishes; constant undetermined")
    c = A[k] / B[k]
    if np.abs(A - c * B).max() > tol * max(1.0, np.abs(A).max()):
        raise ValueError("assemblies are not proportional")
    return float(c)


HAMILTONIAN_KINDS = ("generic-complex-symmetric", "real-symmetric", "low-rank")


def random_hamiltonian(d: int, n: int, kind: str = "generic-complex-symmetric", seed=None,
                       rank: int | None = None) -> Hamiltonian:
    """Seeded random Hamiltonians; ``low-rank`` is Q B B^T Q^T with B of width ``rank``."""
    N = orbital_basis(d, n).size
    rng = np.random.default_rng(seed)
    if kind == "generic-complex-symmetric":
        return Hamiltonian(random_symmetric(N, rng, complex_=True), d, n, f"random:{kind}:{seed}")
    if kind == "real-symmetric":
        return Hamiltonian(random_symmetric(N, rng, complex_=False), d, n, f"random:{kind}:{seed}")
    if kind == "low-rank":
        if rank is None or not 0 <= rank <= N:
            raise ValueError(f"low-rank needs 0 <= rank <= {N}")
        B = rng.normal(size=(N, rank))
        Q, R = np.linalg.qr(rng.normal(size=(N, N)))
        Q = Q * np.sign(np.diag(R))
        QB = Q @ B
        H = QB @ QB.T
        return Hamiltonian((H + H.T) / 2, d, n, f"random:low-rank({rank}):{seed}")
    raise ValueError(f"unknown Hamiltonian kind {kind!r}; choose from {HAMILTONIAN_KINDS}")


def parse_kind(text: str) -> tuple[str, int | None]:
    """'low-rank(3)' -> ('low-rank', 3); other kinds pass through."""
    m = re.fullmatch(r"low-rank\((\d+)\)", text.strip())
    if m:
        return "low-rank", int(m.group(1))
    return text.strip(), None


CSV_COLUMNS = ("kind", "lambda_re", "lambda_im", "nearest_fci", "distance")


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    entries: list = field(default_factory=list)  # one dict per CC energy

    def group(self, cls: str, real: bool) -> np.ndarray:
        return np.array([e["lambda"] for e in self.entries if e["class"] == cls and e["real"] == real])

    @property
    def counts(self) -> dict:
        out = {}
        for e in self.entries:
            key = f"{e['class']}-{'real' if e['real'] else 'complex'}"
            out[key] = out.get(key, 0) + 1
        return out

    @property
    def real_lambdas(self) -> np.ndarray:
        return np.array([e["lambda"].real for e in self.entries if e["real"]])

    def to_dict(self) -> dict:
        dist = [e["distance"] for e in self.entries if e["real"]]
        return {
            "fci": [float(x) for x in self.eigenvalues],
            "counts": self.counts,
            "entries": [{"class": e["class"], "real": e["real"],
                         "lambda": [float(e["lambda"].real), float(e["lambda"].imag)],
                         "nearest_fci": e["nearest_fci"], "distance": e["distance"]}
                        for e in self.entries],
            "max_real_distance": max(dist) if dist else None,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for x in self.eigenvalues:
            w.writerow(["fci", repr(float(x)), "0.0", repr(float(x)), "0.0"])
        for e in self.entries:
            kind = f"{e['class']}-{'real' if e['real'] else 'complex'}"
            nearest = "" if e["nearest_fci"] is None else repr(e["nearest_fci"])
            distance = "" if e["distance"] is None else repr(e["distance"])
            w.writerow([kind, repr(float(e["lambda"].real)), repr(float(e["lambda"].imag)), nearest, distance])
        return buf.getvalue()


def spectrum_report(H: Hamiltonian, solutions: SolutionSet) -> SpectrumReport:
    """Compare CC energies with the exact (FCI) spectrum of a real symmetric H.

    Real energies are matched to the nearest eigenvalue; complex ones are
    listed without a match.  Failed paths carry no energy and are skipped.
    """
    M = np.asarray(H.matrix if isinstance(H, Hamiltonian) else H)
    if np.iscomplexobj(M):
        if np.abs(M.imag).max(initial=0) > 0:
            raise ValueError("spectrum_report needs a real symmetric Hamiltonian")
        M = M.real
    evals = np.sort(symmetric_eigen(M)[0])
    entries = []
    for s in solutions:
        if s.lam is None or s.cls == "failed":
            continue
        lam = complex(s.lam)
        entry = {"class": s.cls, "real": bool(s.real), "lambda": lam, "nearest_fci": None, "distance": None}
        if s.real and evals.size:
            k = int(np.argmin(np.abs(evals - lam.real)))
            entry["nearest_fci"] = float(evals[k])
            entry["distance"] = float(abs(evals[k] - lam.real))
        entries.append(entry)
    return SpectrumReport(evals, entries)
