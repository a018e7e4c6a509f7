"""Matrices over GF(q), permutations, and the standard generators of SL(d, q).

Matrices act on row vectors from the right: ``e_i * m`` is row ``i`` of ``m``.
All public row/column indices are 1-based.

Internally a d x d matrix over GF(p^f) is stored as its image in GL(df, p):
each entry ``a`` becomes the f x f matrix of multiplication by ``a`` on the
basis 1, omega, ..., omega^(f-1).  Products are then a single integer matrix
product mod p, which numpy hands to BLAS.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .gf import GF, field_of_order

__all__ = [
    "Matrix",
    "Permutation",
    "StandardGenerators",
    "standard_generators",
    "transvection",
    "permutation_matrix",
    "GENERATOR_NAMES",
    "classify",
    "is_monomial",
    "is_diagonal",
    "is_lower_unitriangular",
    "psi",
    "regular_rep",
    "parse_matrices",
    "format_matrix",
]


def regular_rep(field: GF, values) -> np.ndarray:
    """Multiplication matrices of field elements.

    ``values`` may be a scalar or an array; the result has shape
    ``values.shape + (f, f)`` with row k holding the coefficients of
    ``omega**k * value``.
    """
    planes = field.digits(np.asarray(values))
    rows = [planes]
    for _ in range(field.f - 1):
        rows.append(field.times_omega(rows[-1]))
    # rows[k][l, ...] -> out[..., k, l]
    out = np.stack(rows, axis=0)
    return np.moveaxis(out, (0, 1), (-2, -1)).astype(np.float64)


class Matrix:
    """Immutable d x d matrix over a finite field."""

    __slots__ = ("field", "d", "_m", "_hash")

    def __init__(self, field: GF, d: int, blown: np.ndarray):
        self.field = field
        self.d = d
        self._m = blown
        self._hash = None

    # construction

    @classmethod
    def from_entries(cls, field: GF, rows) -> "Matrix":
        a = np.asarray(rows, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.size and (a.min() < 0 or a.max() >= field.q):
            raise ValueError(f"entries must lie in [0, {field.q})")
        d = a.shape[0]
        f = field.f
        rep = regular_rep(field, a)  # (d, d, f, f)
        blown = rep.transpose(0, 2, 1, 3).reshape(d * f, d * f)
        return cls(field, d, np.ascontiguousarray(blown))

    @classmethod
    def identity(cls, field: GF, d: int) -> "Matrix":
        return cls(field, d, np.eye(d * field.f))

    @classmethod
    def diagonal(cls, field: GF, diag: Sequence[int]) -> "Matrix":
        a = np.zeros((len(diag), len(diag)), dtype=np.int64)
        a[np.arange(len(diag)), np.arange(len(diag))] = diag
        return cls.from_entries(field, a)

    # readout

    def entries(self) -> np.ndarray:
        """Packed field entries as a 0-indexed (d, d) int array."""
        f = self.field.f
        d = self.d
        first_rows = self._m[::f].reshape(d, d, f).astype(np.int64)
        return self.field.undigits(np.moveaxis(first_rows, -1, 0))

    def entry(self, i: int, j: int) -> int:
        f = self.field.f
        row = self._m[(i - 1) * f, (j - 1) * f : j * f].astype(np.int64)
        return self.field.from_coeffs(row)

    def tolist(self) -> list[list[int]]:
        return self.entries().tolist()

    # group operations

    def __mul__(self, other: "Matrix") -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if other.field is not self.field and other.field != self.field:
            raise ValueError("matrices over different fields")
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")
        return Matrix(self.field, self.d, np.mod(self._m @ other._m, self.field.p))

    def inverse(self) -> "Matrix":
        return Matrix(self.field, self.d, _inverse_mod_p(self._m, self.field.p))

    def identity_like(self) -> "Matrix":
        return Matrix.identity(self.field, self.d)

    def __pow__(self, e: int) -> "Matrix":
        base = self if e >= 0 else self.inverse()
        e = abs(e)
        result = self.identity_like()
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def det(self) -> int:
        """Determinant in GF(q), by block row reduction."""
        F = self.field
        f, p, d = F.f, F.p, self.d
        B = self._m.copy()
        det = 1
        for c in range(d):
            col = B[c * f :: f, c * f : (c + 1) * f].astype(np.int64)
            nz = np.flatnonzero(col.any(axis=1))
            if nz.size == 0:
                return 0
            r = c + nz[0]
            if r != c:
                B[[*range(c * f, (c + 1) * f), *range(r * f, (r + 1) * f)]] = B[
                    [*range(r * f, (r + 1) * f), *range(c * f, (c + 1) * f)]
                ]
                det = F.neg(det)
                col[[0, nz[0]]] = col[[nz[0], 0]]
            pivot = F.from_coeffs(col[0])
            det = F.mul(det, pivot)
            below = np.flatnonzero(col[1:].any(axis=1)) + 1
            if below.size == 0:
                continue
            pinv = F.inv(pivot)
            factors = [F.neg(F.mul(F.from_coeffs(col[k]), pinv)) for k in below]
            reps = regular_rep(F, np.array(factors))  # (n, f, f)
            pivot_rows = B[c * f : (c + 1) * f]
            rows = (c + below)[:, None] * f + np.arange(f)[None, :]
            B[rows] = np.mod(B[rows] + np.einsum("nkl,lm->nkm", reps, pivot_rows), p)
        return det

    # comparison

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.d == other.d
            and self.field == other.field
            and np.array_equal(self._m, other._m)
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.d, self.field.q, self._m.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"Matrix({self.field!r}, {self.tolist()})"


def _inverse_mod_p(m: np.ndarray, p: int) -> np.ndarray:
    n = m.shape[0]
    a = np.concatenate([m, np.eye(n)], axis=1)
    for c in range(n):
        nz = np.flatnonzero(a[c:, c])
        if nz.size == 0:
            raise ZeroDivisionError("matrix is singular")
        r = c + nz[0]
        if r != c:
            a[[c, r]] = a[[r, c]]
        piv = int(a[c, c])
        if piv != 1:
            a[c] = np.mod(a[c] * pow(piv, p - 2, p), p)
        col = a[:, c].copy()
        col[c] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            a[rows] = np.mod(a[rows] - np.outer(col[rows], a[c]), p)
    return np.ascontiguousarray(a[:, n:])


# -- permutations --------------------------------------------------------------


class Permutation:
    """Permutation of {1, ..., d}.

    Products compose left to right, ``(a * b)(i) == b(a(i))``, matching the
    right action of matrices on row vectors so that ``psi`` is a homomorphism.
    """

    __slots__ = ("_img",)

    def __init__(self, images: Iterable[int]):
        img = tuple(int(i) - 1 for i in images)
        if sorted(img) != list(range(len(img))):
            raise ValueError(f"not a permutation of 1..{len(img)}: {images}")
        self._img = img

    @classmethod
    def _raw(cls, img0):
        obj = cls.__new__(cls)
        obj._img = tuple(img0)
        return obj

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls._raw(range(d))

    @classmethod
    def from_cycles(cls, d: int, *cycles: Sequence[int]) -> "Permutation":
        img = list(range(d))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                img[a - 1] = b - 1
        return cls._raw(img)

    @property
    def degree(self) -> int:
        return len(self._img)

    @property
    def images(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self._img)

    def __call__(self, i: int) -> int:
        return self._img[i - 1] + 1

    def __mul__(self, other: "Permutation") -> "Permutation":
        if not isinstance(other, Permutation):
            return NotImplemented
        o = other._img
        return Permutation._raw(o[i] for i in self._img)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self._img)
        for i, j in enumerate(self._img):
            inv[j] = i
        return Permutation._raw(inv)

    def identity_like(self) -> "Permutation":
        return Permutation.identity(self.degree)

    def __pow__(self, e: int) -> "Permutation":
        base = self if e >= 0 else self.inverse()
        result = self.identity_like()
        for _ in range(abs(e)):
            result = result * base
        return result

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(len(self._img)):
            if start in seen or self._img[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            j = self._img[start]
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self._img[j]
            out.append(tuple(c + 1 for c in cyc))
        return out

    def __str__(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self._img == other._img

    def __hash__(self) -> int:
        return hash(self._img)


# -- structure -------------------------------------------------------------------


def is_monomial(m: Matrix) -> bool:
    nz = m.entries() != 0
    return bool((nz.sum(axis=0) == 1).all() and (nz.sum(axis=1) == 1).all())


def is_diagonal(m: Matrix) -> bool:
    e = m.entries()
    return not np.any(e - np.diag(np.diag(e))) and bool(np.diag(e).all())


def is_lower_unitriangular(m: Matrix) -> bool:
    e = m.entries()
    return bool((np.diag(e) == 1).all() and not np.triu(e, 1).any())


def classify(m: Matrix) -> str:
    """One of 'diagonal', 'monomial', 'lower_unitriangular', 'general'.

    Monomial matrices with the identity pattern report as 'diagonal'; the
    identity matrix is therefore 'diagonal', not 'lower_unitriangular'.
    """
    if is_monomial(m):
        return "diagonal" if is_diagonal(m) else "monomial"
    if is_lower_unitriangular(m):
        return "lower_unitriangular"
    return "general"


def psi(m: Matrix) -> Permutation:
    """Permutation of coordinate lines induced by a monomial matrix."""
    if not is_monomial(m):
        raise ValueError("psi is only defined on monomial matrices")
    return Permutation._raw(np.argmax(m.entries() != 0, axis=1).tolist())


def transvection(field: GF, d: int, i: int, j: int, alpha: int) -> Matrix:
    """The lower transvection t_ij(alpha): identity plus alpha at (i, j)."""
    if not 1 <= j < i <= d:
        raise ValueError(f"transvection needs 1 <= j < i <= d, got i={i}, j={j}")
    a = np.eye(d, dtype=np.int64)
    a[i - 1, j - 1] = alpha
    return Matrix.from_entries(field, a)


def permutation_matrix(field: GF, perm: Permutation) -> Matrix:
    d = perm.degree
    a = np.zeros((d, d), dtype=np.int64)
    for i in range(1, d + 1):
        a[i - 1, perm(i) - 1] = 1
    return Matrix.from_entries(field, a)


# -- standard generators ---------------------------------------------------------

GENERATOR_NAMES = ("s", "s_inv", "t", "t_inv", "delta", "delta_inv", "v", "v_inv", "x", "x_inv")


@dataclass(frozen=True)
class StandardGenerators:
    field: GF
    d: int
    s: Matrix
    s_inv: Matrix
    t: Matrix
    t_inv: Matrix
    delta: Matrix
    delta_inv: Matrix
    v: Matrix
    v_inv: Matrix
    x: Matrix
    x_inv: Matrix

    @property
    def even(self) -> bool:
        return self.d % 2 == 0

    def as_list(self) -> list[Matrix]:
        return [getattr(self, name) for name in GENERATOR_NAMES]

    def memory(self, w: Matrix | None = None, u1: Matrix | None = None,
               u2: Matrix | None = None, quota: int = 13) -> list[Matrix]:
        """The slot list Y(w, u1, u2), padded with identities up to ``quota``."""
        one = Matrix.identity(self.field, self.d)
        mem = self.as_list() + [w or one, u1 or one, u2 or one]
        return mem + [one] * (quota - len(mem))


def standard_generators(d: int, field: GF) -> StandardGenerators:
    if d < 3:
        raise ValueError(f"standard generators need d >= 3, got d={d}")
    F = field
    minus1 = F.neg(1)
    one = np.eye(d, dtype=np.int64)

    delta = one.copy()
    delta[0, 0] = F.omega
    delta[1, 1] = F.inv(F.omega)

    s = one.copy()
    s[:2, :2] = [[0, 1], [minus1, 0]]

    t = one.copy()
    t[0, 1] = 1

    v = np.zeros((d, d), dtype=np.int64)
    x = one.copy()
    if d % 2 == 0:
        for i in range(d - 2):
            v[i, i + 2] = 1
        v[d - 2, 0] = 1
        v[d - 1, 1] = 1
        x[:4, :4] = [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [minus1, 0, 0, 0]]
    else:
        v[0, d - 1] = 1
        for i in range(1, d):
            v[i, i - 1] = minus1

    mats = {}
    for name, a in (("s", s), ("t", t), ("delta", delta), ("v", v), ("x", x)):
        m = Matrix.from_entries(F, a)
        if m.det() != 1:
            raise AssertionError(f"standard generator {name} has det != 1")
        mats[name] = m
        mats[name + "_inv"] = m.inverse()
    return StandardGenerators(F, d, **mats)


# -- text format -----------------------------------------------------------------


def format_matrix(m: Matrix) -> str:
    lines = [f"{m.d} {m.field.q}"]
    lines += [" ".join(str(int(x)) for x in row) for row in m.entries()]
    return "\n".join(lines) + "\n"


def parse_matrices(text: str) -> list[Matrix]:
    """Parse one or more matrices in the ``d q`` + rows text format."""
    tokens = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.append((lineno, line.split()))
    out = []
    k = 0
    while k < len(tokens):
        lineno, head = tokens[k]
        if len(head) != 2:
            raise ValueError(f"line {lineno}: expected 'd q' header")
        try:
            d, q = int(head[0]), int(head[1])
            field = field_of_order(q)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad header: {exc}") from None
        rows = []
        for r in range(d):
            if k + 1 + r >= len(tokens):
                raise ValueError(f"line {lineno}: matrix truncated after {r} rows")
            rl, row = tokens[k + 1 + r]
            if len(row) != d:
                raise ValueError(f"line {rl}: expected {d} entries, got {len(row)}")
            try:
                vals = [int(v) for v in row]
            except ValueError:
                raise ValueError(f"line {rl}: non-integer entry") from None
            if any(not 0 <= v < q for v in vals):
                raise ValueError(f"line {rl}: entry outside [0, {q})")
            rows.append(vals)
        out.append(Matrix.from_entries(field, rows))
        k += d + 1
    return out
