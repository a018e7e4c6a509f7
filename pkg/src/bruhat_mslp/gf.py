"""Finite fields GF(p^f) with a fixed primitive element.

Field elements are plain integers in [0, q).  The integer ``a`` encodes the
polynomial ``sum(c[l] * omega**l)`` through its base-p digits ``c``, so
``coeffs(a)`` is just the digit expansion.  The modulus defining the field is
chosen so that the residue class of the indeterminate is primitive; that
residue is ``omega``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

MAX_ORDER = 1 << 20
CONWAY_LIMIT = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = 3
    while r * r <= n:
        if n % r == 0:
            return False
        r += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    r = 2
    while r * r <= n:
        if n % r == 0:
            out.append(r)
            while n % r == 0:
                n //= r
        r += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over F_p, as lists of coefficients low -> high ---------------


def _polymulmod(a, b, mod, p):
    """Product of two residues modulo the monic polynomial ``mod``."""
    f = len(mod) - 1
    prod = [0] * (2 * f - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    for k in range(len(prod) - 1, f - 1, -1):
        top = prod[k] % p
        if top:
            for i in range(f):
                prod[k - f + i] -= top * mod[i]
    return [c % p for c in prod[:f]]


def _polypowmod(a, e, mod, p):
    f = len(mod) - 1
    result = [1] + [0] * (f - 1)
    base = list(a)
    while e:
        if e & 1:
            result = _polymulmod(result, base, mod, p)
        base = _polymulmod(base, base, mod, p)
        e >>= 1
    return result


def _x_residue(mod, p):
    f = len(mod) - 1
    if f == 1:
        return [(-mod[0]) % p]
    return [0, 1] + [0] * (f - 2)


def _x_is_primitive(mod, p, factors) -> bool:
    # Order exactly q-1 forces the quotient ring to be a field, so this also
    # certifies irreducibility of ``mod``.
    f = len(mod) - 1
    q = p**f
    if mod[0] % p == 0:
        return False
    x = _x_residue(mod, p)
    one = [1] + [0] * (f - 1)
    if _polypowmod(x, q - 1, mod, p) != one:
        return False
    return all(_polypowmod(x, (q - 1) // r, mod, p) != one for r in factors)


def _candidates(p: int, f: int):
    """Monic degree-f polynomials in Conway's enumeration order.

    A polynomial ``x^f - a_{f-1} x^{f-1} + a_{f-2} x^{f-2} - ...`` is ranked by
    the tuple ``(a_{f-1}, ..., a_0)`` read lexicographically.
    """
    for a in itertools.product(range(p), repeat=f):
        coeffs = [0] * f + [1]
        for idx, ai in enumerate(a):
            i = f - 1 - idx
            sign = -1 if (f - i) % 2 else 1
            coeffs[i] = (sign * ai) % p
        yield coeffs


@functools.lru_cache(maxsize=None)
def conway_polynomial(p: int, f: int) -> tuple[int, ...]:
    """Conway polynomial for GF(p^f), low -> high coefficients.

    Computed from its definition: the least primitive polynomial (in Conway's
    order) compatible with the Conway polynomials of every proper subfield.
    """
    q = p**f
    factors = prime_factors(q - 1)
    subfields = [m for m in range(1, f) if f % m == 0]
    sub = {m: conway_polynomial(p, m) for m in subfields}
    for cand in _candidates(p, f):
        if not _x_is_primitive(cand, p, factors):
            continue
        if all(_compatible(cand, sub[m], p, f, m) for m in subfields):
            return tuple(cand)
    raise RuntimeError(f"no Conway polynomial found for GF({p}^{f})")


def _compatible(mod, submod, p, f, m) -> bool:
    x = _x_residue(mod, p)
    y = _polypowmod(x, (p**f - 1) // (p**m - 1), mod, p)
    acc = [0] * f
    for c in reversed(submod):
        acc = _polymulmod(acc, y, mod, p)
        acc[0] = (acc[0] + c) % p
    return not any(acc)


def _first_primitive_polynomial(p: int, f: int) -> tuple[int, ...]:
    factors = prime_factors(p**f - 1)
    for cand in _candidates(p, f):
        if _x_is_primitive(cand, p, factors):
            return tuple(cand)
    raise RuntimeError(f"no primitive polynomial found for GF({p}^{f})")


# -- the field ----------------------------------------------------------------


@dataclass(frozen=True)
class GF:
    """GF(p^f) defined by a monic modulus whose root ``omega`` is primitive.

    Elements are ints in [0, q); see the module docstring for the encoding.
    Instances are immutable and safe to share.
    """

    p: int
    f: int
    modulus: tuple[int, ...]
    q: int = field(init=False)
    omega: int = field(init=False)

    def __post_init__(self):
        if len(self.modulus) != self.f + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree f")
        object.__setattr__(self, "q", self.p**self.f)
        object.__setattr__(self, "omega", self.from_coeffs(_x_residue(self.modulus, self.p)))

    # encoding

    def coeffs(self, a: int) -> tuple[int, ...]:
        """Coefficients (a_0, ..., a_{f-1}) of ``a`` in powers of omega."""
        p = self.p
        out = []
        for _ in range(self.f):
            a, r = divmod(a, p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, c) -> int:
        value = 0
        for x in reversed(list(c)):
            value = value * self.p + int(x) % self.p
        return value

    @property
    def packed_modulus(self) -> int:
        return sum(c * self.p**i for i, c in enumerate(self.modulus))

    def elements(self) -> range:
        return range(self.q)

    # arithmetic

    def add(self, a: int, b: int) -> int:
        if self.f == 1:
            return (a + b) % self.p
        return self.from_coeffs(x + y for x, y in zip(self.coeffs(a), self.coeffs(b)))

    def neg(self, a: int) -> int:
        if self.f == 1:
            return -a % self.p
        return self.from_coeffs(-x for x in self.coeffs(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.f == 1:
            return a * b % self.p
        return self.from_coeffs(
            _polymulmod(self.coeffs(a), self.coeffs(b), self.modulus, self.p)
        )

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        if self.f == 1:
            return pow(a, e, self.p)
        return self.from_coeffs(_polypowmod(self.coeffs(a), e, self.modulus, self.p))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(%d)" % self.q)
        return self.pow(a, self.q - 2)

    def omega_pow(self, k: int) -> int:
        return self.pow(self.omega, k % (self.q - 1))

    def dlog(self, a: int) -> int:
        """Exponent k in [0, q-1) with omega**k == a (baby-step/giant-step)."""
        if a == 0:
            raise ValueError("discrete logarithm of zero")
        m, baby = self._baby_steps()
        giant = self.pow(self.omega, -m)
        y = a
        for i in range(m):
            j = baby.get(y)
            if j is not None:
                return (i * m + j) % (self.q - 1)
            y = self.mul(y, giant)
        raise ArithmeticError(f"no discrete logarithm for {a}")

    def _baby_steps(self):
        return _baby_steps(self)

    # vectorised helpers used by the matrix layer

    def digits(self, arr: np.ndarray) -> np.ndarray:
        """Base-p digit planes of an int array: shape (f, *arr.shape)."""
        arr = np.asarray(arr, dtype=np.int64)
        out = np.empty((self.f,) + arr.shape, dtype=np.int64)
        for l in range(self.f):
            arr, out[l] = np.divmod(arr, self.p)
        return out

    def undigits(self, planes: np.ndarray) -> np.ndarray:
        planes = np.asarray(planes, dtype=np.int64)
        value = np.zeros(planes.shape[1:], dtype=np.int64)
        for l in reversed(range(self.f)):
            value = value * self.p + planes[l]
        return value

    def times_omega(self, planes: np.ndarray) -> np.ndarray:
        """Multiply every element (given as digit planes) by omega."""
        top = planes[-1]
        out = np.empty_like(planes)
        out[0] = -self.modulus[0] * top
        for l in range(1, self.f):
            out[l] = planes[l - 1] - self.modulus[l] * top
        return out % self.p

    def __repr__(self):
        return f"GF({self.p}^{self.f})" if self.f > 1 else f"GF({self.p})"


@functools.lru_cache(maxsize=64)
def _baby_steps(field: GF):
    m = math.isqrt(field.q - 1) + 1
    table = {}
    x = 1
    for j in range(m):
        table.setdefault(x, j)
        x = field.mul(x, field.omega)
    return m, table


@functools.lru_cache(maxsize=None)
def make_field(p: int, f: int = 1) -> GF:
    """Build GF(p^f) with a deterministically chosen primitive omega.

    Conway polynomials are used up to q = 2^16; above that the first
    primitive polynomial in the same enumeration order.
    """
    if not is_prime(p):
        raise ValueError(f"characteristic {p} is not prime")
    if f < 1:
        raise ValueError("extension degree must be >= 1")
    q = p**f
    if q > MAX_ORDER:
        raise ValueError(f"field order {q} exceeds the supported maximum {MAX_ORDER}")
    if q <= CONWAY_LIMIT:
        mod = conway_polynomial(p, f)
    else:
        mod = _first_primitive_polynomial(p, f)
    return GF(p, f, mod)


def field_of_order(q: int) -> GF:
    """GF(q) for a prime power q."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    p = prime_factors(q)
    if len(p) != 1:
        raise ValueError(f"{q} is not a prime power")
    p = p[0]
    f = round(math.log(q, p))
    if p**f != q:
        raise ValueError(f"{q} is not a prime power")
    return make_field(p, f)


def field_from_header(p: int, f: int, packed_modulus: int) -> GF:
    """Rebuild a field from a serialized (p, f, modulus) triple."""
    mod = []
    v = packed_modulus
    for _ in range(f + 1):
        v, r = divmod(v, p)
        mod.append(r)
    if v:
        raise ValueError(f"modulus {packed_modulus} has degree above {f}")
    fld = GF(p, f, tuple(mod))
    if not _x_is_primitive(list(mod), p, prime_factors(p**f - 1)):
        raise ValueError(f"modulus {packed_modulus} does not define GF({p}^{f}) with primitive root")
    return fld
