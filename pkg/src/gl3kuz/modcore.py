"""Exact modular arithmetic and accumulation of exponential sums.

Every exponential sum in this package is a sum of roots of unity ``e(a/Q)``
with ``e(x) = exp(2 pi i x)``.  :class:`ExpSum` carries such a sum both as a
double precision complex number (with a rounding bound) and, optionally, as
an exact histogram of numerators modulo ``Q``.  The histogram is an element
of ``Z[zeta_Q]``; reducing it modulo the cyclotomic polynomial gives exact
zero and exact integer tests.
"""
from __future__ import annotations

import cmath
import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import NoSolution, NotCoprime

_EPS = np.finfo(float).eps


class Residue(NamedTuple):
    value: int
    modulus: int

    def __int__(self):
        return self.value


def residue(a: int, m: int) -> Residue:
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    return Residue(a % m, m)


def e_frac(a: int, q: int) -> complex:
    """Return exp(2 pi i a / q), reducing ``a`` modulo ``q`` first."""
    if q < 1:
        raise ValueError(f"denominator must be positive, got {q}")
    a %= q
    if a == 0:
        return 1.0 + 0.0j
    if 2 * a == q:
        return -1.0 + 0.0j
    if 4 * a == q:
        return 1j
    if 4 * a == 3 * q:
        return -1j
    return cmath.exp(2j * math.pi * a / q)


def unit_phases(q: int) -> np.ndarray:
    """Vector of e(a/q) for a = 0..q-1 (read-only, cached)."""
    return _unit_phases(int(q))


@lru_cache(maxsize=256)
def _unit_phases(q):
    out = np.exp(2j * np.pi * np.arange(q) / q)
    # exact values at the quarter turns keep real sums real
    for a in range(q):
        if 4 * a % q == 0:
            out[a] = e_frac(a, q)
    out.setflags(write=False)
    return out


def invmod(a: int, m: int) -> Residue:
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    if math.gcd(a, m) != 1:
        raise NotCoprime(f"gcd({a}, {m}) = {math.gcd(a, m)}")
    if m == 1:
        return Residue(0, 1)
    return Residue(pow(a, -1, m), m)


def solve_unimodular(B: int, C: int, D: int) -> tuple[Residue, Residue]:
    """Canonical solution of ``Y*B + Z*C = 1 (mod D)``.

    Returns the lexicographically smallest pair ``(Y, Z)`` with
    ``0 <= Y, Z < D``.  With ``g = gcd(C, D)`` the congruence is solvable in
    ``Z`` exactly when ``Y*B = 1 (mod g)``, so the minimal ``Y`` is the least
    inverse of ``B`` modulo ``g`` and ``Z`` is then the least solution of a
    linear congruence modulo ``D/g``.
    """
    if D < 1:
        raise ValueError(f"modulus must be positive, got {D}")
    if math.gcd(math.gcd(B, C), D) != 1:
        raise NoSolution(f"gcd({B}, {C}, {D}) > 1")
    if D == 1:
        return Residue(0, 1), Residue(0, 1)
    g = math.gcd(C, D)
    y = pow(B, -1, g) if g > 1 else 0
    h = D // g
    rhs = (1 - y * B) // g
    z = (rhs * pow(C // g, -1, h)) % h if h > 1 else 0
    return Residue(y % D, D), Residue(z % D, D)


@lru_cache(maxsize=64)
def inverse_table(D: int) -> np.ndarray:
    """inv[x] = x^{-1} mod D for units x, and -1 elsewhere."""
    inv = np.full(D, -1, dtype=np.int64)
    if D == 1:
        inv[0] = 0
    else:
        for x in range(1, D):
            if math.gcd(x, D) == 1:
                inv[x] = pow(x, -1, D)
    inv.setflags(write=False)
    return inv


def solve_unimodular_many(B, C, D: int):
    """Vectorised solutions of ``Y*B + Z*C = 1 (mod D)``.

    Not the canonical choice: searches the smallest ``t >= 0`` with
    ``B + t*C`` a unit and returns ``Y = (B + tC)^{-1}``, ``Z = t*Y``.
    Downstream sums do not depend on which solution is used.
    """
    B = np.asarray(B, dtype=np.int64) % D
    C = np.asarray(C, dtype=np.int64) % D
    if D == 1:
        return np.zeros_like(B), np.zeros_like(C)
    if np.any(np.gcd(np.gcd(B, C), D) != 1):
        raise NoSolution("some (B, C, D) has a common factor")
    inv = inverse_table(D)
    Y = np.empty_like(B)
    Z = np.empty_like(B)
    todo = np.ones(B.shape, dtype=bool)
    t = 0
    while todo.any():
        w = (B + t * C) % D
        hit = todo & (inv[w] >= 0)
        Y[hit] = inv[w[hit]]
        Z[hit] = (t * Y[hit]) % D
        todo &= ~hit
        t += 1
    return Y, Z


def valuation(n: int, q: int) -> float:
    """q-adic order of ``n``; ``math.inf`` for ``n == 0``."""
    if n == 0:
        return math.inf
    n = abs(n)
    k = 0
    while n % q == 0:
        n //= q
        k += 1
    return k


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation by trial division, as ((p, e), ...)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == ((n, 1),)


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def tau3(n: int) -> int:
    """Number of ordered factorisations n = abc."""
    out = 1
    for _, e in factorize(n):
        out *= (e + 1) * (e + 2) // 2
    return out


@lru_cache(maxsize=256)
def primitive_root(p: int) -> int:
    """Least primitive root modulo the prime ``p``."""
    if p == 2:
        return 1
    qs = [q for q, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise ValueError(f"{p} is not prime")


def ramanujan_sum(q: int, n: int) -> int:
    """r_q(n) = sum over units a mod q of e(an/q), via sum_{d | (q,n)} d mu(q/d)."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    g = math.gcd(q, n)
    return sum(d * mobius(q // d) for d in divisors(g))


# -- cyclotomic reduction -------------------------------------------------

@lru_cache(maxsize=512)
def cyclotomic_coeffs(n: int) -> tuple[int, ...]:
    """Ascending integer coefficients of the n-th cyclotomic polynomial."""
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in divisors(n):
        if d == n:
            continue
        phi_d = cyclotomic_coeffs(d)
        num = _exact_divide(num, list(phi_d))
    return tuple(num)


def _exact_divide(p, m):
    # p and m ascending, m monic; returns p / m assuming exactness
    dp, dm = len(p) - 1, len(m) - 1
    rem = list(p)
    quo = [0] * (dp - dm + 1)
    for i in range(dp - dm, -1, -1):
        c = rem[i + dm]
        quo[i] = c
        if c:
            for j in range(dm + 1):
                rem[i + j] -= c * m[j]
    assert not any(rem), "inexact cyclotomic division"
    return quo


def reduce_cyclotomic(counts, q: int) -> list[int]:
    """Reduce sum_a counts[a] x^a modulo Phi_q; returns phi(q) coefficients."""
    phi = cyclotomic_coeffs(q)
    m = len(phi) - 1
    rem = [int(c) for c in counts]
    for i in range(len(rem) - 1, m - 1, -1):
        c = rem[i]
        if c:
            base = i - m
            for j in range(m + 1):
                rem[base + j] -= c * phi[j]
    return rem[:m]


# -- exponential sum values ------------------------------------------------

class ExpSum:
    """Value of a sum of roots of unity.

    ``approx`` is the double precision value and ``abs_error`` bounds its
    rounding error.  When ``histogram`` is set it is an integer vector of
    length ``denominator`` and the exact value is
    ``sum_a histogram[a] * e(a / denominator)``.
    """

    __slots__ = ("approx", "abs_error", "histogram", "denominator")

    def __init__(self, approx, abs_error=0.0, histogram=None, denominator=None):
        self.approx = complex(approx)
        self.abs_error = float(abs_error)
        self.histogram = histogram
        self.denominator = denominator

    def __repr__(self):
        tag = f", exact mod {self.denominator}" if self.is_exact else ""
        return f"ExpSum({self.approx:.12g} +/- {self.abs_error:.2g}{tag})"

    def __complex__(self):
        return self.approx

    @property
    def is_exact(self):
        return self.histogram is not None

    @property
    def real(self):
        return self.approx.real

    @property
    def imag(self):
        return self.approx.imag

    def __abs__(self):
        return abs(self.approx)

    @classmethod
    def zero(cls, exact=True):
        if exact:
            return cls(0.0, 0.0, np.zeros(1, dtype=np.int64), 1)
        return cls(0.0, 0.0)

    @classmethod
    def from_counts(cls, counts, q: int):
        counts = np.asarray(counts, dtype=np.int64)
        mass = float(np.abs(counts).sum())
        nz = np.nonzero(counts)[0]
        terms = counts[nz] * unit_phases(q)[nz]
        approx = complex(math.fsum(terms.real), math.fsum(terms.imag))
        err = 4 * _EPS * mass + _EPS * abs(approx)
        return cls(approx, err, counts, q)

    @classmethod
    def from_numerators(cls, numerators, q: int, weights=None, exact=True):
        """Sum of weights[i] * e(numerators[i] / q)."""
        a = np.asarray(numerators, dtype=np.int64) % q
        if exact:
            w = None if weights is None else np.asarray(weights, dtype=np.int64)
            counts = np.bincount(a.ravel(), weights=None if w is None else w.ravel(), minlength=q)
            return cls.from_counts(np.rint(counts).astype(np.int64), q)
        terms = unit_phases(q)[a]
        if weights is not None:
            terms = terms * np.asarray(weights)
        return cls.from_terms(terms)

    @classmethod
    def from_terms(cls, terms):
        """Compensated sum of arbitrary complex terms (no exact form)."""
        terms = np.asarray(terms, dtype=complex).ravel()
        approx = complex(math.fsum(terms.real), math.fsum(terms.imag))
        err = 4 * _EPS * float(np.abs(terms).sum()) + _EPS * abs(approx)
        return cls(approx, err)

    def _rebased(self, q):
        k = q // self.denominator
        out = np.zeros(q, dtype=np.int64)
        out[np.arange(self.denominator) * k] = self.histogram
        return out

    def __add__(self, other):
        if not isinstance(other, ExpSum):
            return NotImplemented
        approx = complex(math.fsum([self.approx.real, other.approx.real]),
                         math.fsum([self.approx.imag, other.approx.imag]))
        err = self.abs_error + other.abs_error + _EPS * abs(approx)
        if self.is_exact and other.is_exact:
            q = math.lcm(self.denominator, other.denominator)
            counts = self._rebased(q) + other._rebased(q)
            return ExpSum(approx, err, counts, q)
        return ExpSum(approx, err)

    def __neg__(self):
        h = None if self.histogram is None else -self.histogram
        return ExpSum(-self.approx, self.abs_error, h, self.denominator)

    def __sub__(self, other):
        return self + (-other)

    def exact_coefficients(self):
        """Coordinates in the power basis of Z[zeta_Q] (exact mode only)."""
        if not self.is_exact:
            raise ValueError("no exact histogram attached")
        return reduce_cyclotomic(self.histogram, self.denominator)

    def is_exact_zero(self) -> bool:
        return not any(self.exact_coefficients())

    def exact_int(self):
        """The exact integer value, or None if the sum is not a rational integer."""
        coeffs = self.exact_coefficients()
        if any(coeffs[1:]):
            return None
        return coeffs[0] if coeffs else 0

    def exact_equals(self, other: "ExpSum") -> bool:
        return (self - other).is_exact_zero()

    def close_to(self, other, tol=0.0) -> bool:
        z = complex(other)
        bound = self.abs_error + (other.abs_error if isinstance(other, ExpSum) else 0.0)
        return abs(self.approx - z) <= bound + tol
