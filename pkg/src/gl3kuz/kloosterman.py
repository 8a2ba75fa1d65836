"""GL(3) Kloosterman sums at level N.

The long-element sum ``S^(N)(m1, m2, n1, n2; D1, D2)`` runs over quadruples
``(B1, C1, B2, C2)`` with ``B_j, C_j mod D_j``,
``D1*C2 + B1*B2 + D2*C1 = 0 (mod D1*D2)``, ``gcd(B_j, C_j, D_j) = 1`` and
``N | B1``.  Writing ``u1 = Y1*D2 - Z1*B2`` and ``u2 = Y2*D1 - Z2*B1``, with
``Y_j*B_j + Z_j*C_j = 1 (mod D_j)``, the summand is
``e((m1*B1 + n1*u1)/D1 + (m2*B2 + n2*u2)/D2)``.  So each quadruple is
recorded only through ``(B1 mod D1, u1 mod D1, B2 mod D2, u2 mod D2)``, and
the sum for any indices is a four-dimensional discrete Fourier transform of
the resulting histogram.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import BadLevel, BadModuli, NotCoprimeSplit, NotPrime, UnsupportedCell
from .modcore import (
    ExpSum,
    Residue,
    factorize,
    inverse_table,
    is_prime,
    ramanujan_sum,
    solve_unimodular,
    solve_unimodular_many,
    valuation,
)


@dataclass(frozen=True)
class KloostermanSpec:
    level: int
    m1: int
    m2: int
    n1: int
    n2: int
    D1: int
    D2: int

    def __post_init__(self):
        _check_level(self.level, self.D1, self.D2)

    @property
    def indices(self):
        return (self.m1, self.m2, self.n1, self.n2)

    def value(self, exact=True, threads=1) -> ExpSum:
        return s_gl3(*self.indices, self.D1, self.D2, level=self.level, exact=exact, threads=threads)


@dataclass(frozen=True)
class TildeSpec:
    m1: int
    n1: int
    n2: int
    D1: int
    D2: int

    def value(self, exact=True) -> ExpSum:
        return s_tilde(self.m1, self.n1, self.n2, self.D1, self.D2, exact=exact)


@dataclass(frozen=True)
class AdmissibleQuadruple:
    B1: Residue
    C1: Residue
    B2: Residue
    C2: Residue
    Y1: Residue
    Z1: Residue
    Y2: Residue
    Z2: Residue


def _check_level(N, D1, D2):
    if N < 1 or D1 < 1 or D2 < 1:
        raise BadLevel(f"level and moduli must be positive: N={N}, D=({D1}, {D2})")
    if D1 % N or D2 % N:
        raise BadLevel(f"level {N} must divide both moduli ({D1}, {D2})")


# -- quadruple enumeration ---------------------------------------------------

@dataclass(frozen=True)
class QuadrupleTable:
    """All admissible quadruples of one (N, D1, D2), as parallel int arrays.

    ``B1`` lies in ``[1, D1]`` and ``B2`` in ``[1, D2]``; the auxiliaries are
    whatever :func:`solve_unimodular_many` produced.
    """

    level: int
    D1: int
    D2: int
    B1: np.ndarray
    C1: np.ndarray
    B2: np.ndarray
    C2: np.ndarray
    Y1: np.ndarray
    Z1: np.ndarray
    Y2: np.ndarray
    Z2: np.ndarray

    def __len__(self):
        return len(self.B1)

    @property
    def u1(self):
        return (self.Y1 * self.D2 - self.Z1 * self.B2) % self.D1

    @property
    def u2(self):
        return (self.Y2 * self.D1 - self.Z2 * self.B1) % self.D2

    def numerators(self, m1, m2, n1, n2):
        """Phase numerators modulo lcm(D1, D2) for the given indices."""
        D1, D2 = self.D1, self.D2
        L = math.lcm(D1, D2)
        a = (m1 % D1) * self.B1 + (n1 % D1) * self.u1
        b = (m2 % D2) * self.B2 + (n2 % D2) * self.u2
        return ((a % D1) * (L // D1) + (b % D2) * (L // D2)) % L, L

    def histogram(self):
        """Distinct (B1 mod D1, u1, B2 mod D2, u2) rows and their multiplicities."""
        keys = np.stack([self.B1 % self.D1, self.u1, self.B2 % self.D2, self.u2], axis=1)
        if len(keys) == 0:
            return keys, np.zeros(0, dtype=np.int64)
        rows, counts = np.unique(keys, axis=0, return_counts=True)
        return rows, counts

    def block(self, sel):
        return QuadrupleTable(self.level, self.D1, self.D2,
                              *(getattr(self, f)[sel] for f in ("B1", "C1", "B2", "C2", "Y1", "Z1", "Y2", "Z2")))


def _b1_candidates(N, D1):
    return np.arange(N, D1 + 1, N, dtype=np.int64)


def quadruple_table(level: int, D1: int, D2: int, b1_values=None) -> QuadrupleTable:
    """Enumerate admissible quadruples, optionally only for the given B1 values.

    For fixed (B1, C1) the congruence ``B1*B2 = -D2*C1 (mod D1)`` pins B2 to a
    residue class modulo ``D1/gcd(B1, D1)``; C2 is then read off the full
    congruence modulo ``D1*D2``.
    """
    _check_level(level, D1, D2)
    if b1_values is None:
        return _full_table(level, D1, D2)
    return _enumerate(level, D1, D2, np.asarray(b1_values, dtype=np.int64))


@lru_cache(maxsize=128)
def _full_table(level, D1, D2):
    return _enumerate(level, D1, D2, _b1_candidates(level, D1))


def _enumerate(N, D1, D2, b1_values):
    parts = {k: [] for k in ("B1", "C1", "B2", "C2")}
    allC1 = np.arange(D1, dtype=np.int64)
    for B1 in b1_values:
        B1 = int(B1)
        if B1 % N or not 1 <= B1 <= D1:
            continue
        g = math.gcd(B1, D1)
        M = D1 // g
        C1 = allC1[np.gcd(np.gcd(B1, allC1), D1) == 1]
        C1 = C1[(D2 * C1) % g == 0]
        if len(C1) == 0:
            continue
        if M == 1:
            b0 = np.zeros_like(C1)
        else:
            inv = inverse_table(M)[(B1 // g) % M]
            b0 = ((-(D2 * C1) // g) % M * inv) % M
        start = np.where(b0 == 0, M, b0)
        K = -(-D2 // M) + 1
        B2 = start[:, None] + M * np.arange(K, dtype=np.int64)[None, :]
        C1b = np.broadcast_to(C1[:, None], B2.shape)
        keep = B2 <= D2
        B2 = B2[keep]
        C1b = C1b[keep]
        r = B1 * B2 + D2 * C1b
        C2 = (-(r // D1)) % D2
        ok = np.gcd(np.gcd(B2, C2), D2) == 1
        parts["B1"].append(np.full(int(ok.sum()), B1, dtype=np.int64))
        parts["C1"].append(C1b[ok])
        parts["B2"].append(B2[ok])
        parts["C2"].append(C2[ok])
    cols = {k: (np.concatenate(v) if v else np.zeros(0, dtype=np.int64)) for k, v in parts.items()}
    Y1, Z1 = solve_unimodular_many(cols["B1"], cols["C1"], D1)
    Y2, Z2 = solve_unimodular_many(cols["B2"], cols["C2"], D2)
    return QuadrupleTable(N, D1, D2, cols["B1"], cols["C1"], cols["B2"], cols["C2"], Y1, Z1, Y2, Z2)


def _common_prime_power(D1, D2):
    f1, f2 = factorize(D1), factorize(D2)
    primes = {p for p, _ in f1} | {p for p, _ in f2}
    if len(primes) != 1:
        return None
    q = primes.pop()
    return q, dict(f1).get(q, 0), dict(f2).get(q, 0)


def enumerate_quadruples(level: int, D1: int, D2: int) -> Iterator[AdmissibleQuadruple]:
    """Yield every admissible quadruple once, with canonical auxiliaries.

    At prime-power moduli ``q^a1, q^a2`` the valuation law
    ``v_q(B1) <= a2, v_q(B2) <= a1`` is asserted for each quadruple.
    """
    t = quadruple_table(level, D1, D2)
    pp = _common_prime_power(D1, D2)
    for i in range(len(t)):
        B1, C1, B2, C2 = (int(t.B1[i]), int(t.C1[i]), int(t.B2[i]), int(t.C2[i]))
        if pp is not None:
            q, a1, a2 = pp
            assert valuation(B1, q) <= a2 and valuation(B2, q) <= a1, (B1, B2)
        Y1, Z1 = solve_unimodular(B1, C1, D1)
        Y2, Z2 = solve_unimodular(B2, C2, D2)
        yield AdmissibleQuadruple(Residue(B1 % D1, D1), Residue(C1, D1), Residue(B2 % D2, D2),
                                  Residue(C2, D2), Y1, Z1, Y2, Z2)


# -- the sums ----------------------------------------------------------------

def classical_kloosterman(m: int, n: int, c: int, exact=True) -> ExpSum:
    """S(m, n; c) = sum over units x mod c of e((m x + n xbar)/c)."""
    if c < 1:
        raise BadModuli(f"modulus must be positive, got {c}")
    inv = inverse_table(c)
    x = np.nonzero(inv >= 0)[0]
    return ExpSum.from_numerators((m % c) * x + (n % c) * inv[x], c, exact=exact)


def s_tilde(m1: int, n1: int, n2: int, D1: int, D2: int, exact=True) -> ExpSum:
    """The w4/w5 cell sum ~S(m1, n1, n2; D1, D2), defined for D1 | D2."""
    if D1 < 1 or D2 < 1 or D2 % D1:
        raise BadModuli(f"need D1 | D2, got ({D1}, {D2})")
    E = D2 // D1
    inv1 = inverse_table(D1)
    invE = inverse_table(E)
    C1 = np.nonzero(inv1 >= 0)[0]
    C2 = np.arange(D2, dtype=np.int64)
    C2 = C2[invE[C2 % E] >= 0]
    L = math.lcm(D1, E)
    a = ((n1 % D1) * inv1[C1][:, None] * C2[None, :] + (m1 % D1) * C1[:, None]) % D1
    b = ((n2 % E) * invE[C2 % E]) % E
    num = a * (L // D1) + (b * (L // E))[None, :]
    return ExpSum.from_numerators(num, L, exact=exact)


def s_gl3(m1: int, m2: int, n1: int, n2: int, D1: int, D2: int, *, level: int = 1,
          exact=True, threads: int = 1) -> ExpSum:
    """Long-element sum S^(level)(m1, m2, n1, n2; D1, D2).

    With ``threads > 1`` the B1 range is split into blocks that are summed
    concurrently; partial values are merged in block order.
    """
    _check_level(level, D1, D2)
    table = quadruple_table(level, D1, D2)
    if threads <= 1 or len(table) < 2:
        num, L = table.numerators(m1, m2, n1, n2)
        return ExpSum.from_numerators(num, L, exact=exact)
    blocks = np.array_split(np.arange(len(table)), threads)

    def work(sel):
        num, L = table.block(sel).numerators(m1, m2, n1, n2)
        return ExpSum.from_numerators(num, L, exact=exact)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(work, blocks))
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def s_gl3_table(level: int, D1: int, D2: int) -> np.ndarray:
    """All values S[m1, n1, m2, n2] for residues m1, n1 mod D1 and m2, n2 mod D2 (read-only)."""
    _check_level(level, D1, D2)
    return _s_gl3_table(level, D1, D2)


@lru_cache(maxsize=32)
def _s_gl3_table(level, D1, D2):
    t = quadruple_table(level, D1, D2)
    H = np.zeros((D1, D1, D2, D2))
    rows, counts = t.histogram()
    if len(rows):
        np.add.at(H, tuple(rows.T), counts)
    # positive exponent: S = sum H e(+...), i.e. size * inverse DFT
    T = np.fft.ifftn(H) * H.size
    T.setflags(write=False)
    return T


def prime_level_closed_form(N: int, m1: int, m2: int, n1: int, n2: int) -> int:
    """S^(N)(m1, m2, n1, n2; N, N) = N - 1 + r_N(n1) r_N(m2) for prime N."""
    if not is_prime(N):
        raise NotPrime(f"{N} is not prime")
    return N - 1 + ramanujan_sum(N, n1) * ramanujan_sum(N, m2)


def multiplicative_split(spec: KloostermanSpec, t1: int, u1: int, t2: int, u2: int):
    """Factor specs for D_j = t_j u_j with gcd(t1 t2, u1 u2) = 1.

    The first factor has moduli (t1, t2) and level gcd(N, t1), the second
    (u1, u2) and level gcd(N, u1); the m-indices pick up the unit twists
    ubar1^2 u2, ubar2^2 u1 (resp. tbar1^2 t2, tbar2^2 t1).
    """
    if t1 * u1 != spec.D1 or t2 * u2 != spec.D2:
        raise NotCoprimeSplit(f"{t1}*{u1}, {t2}*{u2} do not factor ({spec.D1}, {spec.D2})")
    if math.gcd(t1 * t2, u1 * u2) != 1:
        raise NotCoprimeSplit(f"gcd({t1 * t2}, {u1 * u2}) > 1")
    N = spec.level

    def inv(x, m):
        return pow(x, -1, m) if m > 1 else 0

    first = KloostermanSpec(
        math.gcd(N, t1),
        (inv(u1, t1) ** 2 * u2 * spec.m1) % t1 if t1 > 1 else 0,
        (inv(u2, t2) ** 2 * u1 * spec.m2) % t2 if t2 > 1 else 0,
        spec.n1 % t1, spec.n2 % t2, t1, t2)
    second = KloostermanSpec(
        math.gcd(N, u1),
        (inv(t1, u1) ** 2 * t2 * spec.m1) % u1 if u1 > 1 else 0,
        (inv(t2, u2) ** 2 * t1 * spec.m2) % u2 if u2 > 1 else 0,
        spec.n1 % u1, spec.n2 % u2, u1, u2)
    return first, second


# -- bounds --------------------------------------------------------------------

def bound_larsen(m1: int, n1: int, n2: int, D1: int, D2: int) -> float:
    """min((n2, D2/D1) D1^2, (m1, n1, D1) D2): reference size for ~S, constant 1."""
    if D1 < 1 or D2 % D1:
        raise BadModuli(f"need D1 | D2, got ({D1}, {D2})")
    return float(min(math.gcd(n2, D2 // D1) * D1 ** 2, math.gcd(math.gcd(m1, n1), D1) * D2))


def bound_stevens(m1: int, m2: int, n1: int, n2: int, D1: int, D2: int) -> float:
    """(D1 D2)^(1/2) ((D1, D2)(m1 n1, [D1, D2])(m2 n2, [D1, D2]))^(1/2), epsilon = 0."""
    L = math.lcm(D1, D2)
    g = math.gcd(D1, D2) * math.gcd(m1 * n1, L) * math.gcd(m2 * n2, L)
    return math.sqrt(D1 * D2) * math.sqrt(g)


# -- Bruhat cell sums from Pluecker coordinates --------------------------------

WEYL_ELEMENTS = ("I", "w4", "w5", "w6")


@dataclass(frozen=True)
class CellSumSpec:
    """Cell sum S_w(psi_{n1,n2}, psi_{m1,m2}; (c1, c2)) at level N.

    The moduli are (A1, A2) for w6, (B1, A2) for w5 and (A1, B2) for w4.
    """

    weyl: str
    n1: int
    n2: int
    m1: int
    m2: int
    c1: int
    c2: int
    level: int = 1

    def __post_init__(self):
        if self.weyl not in WEYL_ELEMENTS:
            raise UnsupportedCell(f"unknown Weyl element {self.weyl!r}")


@dataclass(frozen=True)
class CellConversion:
    """Concrete sum equal to a cell sum: ``value = delta * target``."""

    delta: bool
    target: KloostermanSpec | TildeSpec | None

    def value(self, exact=True) -> ExpSum:
        if not self.delta or self.target is None:
            return ExpSum.zero(exact)
        return self.target.value(exact=exact)


def convert_cell(spec: CellSumSpec, drop_signs=False) -> CellConversion:
    """Translate a cell sum into S^(N) or ~S plus its delta conditions.

    ``drop_signs`` applies the (m, n) -> (m, -m', n, -n') sign symmetry of the
    long-element sum, returning S^(N)(m2, m1, n1, n2; A1, A2) for w6.
    """
    N = spec.level
    if spec.weyl == "w6":
        A1, A2 = spec.c1, spec.c2
        if A1 % N or A2 % N:
            return CellConversion(False, None)
        sgn = 1 if drop_signs else -1
        return CellConversion(True, KloostermanSpec(N, spec.m2, sgn * spec.m1, spec.n1,
                                                    sgn * spec.n2, A1, A2))
    if spec.weyl == "w5":
        B1, A2 = spec.c1, spec.c2
        ok = spec.n1 * A2 == spec.m2 * B1 ** 2 and B1 % N == 0 and A2 % B1 == 0
        return CellConversion(ok, TildeSpec(spec.m1, spec.n1, spec.n2, B1, A2) if ok else None)
    if spec.weyl == "w4":
        A1, B2 = spec.c1, spec.c2
        ok = spec.n2 * A1 == spec.m1 * B2 ** 2 and A1 % (N * B2) == 0
        return CellConversion(ok, TildeSpec(-spec.m2, -spec.n2, -spec.n1, B2, A1) if ok else None)
    raise UnsupportedCell(f"no Kloosterman sum conversion for {spec.weyl!r}")


def _aux_table(D):
    # independent of modcore's solvers: scan (Y, Z) pairs, last hit wins
    g = np.arange(D)
    B, C, Y, Z = np.meshgrid(g, g, g, g, indexing="ij")
    hit = (Y * B + Z * C) % D == 1 % D
    aux = np.full((D, D, 2), -1, dtype=np.int64)
    b, c, y, z = (a[hit] for a in (B, C, Y, Z))
    aux[b, c, 0] = y
    aux[b, c, 1] = z
    return aux


@lru_cache(maxsize=256)
def _w6_points(N, A1, A2):
    """Brute-force Pluecker coordinates of the w6 cell with 0 <= B, C < A."""
    if A1 % N:
        return None
    r1, r2 = np.arange(A1), np.arange(A2)
    B1, C1, B2, C2 = np.meshgrid(r1, r1, r2, r2, indexing="ij")
    ok = ((A1 * C2 + B1 * B2 + C1 * A2) % (A1 * A2) == 0)
    ok &= np.gcd(np.gcd(A1, B1), C1) == 1
    ok &= np.gcd(np.gcd(A2, B2), C2) == 1
    ok &= B1 % N == 0
    B1, C1, B2, C2 = (a[ok] for a in (B1, C1, B2, C2))
    aux1, aux2 = _aux_table(A1), _aux_table(A2)
    Y1, Z1 = aux1[B1, C1, 0], aux1[B1, C1, 1]
    Y2, Z2 = aux2[B2, C2, 0], aux2[B2, C2, 1]
    # frequencies of n1, n2, m1, m2 in the summand, as fractions of A1 / A2
    f_n1 = (Y1 * A2 - Z1 * B2) / A1
    f_n2 = (Z2 * B1 - Y2 * A1) / A2
    f_m1 = -B2 / A2
    f_m2 = B1 / A1
    return np.stack([f_n1, f_n2, f_m1, f_m2])


def w6_cell_sums(level: int, A1: int, A2: int, indices) -> np.ndarray:
    """Float values of the w6 cell sum for rows (n1, n2, m1, m2) of ``indices``."""
    pts = _w6_points(level, A1, A2)
    idx = np.atleast_2d(np.asarray(indices, dtype=float))
    if pts is None or pts.shape[1] == 0:
        return np.zeros(len(idx), dtype=complex)
    phase = idx @ pts
    return np.exp(2j * np.pi * phase).sum(axis=1)


def cell_sum_plucker(spec: CellSumSpec) -> ExpSum:
    """Cell sum evaluated directly from Pluecker coordinates.

    Independent of the quadruple enumeration used by :func:`s_gl3`.  Returns
    zero when the compatibility condition fails.
    """
    N = spec.level
    if spec.weyl == "w6":
        pts = _w6_points(N, spec.c1, spec.c2)
        if pts is None:
            return ExpSum.zero(exact=False)
        phase = np.array([spec.n1, spec.n2, spec.m1, spec.m2], dtype=float) @ pts
        return ExpSum.from_terms(np.exp(2j * np.pi * phase))
    if spec.weyl == "w5":
        B1, A2 = spec.c1, spec.c2
        if spec.n1 * A2 != spec.m2 * B1 ** 2 or B1 % N or A2 % B1:
            return ExpSum.zero(exact=False)
        E = A2 // B1
        C1 = np.arange(B1)
        C1 = C1[np.gcd(C1, B1) == 1]
        C2 = np.arange(A2)
        C2 = C2[np.gcd(C2, E) == 1]
        Z1 = _brute_inverse(C1, B1)
        Z2 = _brute_inverse(C2, E)
        X1 = 0
        phase = (spec.n1 * (Z1[:, None] * C2[None, :] - X1 * A2) / B1
                 + spec.n2 * (Z2[None, :] * B1) / A2
                 + spec.m1 * C1[:, None] / B1)
        return ExpSum.from_terms(np.exp(2j * np.pi * phase))
    if spec.weyl == "w4":
        A1, B2 = spec.c1, spec.c2
        if spec.n2 * A1 != spec.m1 * B2 ** 2 or A1 % (N * B2):
            return ExpSum.zero(exact=False)
        E = A1 // B2
        C1 = np.arange(A1)
        C1 = C1[np.gcd(C1, E) == 1]
        C2 = np.arange(B2)
        C2 = C2[np.gcd(C2, B2) == 1]
        Z1 = _brute_inverse(C1, E)
        Z2 = _brute_inverse(C2, B2)
        X2 = 0
        phase = (-spec.n1 * Z1[:, None] * B2 / A1
                 + spec.n2 * (X2 * A1 - Z2[None, :] * C1[:, None]) / B2
                 - spec.m2 * C2[None, :] / B2)
        return ExpSum.from_terms(np.exp(2j * np.pi * phase))
    raise UnsupportedCell(f"cell sums are implemented for w4, w5, w6, not {spec.weyl!r}")


def _brute_inverse(x, m):
    if m == 1:
        return np.zeros_like(x)
    r = np.arange(m)
    table = (x[:, None] * r[None, :]) % m == 1
    return table.argmax(axis=1)
