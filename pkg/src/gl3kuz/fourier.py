"""Six-fold finite Fourier transforms of the long-element Kloosterman sum.

For frequencies ``(x1, x2, y1, y2, z1, z2)`` the transform is

    1/(D1^3 D2^3) * sum over n1, m1, l1 mod D1 and n2, m2, l2 mod D2 of
    w * S^(level)(a m1 d, b n2 l2, n1 l1, m2 d; D1, D2)
      * e(-(n1 x1 + m1 y1 + l1 z1)/D1) * e(-(n2 x2 + m2 y2 + l2 z2)/D2)

with ``w = 1`` and level 1 in the untwisted case, and
``w = conj(chi)(n1 l1 m2) chi(m1 n2 l2)`` with level ``p^3`` when twisted by
a primitive character ``chi`` mod ``p``.

Three evaluation tiers are provided.  The naive tier takes the Kloosterman
table from a DFT of the quadruple histogram and sums over all six variables.
The fast tier opens the Kloosterman sum instead: per quadruple the summand
factors as ``M1[B1] P1[u1] P2[b B2] M2[u2]`` where the ``m``-sums ``M`` are
Gauss/Ramanujan-type sums with a single solution class and the ``(n, l)``
sums ``P`` are the pair sums

    G(u, x, z; D) = sum_{n, l mod D} e((n l u - n x - l z)/D)
                  = D g e(-l0 z/D) [g | x][g | z],   g = gcd(u, D),

``l0 = (x/g) (u/g)^-1 mod D/g``.  Characters are removed by expanding them in
additive characters mod ``p``.  The semi-fast tier tabulates ``M`` and ``P``
by direct summation and loops over the raw quadruple list.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import AllZeroFrequencies, BadModuli, BadTwist, NotCoprimeSplit, NotPrimitive, TooLarge
from .kloosterman import quadruple_table, s_gl3_table
from .modcore import ExpSum, divisors, inverse_table, is_prime, primitive_root, tau3, unit_phases, valuation

NAIVE_LIMIT = 10 ** 9
SEMIFAST_LIMIT = 400
_EPS = np.finfo(float).eps


# -- characters ----------------------------------------------------------------

class DirichletCharacter:
    """Character mod a prime p with chi(g^t) = e(index * t / order_divisor).

    ``g`` is the least primitive root mod p.  ``order_divisor`` must divide
    p - 1; the character is trivial exactly when order_divisor divides index.
    """

    def __init__(self, prime: int, order_divisor: int, index: int = 1):
        if not is_prime(prime):
            raise BadTwist(f"character modulus {prime} is not prime")
        if order_divisor < 1 or (prime - 1) % order_divisor:
            raise BadTwist(f"order {order_divisor} does not divide {prime - 1}")
        self.prime = prime
        self.order_divisor = order_divisor
        self.index = index % order_divisor
        self.generator = primitive_root(prime)
        self._values = _char_values(prime, order_divisor, self.index)

    def __repr__(self):
        return f"DirichletCharacter(p={self.prime}, order={self.order}, index={self.index}/{self.order_divisor})"

    def __eq__(self, other):
        return isinstance(other, DirichletCharacter) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def key(self):
        k = self.order
        return (self.prime, k, (self.index * k // self.order_divisor) % k if k > 1 else 0)

    @property
    def order(self):
        return self.order_divisor // math.gcd(self.index, self.order_divisor)

    @property
    def is_primitive(self):
        return self.order > 1

    @property
    def is_quadratic(self):
        return self.order == 2

    @property
    def values(self) -> np.ndarray:
        """chi(r) for r = 0..p-1 (read-only)."""
        return self._values

    def __call__(self, n: int) -> complex:
        return complex(self._values[n % self.prime])

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.prime, self.order_divisor, -self.index)

    def parity(self) -> int:
        return 1 if abs(self(-1) - 1) < 0.5 else -1


@lru_cache(maxsize=None)
def _char_values(p, k, j):
    g = primitive_root(p)
    vals = np.zeros(p, dtype=complex)
    x = 1
    for t in range(p - 1):
        vals[x] = cmath.exp(2j * math.pi * ((j * t) % k) / k)
        x = (x * g) % p
    vals.setflags(write=False)
    return vals


def char_eval(chi: DirichletCharacter, n: int) -> complex:
    return chi(n)


def primitive_characters(p: int, nonquadratic=False) -> list[DirichletCharacter]:
    """Every primitive character mod p exactly once, ordered by (order, index)."""
    out = []
    for k in divisors(p - 1):
        if k == 1 or (nonquadratic and k == 2):
            continue
        out.extend(DirichletCharacter(p, k, j) for j in range(1, k) if math.gcd(j, k) == 1)
    return out


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum over r mod p of chi(r) e(r/p)."""
    if not chi.is_primitive:
        raise NotPrimitive(f"{chi} is trivial")
    terms = chi.values * unit_phases(chi.prime)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


# -- specs ---------------------------------------------------------------------

@dataclass(frozen=True)
class TransformSpec:
    D1: int
    D2: int
    freq: tuple = (0, 0, 0, 0, 0, 0)
    a: int = 1
    b: int = 1
    d: int = 1
    twist: DirichletCharacter | None = None

    def __post_init__(self):
        object.__setattr__(self, "freq", tuple(int(f) for f in self.freq))
        if len(self.freq) != 6:
            raise ValueError("freq must be (x1, x2, y1, y2, z1, z2)")
        if self.D1 < 1 or self.D2 < 1 or self.d < 1:
            raise BadModuli(f"moduli and d must be positive: D=({self.D1}, {self.D2}), d={self.d}")
        if math.gcd(self.a, self.D1) != 1 or math.gcd(self.b, self.D2) != 1:
            raise BadModuli(f"need a, b units: a={self.a} mod {self.D1}, b={self.b} mod {self.D2}")
        if self.twist is not None:
            p = self.twist.prime
            if not self.twist.is_primitive:
                raise BadTwist("twist character must be primitive")
            if self.D1 % p ** 3 or self.D2 % p ** 3:
                raise BadTwist(f"twisted transform needs {p}^3 | D1, D2, got ({self.D1}, {self.D2})")
            if self.d % p == 0:
                raise BadTwist(f"twisted transform needs (d, {p}) = 1, got d={self.d}")

    @property
    def level(self):
        return 1 if self.twist is None else self.twist.prime ** 3

    def with_freq(self, freq):
        return replace(self, freq=tuple(freq))


@dataclass(frozen=True)
class BoundCertificate:
    bound_value: float
    parameters: dict = field(default_factory=dict)
    source: str = ""


# -- naive tier ------------------------------------------------------------------

@lru_cache(maxsize=None)
def _residues(D):
    r = np.arange(D, dtype=np.int64)
    r.setflags(write=False)
    return r


def _char_table(chi, D, conj=False):
    if chi is None:
        return np.ones(D, dtype=complex)
    v = chi.values[np.arange(D) % chi.prime]
    return np.conj(v) if conj else v


def _push_single(mult, D, w, y):
    """W[r] = sum over m mod D with mult*m = r of w[m] e(-m y / D)."""
    m = np.arange(D)
    out = np.zeros(D, dtype=complex)
    np.add.at(out, (mult * m) % D, w * unit_phases(D)[(-m * y) % D])
    return out


def _push_pair(mult, D, wn, wl, x, z):
    """V[r] = sum over (n, l) with mult*n*l = r of wn[n] wl[l] e(-(n x + l z)/D)."""
    n = np.arange(D)
    ph = unit_phases(D)
    fn = wn * ph[(-n * x) % D]
    fl = wl * ph[(-n * z) % D]
    out = np.zeros(D, dtype=complex)
    np.add.at(out, ((mult * n[:, None] * n[None, :]) % D).ravel(), np.outer(fn, fl).ravel())
    return out


def s_hat_naive(spec: TransformSpec) -> ExpSum:
    """Direct six-variable summation against a precomputed Kloosterman table.

    Every one of the six summation variables is visited; terms sharing the
    same table entry (a m1 d, n1 l1, b n2 l2, m2 d) are grouped before the
    final contraction.
    """
    D1, D2 = spec.D1, spec.D2
    if (D1 * D2) ** 3 > NAIVE_LIMIT:
        raise TooLarge(f"naive transform needs D1^3 D2^3 <= {NAIVE_LIMIT}")
    x1, x2, y1, y2, z1, z2 = spec.freq
    chi = spec.twist
    T = s_gl3_table(spec.level, D1, D2)  # T[m1', n1', m2', n2']
    W1 = _push_single(spec.a * spec.d, D1, _char_table(chi, D1), y1)
    V1 = _push_pair(1, D1, _char_table(chi, D1, True), _char_table(chi, D1, True), x1, z1)
    V2 = _push_pair(spec.b, D2, _char_table(chi, D2), _char_table(chi, D2), x2, z2)
    W2 = _push_single(spec.d, D2, _char_table(chi, D2, True), y2)
    val = np.einsum("abcd,a,b,c,d->", T, W1, V1, V2, W2)
    size = float(np.abs(T).max(initial=0.0)) * (D1 * D2) ** 3
    return ExpSum(complex(val) / (D1 * D2) ** 3, 64 * _EPS * size / (D1 * D2) ** 3 + 64 * _EPS * abs(val))


# -- closed forms ------------------------------------------------------------------

@lru_cache(maxsize=64)
def _pair_data(D):
    """Per residue u mod D: g = gcd(u, D) and (u/g)^-1 mod D/g."""
    u = np.arange(D, dtype=np.int64)
    g = np.gcd(u, D)
    inv = np.zeros(D, dtype=np.int64)
    for gg in divisors(D):
        sel = g == gg
        M = D // gg
        inv[sel] = inverse_table(M)[(u[sel] // gg) % M]
    g.setflags(write=False)
    inv.setflags(write=False)
    return g, inv


def pair_sum_closed(x: int, z: int, D: int) -> np.ndarray:
    """G(u, x, z; D) for every residue u mod D."""
    g, inv = _pair_data(D)
    x %= D
    z %= D
    ok = (x % g == 0) & (z % g == 0)
    Dg = D // g
    l0 = ((x // g) % Dg) * inv % Dg
    val = (D * g) * unit_phases(D)[(-l0 * z) % D]
    return np.where(ok, val, 0)


def pair_sum_direct(u: int, x: int, z: int, D: int) -> ExpSum:
    n = np.arange(D)
    num = u * n[:, None] * n[None, :] - x * n[:, None] - z * n[None, :]
    return ExpSum.from_numerators(num, D)


def simple_pair_sum(B: int, x: int, z: int, q: int, alpha: int) -> ExpSum:
    """sum over n, l mod q^alpha of e(n l B / q^alpha) e(-(n x - l z)/q^alpha)."""
    D = q ** alpha
    n = np.arange(D)
    num = B * n[:, None] * n[None, :] - x * n[:, None] + z * n[None, :]
    return ExpSum.from_numerators(num, D)


def simple_pair_abs(B: int, x: int, z: int, q: int, alpha: int) -> int:
    """Closed form of |simple_pair_sum|: q^(alpha + v(B)) if v(B) <= min(v(x), v(z)), else 0.

    ``B`` is taken with representative in [1, q^alpha], so v(B) <= alpha.
    """
    D = q ** alpha
    vB = valuation(B % D or D, q)
    vx, vz = valuation(x, q), valuation(z, q)
    return q ** (alpha + vB) if vB <= min(vx, vz) else 0


def _single_table(chi, D, mult, y):
    """M[r] = sum over m mod D of w(m) e(m (mult*r - y)/D), for all residues r.

    Returns (values, nonzero mask).  Untwisted: D [D | mult r - y].  Twisted
    (weights chi): (D / tau(conj chi)) sum_beta conj(chi)(beta) [D | mult r - y + beta D/p].
    """
    K = (mult * _residues(D) - y) % D
    if chi is None:
        hit = K == 0
        return hit * complex(D), hit
    p = chi.prime
    out = np.zeros(D, dtype=complex)
    hit = np.zeros(D, dtype=bool)
    cb = np.conj(chi.values)
    tau = gauss_sum(chi.conj())
    for beta in range(1, p):
        h = (K + beta * (D // p)) % D == 0
        out[h] += cb[beta]
        hit |= h
    return out * (D / tau), hit


def _pair_table(chi, D, mult, x, z):
    """P[r] = sum over n, l mod D of w(n) w(l) e((n l mult r - n x - l z)/D) for all r.

    Twisted weights are chi (or its conjugate, passed as ``chi``).
    """
    if chi is None:
        out = pair_sum_closed(x, z, D)
        return out if mult % D == 1 % D else out[(mult * _residues(D)) % D]
    idx = (mult * _residues(D)) % D
    p = chi.prime
    step = D // p
    tau = gauss_sum(chi.conj())
    cb = np.conj(chi.values)
    out = np.zeros(D, dtype=complex)
    for beta in range(1, p):
        for beta2 in range(1, p):
            out += cb[beta] * cb[beta2] * pair_sum_closed(x - beta * step, z - beta2 * step, D)
    return (out / tau ** 2)[idx]


# -- fast tier -------------------------------------------------------------------

@dataclass(frozen=True)
class _Histogram:
    D1: int
    D2: int
    B1: np.ndarray
    u1: np.ndarray
    B2: np.ndarray
    u2: np.ndarray
    counts: np.ndarray
    start: np.ndarray  # CSR over key = B1 * D2 + u2


@lru_cache(maxsize=32)
def _histogram(level, D1, D2):
    rows, counts = quadruple_table(level, D1, D2).histogram()
    rows = rows.reshape(-1, 4)
    key = rows[:, 0] * D2 + rows[:, 3]
    order = np.argsort(key, kind="stable")
    rows, counts, key = rows[order], counts[order], key[order]
    start = np.zeros(D1 * D2 + 1, dtype=np.int64)
    np.cumsum(np.bincount(key, minlength=D1 * D2), out=start[1:])
    return _Histogram(D1, D2, rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy(),
                      rows[:, 3].copy(), counts.astype(float), start)


def _rows_for(h, b1_set, u2_set):
    keys = (b1_set[:, None] * h.D2 + u2_set[None, :]).ravel()
    lo, hi = h.start[keys], h.start[keys + 1]
    n = hi - lo
    if n.sum() == 0:
        return np.zeros(0, dtype=np.int64)
    offs = np.repeat(lo - np.cumsum(n) + n, n)
    return offs + np.arange(n.sum())


def _fast_value(h, spec, chi_conj):
    D1, D2 = spec.D1, spec.D2
    x1, x2, y1, y2, z1, z2 = (int(f) for f in spec.freq)
    chi = spec.twist
    M1, hit1 = _single_table(chi, D1, spec.a * spec.d, y1)
    M2, hit2 = _single_table(chi_conj, D2, spec.d, y2)
    b1_set = np.nonzero(hit1)[0]
    u2_set = np.nonzero(hit2)[0]
    sel = _rows_for(h, b1_set, u2_set)
    if len(sel) == 0:
        return ExpSum(0j, 0.0)
    P1 = _pair_table(chi_conj, D1, 1, x1, z1)
    P2 = _pair_table(chi, D2, spec.b, x2, z2)
    terms = h.counts[sel] * M1[h.B1[sel]] * P1[h.u1[sel]] * P2[h.B2[sel]] * M2[h.u2[sel]]
    terms = terms / (D1 * D2) ** 3
    s = ExpSum.from_terms(terms)
    # closed-form tables carry a few ulps each
    return ExpSum(s.approx, s.abs_error + 32 * _EPS * float(np.abs(terms).sum()))


def s_hat_fast(spec: TransformSpec) -> ExpSum:
    """Transform by exchanging summation order; cost is linear in the quadruples."""
    h = _histogram(spec.level, spec.D1, spec.D2)
    chi_conj = None if spec.twist is None else spec.twist.conj()
    return _fast_value(h, spec, chi_conj)


def s_hat_fast_batch(spec: TransformSpec, freqs) -> np.ndarray:
    """Complex values of the fast transform for each row of ``freqs``."""
    h = _histogram(spec.level, spec.D1, spec.D2)
    chi_conj = None if spec.twist is None else spec.twist.conj()
    freqs = np.atleast_2d(np.asarray(freqs, dtype=np.int64))
    return np.array([_fast_value(h, spec.with_freq(f), chi_conj).approx for f in freqs])


# -- semi-fast tier ------------------------------------------------------------------

def _direct_single(w, D, mult, y):
    m = np.arange(D, dtype=np.int64)
    r = np.arange(D, dtype=np.int64)
    ph = unit_phases(D)[((mult * r[:, None] - y) * m[None, :]) % D]
    return ph @ w


def _direct_pair(wn, wl, D, mult, x, z):
    n = np.arange(D, dtype=np.int64)
    ph = unit_phases(D)
    fn = wn * ph[(-n * x) % D]
    fl = wl * ph[(-n * z) % D]
    out = np.empty(D, dtype=complex)
    nl = np.outer(n, n) % D
    for r in range(D):
        out[r] = fn @ ph[(nl * ((mult * r) % D)) % D] @ fl
    return out


def s_hat_semifast(spec: TransformSpec) -> ExpSum:
    """Quadruple loop with directly summed m- and (n, l)-tables.

    Independent of the closed forms used by :func:`s_hat_fast`; every
    quadruple (not the histogram) is visited.
    """
    D1, D2 = spec.D1, spec.D2
    if max(D1, D2) > SEMIFAST_LIMIT:
        raise TooLarge(f"semi-fast transform needs D1, D2 <= {SEMIFAST_LIMIT}")
    x1, x2, y1, y2, z1, z2 = spec.freq
    chi = spec.twist
    c1, c1b = _char_table(chi, D1), _char_table(chi, D1, True)
    c2, c2b = _char_table(chi, D2), _char_table(chi, D2, True)
    M1 = _direct_single(c1, D1, spec.a * spec.d, y1)
    P1 = _direct_pair(c1b, c1b, D1, 1, x1, z1)
    P2 = _direct_pair(c2, c2, D2, spec.b, x2, z2)
    M2 = _direct_single(c2b, D2, spec.d, y2)
    t = quadruple_table(spec.level, D1, D2)
    terms = M1[t.B1 % D1] * P1[t.u1] * P2[t.B2 % D2] * M2[t.u2] / (D1 * D2) ** 3
    s = ExpSum.from_terms(terms)
    return ExpSum(s.approx, s.abs_error + 16 * max(D1, D2) * _EPS * float(np.abs(terms).sum()))


# -- multiplicativity ------------------------------------------------------------------

def _inv(x, m):
    return pow(x, -1, m) if m > 1 else 0


def split_frequencies(freq, t1, t2, u1, u2):
    """Frequencies for the factor on moduli (u1, u2) when the other factor is (t1, t2).

    (x1, x2, y1, y2, z1, z2) -> (t1' x1, t2 t1'' x2, t1 t2' y1, t2'' y2, t1' z1, t2'' z2)
    where t1' is the inverse of t1 mod u1, t1'' the inverse of t1 mod u2,
    t2' the inverse of t2 mod u1 and t2'' the inverse of t2 mod u2.
    """
    x1, x2, y1, y2, z1, z2 = freq
    it1_u1, it1_u2 = _inv(t1, u1), _inv(t1, u2)
    it2_u1, it2_u2 = _inv(t2, u1), _inv(t2, u2)
    return (it1_u1 * x1, t2 * it1_u2 * x2, t1 * it2_u1 * y1, it2_u2 * y2, it1_u1 * z1, it2_u2 * z2)


def s_hat_multiplicative(spec: TransformSpec, t1: int, u1: int, t2: int, u2: int, evaluator=None) -> ExpSum:
    """Product of the transforms on (t1, t2) and (u1, u2).

    A twisted spec must have its whole p-part in (u1, u2); the (t1, t2)
    factor is then untwisted.
    """
    if t1 * u1 != spec.D1 or t2 * u2 != spec.D2:
        raise NotCoprimeSplit(f"{t1}*{u1}, {t2}*{u2} do not factor ({spec.D1}, {spec.D2})")
    if math.gcd(t1 * t2, u1 * u2) != 1:
        raise NotCoprimeSplit(f"gcd({t1 * t2}, {u1 * u2}) > 1")
    if spec.twist is not None and (t1 * t2) % spec.twist.prime == 0:
        raise NotCoprimeSplit("the twisted prime must sit in the (u1, u2) factor")
    evaluator = evaluator or s_hat_fast
    fu = TransformSpec(u1, u2, split_frequencies(spec.freq, t1, t2, u1, u2),
                       spec.a % u1 if u1 > 1 else 1, spec.b % u2 if u2 > 1 else 1, spec.d, spec.twist)
    ft = TransformSpec(t1, t2, split_frequencies(spec.freq, u1, u2, t1, t2),
                       spec.a % t1 if t1 > 1 else 1, spec.b % t2 if t2 > 1 else 1, spec.d, None)
    va, vb = evaluator(fu), evaluator(ft)
    val = va.approx * vb.approx
    err = va.abs_error * abs(vb.approx) + vb.abs_error * abs(va.approx) + va.abs_error * vb.abs_error
    return ExpSum(val, err + _EPS * abs(val))


# -- bounds ---------------------------------------------------------------------------

def _min_valuation(freq, q):
    vals = [valuation(f, q) for f in freq]
    if all(v == math.inf for v in vals):
        raise AllZeroFrequencies("bound is meaningless at the zero frequency vector")
    return int(min(vals))


def bound_peter1(q: int, alpha1: int, alpha2: int, freq, d: int = 1) -> BoundCertificate:
    """3 q^(2 min(a1, a2) - (a1 + a2) + 2 (gamma + delta))."""
    gamma = _min_valuation(freq, q)
    delta = int(valuation(d, q))
    e = 2 * min(alpha1, alpha2) - (alpha1 + alpha2) + 2 * (gamma + delta)
    return BoundCertificate(3.0 * float(q) ** e, dict(q=q, alpha1=alpha1, alpha2=alpha2, gamma=gamma, delta=delta),
                            "peter1")


def bound_twist(p: int, alpha1: int, alpha2: int, freq) -> BoundCertificate:
    """3 p^(2 min(a1, a2) - (a1 + a2) + 2 rho + 5)."""
    rho = _min_valuation(freq, p)
    e = 2 * min(alpha1, alpha2) - (alpha1 + alpha2) + 2 * rho + 5
    return BoundCertificate(3.0 * float(p) ** e, dict(p=p, alpha1=alpha1, alpha2=alpha2, rho=rho), "twist")


def bound_coro(p: int, D1: int, D2: int, freq, d: int = 1) -> BoundCertificate:
    """p^5 tau3((D1, D2)) (D1, D2)^2 / (D1 D2) * (freq, D1, D2)^2 * (d, D1, D2)^2."""
    g = math.gcd(D1, D2)
    gf = math.gcd(g, *[int(f) for f in freq])
    gd = math.gcd(d, g)
    val = p ** 5 * tau3(g) * g ** 2 / (D1 * D2) * gf ** 2 * gd ** 2
    return BoundCertificate(float(val), dict(p=p, D1=D1, D2=D2, freq_gcd=gf, d_gcd=gd), "coro")


# -- identities -----------------------------------------------------------------------

def chartwist_lhs(chi: DirichletCharacter, S, x: int, alpha: int) -> complex:
    """(1/p^alpha) sum over n mod p^alpha of chi(n) S(n) e(-n x / p^alpha)."""
    D = chi.prime ** alpha
    n = np.arange(D)
    S = np.asarray(S, dtype=complex)
    return complex(np.sum(_char_table(chi, D) * S * unit_phases(D)[(-n * x) % D]) / D)


def chartwist_rhs(chi: DirichletCharacter, S, x: int, alpha: int) -> complex:
    """Additive-character expansion of :func:`chartwist_lhs`.

    (1/tau(conj chi)) sum_beta conj(chi)(beta) (1/p^alpha) sum_n S(n) e(-n (x - p^(alpha-1) beta)/p^alpha).
    """
    p = chi.prime
    D = p ** alpha
    n = np.arange(D)
    S = np.asarray(S, dtype=complex)
    tot = 0j
    for beta in range(1, p):
        inner = np.sum(S * unit_phases(D)[(-n * (x - p ** (alpha - 1) * beta)) % D]) / D
        tot += np.conj(chi(beta)) * inner
    return complex(tot / gauss_sum(chi.conj()))


def inverse_transform(spec: TransformSpec) -> np.ndarray:
    """Recover F[n1, m1, l1, n2, m2, l2] from the full table of naive transforms."""
    D1, D2 = spec.D1, spec.D2
    shape = (D1, D1, D1, D2, D2, D2)
    hat = np.zeros(shape, dtype=complex)
    for idx in np.ndindex(*shape):
        x1, y1, z1, x2, y2, z2 = idx
        hat[idx] = s_hat_naive(spec.with_freq((x1, x2, y1, y2, z1, z2))).approx
    # F = sum_freq hat * e(+...) ; the forward map carried 1/(D1^3 D2^3)
    return np.fft.ifftn(hat) * hat.size


def transform_summand_table(spec: TransformSpec) -> np.ndarray:
    """F[n1, m1, l1, n2, m2, l2] = weights * S^(level)(a m1 d, b n2 l2, n1 l1, m2 d)."""
    D1, D2 = spec.D1, spec.D2
    T = s_gl3_table(spec.level, D1, D2)
    r1, r2 = np.arange(D1), np.arange(D2)
    n1, m1, l1, n2, m2, l2 = np.meshgrid(r1, r1, r1, r2, r2, r2, indexing="ij")
    F = T[(spec.a * m1 * spec.d) % D1, (n1 * l1) % D1, (spec.b * n2 * l2) % D2, (m2 * spec.d) % D2]
    chi = spec.twist
    if chi is not None:
        F = F * np.conj(chi.values[(n1 * l1 * m2) % chi.prime]) * chi.values[(m1 * n2 * l2) % chi.prime]
    return F
