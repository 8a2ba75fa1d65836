"""Right-hand side of the level-N Kuznetsov formula.

The four terms are the diagonal term, the two degenerate Weyl cells and the
long-element term.  Each sum is truncated exactly: a modulus pair is kept only
when the argument of its J-transform lies in the region where the integrand
can be nonzero, which is computed from the support box of F.  Every kept pair
and its summand is recorded in a ledger.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .archimedean import (SAFETY, QuadratureConfig, TestFunction, gl_nodes, j_big, j_tilde,
                          j_tilde_threshold)
from .errors import BadLevel, NotCoprime
from .kloosterman import s_gl3, s_tilde


@dataclass(frozen=True)
class KuznetsovRHSSpec:
    level: int
    n1: int
    n2: int
    m1: int
    m2: int
    F: TestFunction = TestFunction()
    cfg: QuadratureConfig = QuadratureConfig()

    def __post_init__(self):
        if self.level < 1:
            raise BadLevel(f"level must be positive, got {self.level}")
        for name in ("n1", "n2", "m1", "m2"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")

    # cutoffs are derived from the support of F, never set by the caller
    @property
    def sigma6_cutoffs(self):
        """(X1, X2): J vanishes unless D1 <= X1 and D2 <= X2."""
        a1, _, a2, _ = self.F.support
        c = (a1 * a2) ** 1.5
        n1, n2, m1, m2 = self.n1, self.n2, self.m1, self.m2
        X1 = (n1 * m2 * math.sqrt(n2 * m1) / c) ** (2 / 3)
        X2 = (n2 * m1 * math.sqrt(n1 * m2) / c) ** (2 / 3)
        return X1 * SAFETY, X2 * SAFETY

    @property
    def sigma4_bound(self):
        """J~_{F*}(sqrt(n1 n2 m2/(D1 D2))) vanishes unless D1 D2 <= this."""
        return self.n1 * self.n2 * self.m2 / j_tilde_threshold(self.F.star()) ** 2 * SAFETY

    @property
    def sigma5_bound(self):
        return self.n1 * self.n2 * self.m1 / j_tilde_threshold(self.F) ** 2 * SAFETY


@dataclass
class RHSBreakdown:
    delta_term: float
    sigma4: complex
    sigma5: complex
    sigma6: complex
    ledgers: dict = field(default_factory=dict)  # name -> [(D1, D2, summand)]

    @property
    def total(self):
        return self.delta_term + self.sigma4 + self.sigma5 + self.sigma6


def norm_squared(F: TestFunction, panels=8, nodes=16) -> float:
    """||F||^2 = int int |F|^2 dy1 dy2 / (y1 y2)^3, by separation of variables."""
    if F.is_zero:
        return 0.0
    out = 1.0
    for j in (0, 1):
        lo, hi, f = F.factor(j)
        y, w = gl_nodes(lo, hi, panels, nodes)
        out *= float(np.sum(w * np.abs(f(y)) ** 2 / y ** 3))
    return out


# -- modulus enumeration -------------------------------------------------------------

def sigma4_moduli(spec: KuznetsovRHSSpec):
    """Pairs with N D2 | D1, n2 D1 = m1 D2^2 inside the support cutoff."""
    N, n2, m1 = spec.level, spec.n2, spec.m1
    bound = spec.sigma4_bound
    out = []
    D2 = 1
    while m1 * D2 ** 3 <= bound * n2:
        if (m1 * D2 * D2) % n2 == 0:
            D1 = m1 * D2 * D2 // n2
            if D1 % (N * D2) == 0 and D1 * D2 <= bound:
                out.append((D1, D2))
        D2 += 1
    return out


def sigma5_moduli(spec: KuznetsovRHSSpec):
    """Pairs with N | D1 | D2, n1 D2 = m2 D1^2 inside the support cutoff."""
    N, n1, m2 = spec.level, spec.n1, spec.m2
    bound = spec.sigma5_bound
    out = []
    D1 = N
    while m2 * D1 ** 3 <= bound * n1:
        if (m2 * D1 * D1) % n1 == 0:
            D2 = m2 * D1 * D1 // n1
            if D2 % D1 == 0 and D1 * D2 <= bound:
                out.append((D1, D2))
        D1 += N
    return out


def sigma6_moduli(spec: KuznetsovRHSSpec):
    N = spec.level
    X1, X2 = spec.sigma6_cutoffs
    return [(D1, D2) for D1 in range(N, int(X1) + 1, N) for D2 in range(N, int(X2) + 1, N)]


def sigma4_moduli_param(spec: KuznetsovRHSSpec):
    """The same set through D1 = N^2 d1 d2, D2 = N d2, n2 d1 = m1 d2 (needs (n1 m1, N) = 1)."""
    N, n2, m1 = spec.level, spec.n2, spec.m1
    if math.gcd(spec.n1 * m1, N) != 1:
        raise NotCoprime("parametrization needs (n1 m1, N) = 1")
    bound = spec.sigma4_bound
    g = math.gcd(n2, m1)
    # n2 d1 = m1 d2  <=>  (d1, d2) = k (m1/g, n2/g)
    a, b = m1 // g, n2 // g
    out = []
    k = 1
    while N ** 3 * (k * a) * (k * b) ** 2 <= bound:
        d1, d2 = k * a, k * b
        out.append((N * N * d1 * d2, N * d2))
        k += 1
    return sorted(out, key=lambda p: p[1])


def sigma5_moduli_param(spec: KuznetsovRHSSpec):
    """D1 = N d1, D2 = N^2 d1 d2, n1 d2 = m2 d1 (needs (n1 m1, N) = 1)."""
    N, n1, m2 = spec.level, spec.n1, spec.m2
    if math.gcd(n1 * spec.m1, N) != 1:
        raise NotCoprime("parametrization needs (n1 m1, N) = 1")
    bound = spec.sigma5_bound
    g = math.gcd(n1, m2)
    a, b = n1 // g, m2 // g  # d1 = k a, d2 = k b
    out = []
    k = 1
    while N ** 3 * (k * a) ** 2 * (k * b) <= bound:
        d1, d2 = k * a, k * b
        out.append((N * d1, N * N * d1 * d2))
        k += 1
    return out


# -- assembly --------------------------------------------------------------------------

def _sigma4_term(spec, D1, D2):
    A = math.sqrt(spec.n1 * spec.n2 * spec.m2 / (D1 * D2))
    Fs = spec.F.star()
    total = 0j
    for eps in (1, -1):
        J, _ = j_tilde(eps, Fs, A, spec.cfg)
        if J != 0:
            total += complex(s_tilde(eps * spec.m2, spec.n2, spec.n1, D2, D1, exact=False)) / (D1 * D2) * J
    return total


def _sigma5_term(spec, D1, D2):
    A = math.sqrt(spec.n1 * spec.n2 * spec.m1 / (D1 * D2))
    total = 0j
    for eps in (1, -1):
        J, _ = j_tilde(eps, spec.F, A, spec.cfg)
        if J != 0:
            total += complex(s_tilde(eps * spec.m1, spec.n1, spec.n2, D1, D2, exact=False)) / (D1 * D2) * J
    return total


def sigma6_arguments(spec: KuznetsovRHSSpec, D1, D2):
    A1 = math.sqrt(spec.n2 * spec.m1 * D1) / D2
    A2 = math.sqrt(spec.n1 * spec.m2 * D2) / D1
    return A1, A2


def _sigma6_term(spec, D1, D2):
    A1, A2 = sigma6_arguments(spec, D1, D2)
    total = 0j
    for e1 in (1, -1):
        for e2 in (1, -1):
            J, _ = j_big((e1, e2), spec.F, A1, A2, spec.cfg)
            if J != 0:
                S = s_gl3(e2 * spec.m2, e1 * spec.m1, spec.n1, spec.n2, D1, D2, level=spec.level, exact=False)
                total += complex(S) / (D1 * D2) * J
    return total


def _ledger(fn, spec, pairs, threads):
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(threads) as ex:
            vals = list(ex.map(lambda p: fn(spec, *p), pairs))
    else:
        vals = [fn(spec, *p) for p in pairs]
    return [(D1, D2, v) for (D1, D2), v in zip(pairs, vals)]


def assemble_rhs(spec: KuznetsovRHSSpec, threads: int | None = None) -> RHSBreakdown:
    """Delta + Sigma4 + Sigma5 + Sigma6 with per-modulus ledgers."""
    threads = spec.cfg.threads if threads is None else threads
    diag = spec.n1 == spec.m1 and spec.n2 == spec.m2
    delta = norm_squared(spec.F) if diag else 0.0
    ledgers = {
        "sigma4": _ledger(_sigma4_term, spec, sigma4_moduli(spec), threads),
        "sigma5": _ledger(_sigma5_term, spec, sigma5_moduli(spec), threads),
        "sigma6": _ledger(_sigma6_term, spec, sigma6_moduli(spec), threads),
    }
    sums = {k: complex(sum(v for _, _, v in rows)) for k, rows in ledgers.items()}
    return RHSBreakdown(delta, sums["sigma4"], sums["sigma5"], sums["sigma6"], ledgers)


# -- long-element tail average -------------------------------------------------------------

def sigma6_tail_ledger(spec: KuznetsovRHSSpec, X1: float, X2: float) -> float:
    """Sum of |S^(N)(m1, m2, n1, n2; D1, D2)| over N | D1 <= X1, N | D2 <= X2."""
    N = spec.level
    if math.gcd(spec.m1 * spec.m2 * spec.n1 * spec.n2, N) != 1:
        raise NotCoprime("the tail average needs (m1 m2 n1 n2, N) = 1")
    total = 0.0
    for D1 in range(N, int(X1) + 1, N):
        for D2 in range(N, int(X2) + 1, N):
            total += abs(complex(s_gl3(spec.m1, spec.m2, spec.n1, spec.n2, D1, D2, level=N, exact=False)))
    return total


def tail_shape(N: int, X1: float, X2: float, eps: float = 0.1) -> float:
    """(X1 X2)^(3/2 + eps) / N^(3/2)."""
    return (X1 * X2) ** (1.5 + eps) / N ** 1.5
