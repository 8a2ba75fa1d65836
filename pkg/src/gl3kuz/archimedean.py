"""Whittaker functions, spectral pairings and the J-transforms.

The renormalised Whittaker function is evaluated from its double Mellin-Barnes
representation with the trapezoidal rule on the vertical lines
``Re s = sigma``.  The integrand is analytic in a strip around each line and
decays exponentially, so the rule converges geometrically in ``1/h``.

Test functions are separable smooth bumps, exactly zero off a box.  The
J-transforms are integrated by nested composite Gauss-Legendre rules whose
ranges are the exact support of the integrand, computed from the box; outside
the feasible parameter region they return literal zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import loggamma

from .errors import ContourTooLow, NotConverged

SAFETY = 1.0 + 1e-9
TWO_PI = 2.0 * math.pi


# -- parameters ----------------------------------------------------------------

@dataclass(frozen=True)
class SpectralParameter:
    mu: tuple

    def __post_init__(self):
        mu = tuple(complex(m) for m in self.mu)
        if len(mu) != 3:
            raise ValueError("mu needs three components")
        if abs(sum(mu)) > 1e-14:
            raise ValueError(f"mu components must sum to zero, got {sum(mu)}")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def exceptional(cls, rho: float, gamma: float = 0.0) -> "SpectralParameter":
        """mu = (rho + i gamma, -rho + i gamma, -2 i gamma)."""
        return cls((complex(rho, gamma), complex(-rho, gamma), complex(0.0, -2.0 * gamma)))

    @classmethod
    def tempered(cls, b1: float, b2: float) -> "SpectralParameter":
        return cls((1j * b1, 1j * b2, -1j * (b1 + b2)))

    @property
    def max_real(self):
        return max(abs(m.real) for m in self.mu)

    @property
    def is_unitary(self):
        """Tempered, or a Weyl translate of the exceptional form with |rho| <= 1/2."""
        if all(abs(m.real) < 1e-14 for m in self.mu):
            return True
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                k = 3 - i - j
                a, b, c = self.mu[i], self.mu[j], self.mu[k]
                if (abs(a.imag - b.imag) < 1e-12 and abs(a.real + b.real) < 1e-12
                        and abs(c.real) < 1e-14 and abs(a.real) <= 0.5):
                    return True
        return False

    def permuted(self, perm) -> "SpectralParameter":
        return SpectralParameter(tuple(self.mu[i] for i in perm))


@dataclass(frozen=True)
class QuadratureConfig:
    sigma: tuple = (1.0, 1.0)
    T: float = 30.0
    h: float | None = None  # None: chosen from the distance to the nearest pole
    nodes: int = 16
    panels: int = 6
    tol: float = 1e-8
    j_nodes: int = 24
    j_tol: float = 1e-6
    threads: int = 1

    def step(self, mu: SpectralParameter, log_scale: float = 0.0):
        """Trapezoid step; ``log_scale`` bounds |log y| (or log X) over the evaluation points."""
        if self.h is not None:
            return self.h
        d = _pole_distance(mu, self.sigma)
        # the half-step error estimate must not alias the y^(-it) oscillation
        return min(0.1, d / 6.0, 1.2 / (1.0 + log_scale))


def _pole_distance(mu, sigma):
    d1 = sigma[0] + min(m.real for m in mu.mu)
    d2 = sigma[1] - max(m.real for m in mu.mu)
    return min(d1, d2)


def _check_contour(mu, sigma):
    if _pole_distance(mu, sigma) <= 0:
        raise ContourTooLow(f"contour {sigma} is not right of the poles for mu={mu.mu}")


# -- test functions ---------------------------------------------------------------

def _smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 1, 1.0, 0.0)
    mid = (x > 0) & (x < 1)
    if mid.any():
        xm = x[mid]
        a = np.exp(-1.0 / xm)
        b = np.exp(-1.0 / (1.0 - xm))
        out[mid] = a / (a + b)
    return out


def bump(v, lo, hi, plateau=0.0):
    """Smooth bump on [lo, hi], exactly zero outside, equal to 1 on the central plateau."""
    v = np.asarray(v, dtype=float)
    u = (v - lo) / (hi - lo)
    out = np.zeros(u.shape)
    inside = (u > 0) & (u < 1)
    if inside.any():
        ui = u[inside]
        ramp = (1.0 - plateau) / 2.0
        out[inside] = _smooth_step(ui / ramp) * _smooth_step((1.0 - ui) / ramp)
    return out


@dataclass(frozen=True)
class TestFunction:
    """F(y1, y2) = amplitude * phi1(c1 * y_i) * phi2(c2 * y_j), a separable bump.

    ``box = (r1, R1, r2, R2)`` is the support of the undilated, unswapped
    function.  ``scale`` and ``swapped`` record dilations and the star
    operation, so that (F*)* = F and dilations compose multiplicatively.
    """

    __test__ = False  # not a pytest class

    box: tuple = (0.8, 1.25, 0.8, 1.25)
    plateau: float = 0.0
    scale: tuple = (1.0, 1.0)
    swapped: bool = False
    amplitude: float = 1.0

    def __post_init__(self):
        r1, R1, r2, R2 = self.box
        if not (0 < r1 < R1 and 0 < r2 < R2):
            raise ValueError(f"bad support box {self.box}")
        if not 0 <= self.plateau < 1:
            raise ValueError("plateau fraction must lie in [0, 1)")

    @classmethod
    def zero(cls, **kw) -> "TestFunction":
        return cls(amplitude=0.0, **kw)

    @property
    def is_zero(self):
        return self.amplitude == 0.0

    def star(self) -> "TestFunction":
        """F*(y1, y2) = F(y2, y1)."""
        return replace(self, swapped=not self.swapped)

    def dilate(self, X1: float, X2: float) -> "TestFunction":
        """F^(X1, X2)(y1, y2) = F(X1 y1, X2 y2)."""
        c1, c2 = self.scale
        if self.swapped:
            return replace(self, scale=(c1 * X2, c2 * X1))
        return replace(self, scale=(c1 * X1, c2 * X2))

    def _base_factor(self, k):
        r1, R1, r2, R2 = self.box
        lo, hi = (r1, R1) if k == 0 else (r2, R2)
        return lo, hi

    def factor(self, j):
        """(lo, hi, callable) of the 1-d factor acting on y_j (j = 0, 1)."""
        k = j if not self.swapped else 1 - j
        lo, hi = self._base_factor(k)
        c = self.scale[k]
        amp = self.amplitude if j == 0 else 1.0
        p = self.plateau
        return lo / c, hi / c, (lambda y, lo=lo, hi=hi, c=c, amp=amp: amp * bump(c * np.asarray(y), lo, hi, p))

    @property
    def support(self):
        """Support box (a1, b1, a2, b2) in the (y1, y2) variables."""
        a1, b1, _ = self.factor(0)
        a2, b2, _ = self.factor(1)
        return a1, b1, a2, b2

    def __call__(self, y1, y2):
        _, _, f1 = self.factor(0)
        _, _, f2 = self.factor(1)
        return f1(y1) * f2(y2)


# -- quadrature helpers ------------------------------------------------------------

@lru_cache(maxsize=32)
def _gl(n):
    x, w = leggauss(n)
    return x, w


def gl_nodes(lo, hi, panels, n):
    """Composite Gauss-Legendre nodes/weights; lo, hi may be arrays (broadcast)."""
    x, w = _gl(n)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = (hi - lo) / panels
    k = np.arange(panels)
    left = lo[..., None] + width[..., None] * k
    nodes = left[..., None] + width[..., None, None] * (x + 1) / 2
    weights = np.broadcast_to(width[..., None, None] * w / 2, nodes.shape)
    shape = lo.shape + (panels * n,)
    return nodes.reshape(shape), weights.reshape(shape)


def _panels_for(length, freq, base):
    """Panel count so each panel covers at most one period of the phase."""
    return int(max(base, math.ceil(length * freq) + 1))


# -- Whittaker function ----------------------------------------------------------------

def whittaker_normalization(mu: SpectralParameter) -> float:
    """pi^(3/2) / |Gamma(1/2 (1 + i Im(mu1 + 2 mu2))) Gamma(...) Gamma(...)|."""
    m1, m2, _ = mu.mu
    args = [(mu1.imag) for mu1 in (m1 + 2 * m2, m1 - m2, 2 * m1 + m2)]
    lg = sum(loggamma(0.5 * (1 + 1j * a)).real for a in args)
    return math.pi ** 1.5 * math.exp(-lg)


@dataclass(frozen=True)
class _Kernel:
    t: np.ndarray
    h: float
    sigma: tuple
    K: np.ndarray  # Gamma quotient on the t-grid, K[i, j] at (t1_i, t2_j)


_kernel_cache: dict = {}


def _kernel(mu: SpectralParameter, sigma, T, h):
    key = (mu.mu, tuple(sigma), T, h)
    k = _kernel_cache.get(key)
    if k is not None:
        return k
    n = int(round(T / h))
    t = h * np.arange(-n, n + 1)
    s1 = sigma[0] + 1j * t
    s2 = sigma[1] + 1j * t
    a = sum(loggamma(0.5 * (s1 + m)) for m in mu.mu) - s1 * math.log(math.pi)
    b = sum(loggamma(0.5 * (s2 - m)) for m in mu.mu) - s2 * math.log(math.pi)
    den = loggamma(0.5 * (s1[:, None] + s2[None, :]))
    K = np.exp(a[:, None] + b[None, :] - den - math.log(4.0))
    K.setflags(write=False)
    k = _Kernel(t, h, tuple(sigma), K)
    if len(_kernel_cache) > 64:
        _kernel_cache.clear()
    _kernel_cache[key] = k
    return k


def _whittaker_grid(mu, y1, y2, sigma, T, h):
    """W~ on the tensor grid y1 x y2, plus (discretisation, truncation) error estimates."""
    k = _kernel(mu, sigma, T, h)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    A = np.exp(-np.outer(np.log(y1), sigma[0] + 1j * k.t))
    B = np.exp(-np.outer(np.log(y2), sigma[1] + 1j * k.t))
    pref = whittaker_normalization(mu) * np.outer(y1, y2) * (h * h) / (4 * math.pi ** 2)
    full = pref * (A @ k.K @ B.T)
    half = pref * 4 * (A[:, ::2] @ k.K[::2, ::2] @ B[:, ::2].T)
    l1 = pref * (np.abs(A) @ np.abs(k.K) @ np.abs(B).T)
    edge = np.abs(k.K[[0, -1], :]).sum() + np.abs(k.K[:, [0, -1]]).sum()
    trunc = pref * np.outer(np.abs(A[:, 0]), np.abs(B[:, 0])) * edge * 2.0
    disc = np.abs(full - half) ** 2 / np.maximum(l1, 1e-300)
    return full, disc + np.abs(trunc) + 8 * np.finfo(float).eps * l1


def whittaker_tilde(mu: SpectralParameter, y1, y2, cfg: QuadratureConfig = QuadratureConfig(), with_error=False):
    """W~_mu(y1, y2) by the double Mellin-Barnes integral on Re s = cfg.sigma.

    Scalars give a complex number; arrays give the tensor-grid values.
    """
    _check_contour(mu, cfg.sigma)
    scalar = np.ndim(y1) == 0 and np.ndim(y2) == 0
    y1a, y2a = np.atleast_1d(y1), np.atleast_1d(y2)
    if np.any(y1a <= 0) or np.any(y2a <= 0):
        raise ValueError("y1, y2 must be positive")
    L = float(max(np.abs(np.log(y1a)).max(), np.abs(np.log(y2a)).max()))
    val, err = _whittaker_grid(mu, y1a, y2a, cfg.sigma, cfg.T, cfg.step(mu, L))
    if float(err.max()) > cfg.tol:
        raise NotConverged(f"Whittaker quadrature error estimate {err.max():.2e} exceeds {cfg.tol:.2e}")
    if scalar:
        val, err = complex(val[0, 0]), float(err[0, 0])
    return (val, err) if with_error else val


# -- pairings -------------------------------------------------------------------------

def _log_scale(F: TestFunction):
    a1, b1, a2, b2 = F.support
    return max(abs(math.log(x)) for x in (a1, b1, a2, b2))


def _factor_grid(F: TestFunction, j, panels, n):
    lo, hi, f = F.factor(j)
    v, w = gl_nodes(lo, hi, panels, n)
    return v, w * f(v)


def pairing_direct(F: TestFunction, mu: SpectralParameter, cfg: QuadratureConfig = QuadratureConfig()):
    """<F, W~_mu> = int int F conj(W~) dy1 dy2 / (y1 y2)^3, by Gauss-Legendre over F's support.

    Returns (value, error estimate).
    """
    if F.is_zero:
        return 0j, 0.0
    _check_contour(mu, cfg.sigma)
    v1, w1 = _factor_grid(F, 0, cfg.panels, cfg.nodes)
    v2, w2 = _factor_grid(F, 1, cfg.panels, cfg.nodes)
    h = cfg.step(mu, _log_scale(F))
    W, err = _whittaker_grid(mu, v1, v2, cfg.sigma, cfg.T, h)
    g1 = w1 / v1 ** 3
    g2 = w2 / v2 ** 3
    val = g1 @ np.conj(W) @ g2
    e = np.abs(g1) @ err @ np.abs(g2)
    # quadrature in y: compare against a coarser Gauss rule
    c1, cw1 = _factor_grid(F, 0, cfg.panels, cfg.nodes // 2)
    c2, cw2 = _factor_grid(F, 1, cfg.panels, cfg.nodes // 2)
    Wc, _ = _whittaker_grid(mu, c1, c2, cfg.sigma, cfg.T, h)
    coarse = (cw1 / c1 ** 3) @ np.conj(Wc) @ (cw2 / c2 ** 3)
    return complex(val), float(e + abs(val - coarse) ** 2 / max(abs(val), 1e-300) + 0.0)


def _mellin_factor(F: TestFunction, j, w, panels, n):
    """int phi_j(v) v^(w - 1) dv for the 1-d factor on y_j, vectorised over w."""
    v, wt = _factor_grid(F, j, panels, n)
    return np.exp(np.outer(w - 1, np.log(v))) @ wt


def pairing_mellin(F: TestFunction, mu: SpectralParameter, cfg: QuadratureConfig = QuadratureConfig()):
    """<F, W~_mu> from the Mellin side.

    With s_j = sigma_j + i t_j and M the double Mellin transform of F this is
    norm/(4 pi^2) int int conj(K(s)) M(-1 - conj s1, -1 - conj s2) dt1 dt2,
    where dilations of F are already inside M.  Returns (value, error).
    """
    if F.is_zero:
        return 0j, 0.0
    _check_contour(mu, cfg.sigma)
    h = cfg.step(mu, _log_scale(F))
    k = _kernel(mu, cfg.sigma, cfg.T, h)
    w1 = -1.0 - cfg.sigma[0] + 1j * k.t
    w2 = -1.0 - cfg.sigma[1] + 1j * k.t
    M1 = _mellin_factor(F, 0, w1, cfg.panels, cfg.nodes)
    M2 = _mellin_factor(F, 1, w2, cfg.panels, cfg.nodes)
    norm = whittaker_normalization(mu) * h * h / (4 * math.pi ** 2)
    val = norm * (M1 @ np.conj(k.K) @ M2)
    half = norm * 4 * (M1[::2] @ np.conj(k.K[::2, ::2]) @ M2[::2])
    l1 = norm * (np.abs(M1) @ np.abs(k.K) @ np.abs(M2))
    edge = np.abs(k.K[[0, -1], :]).sum() + np.abs(k.K[:, [0, -1]]).sum()
    trunc = norm * edge * np.abs(M1).max() * np.abs(M2).max() * 2.0
    err = abs(val - half) ** 2 / max(l1, 1e-300) + trunc + 8 * np.finfo(float).eps * l1
    return complex(val), float(err)


def pairing(F: TestFunction, mu: SpectralParameter, cfg: QuadratureConfig = QuadratureConfig(), method="direct"):
    if method == "direct":
        val, err = pairing_direct(F, mu, cfg)
    elif method == "mellin":
        val, err = pairing_mellin(F, mu, cfg)
    else:
        raise ValueError(f"unknown pairing method {method!r}")
    if err > cfg.tol * max(1.0, abs(val)):
        raise NotConverged(f"pairing error estimate {err:.2e} exceeds tolerance")
    return val


def pairing_crosscheck(F: TestFunction, mu: SpectralParameter, cfg: QuadratureConfig = QuadratureConfig(),
                       shift=0.3):
    """Direct pairing on cfg's contour and Mellin pairing on a contour shifted by ``shift``.

    Returns (direct, mellin, relative deviation).
    """
    a = pairing(F, mu, cfg, "direct")
    cfg_b = replace(cfg, sigma=(cfg.sigma[0] + shift, cfg.sigma[1] + shift),
                    h=None if cfg.h is None else cfg.h * 0.8)
    b = pairing(F, mu, cfg_b, "mellin")
    return a, b, abs(a - b) / max(abs(a), abs(b), 1e-300)


def growth_slope(F: TestFunction, mu: SpectralParameter, Xs, cfg: QuadratureConfig = QuadratureConfig()):
    """Least-squares slope of log|<F^(X, X), W~_mu>| against log X."""
    vals = [abs(pairing(F.dilate(X, X), mu, cfg, "mellin")) for X in Xs]
    slope = np.polyfit(np.log(Xs), np.log(vals), 1)[0]
    return float(slope), vals


def family_coverage(grid, family, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """min over mu in grid of sum_j |<F_j, W~_mu>|^2 (0 for an empty family)."""
    if not family or not grid:
        return 0.0
    return min(sum(abs(pairing(F, mu, cfg, "mellin")) ** 2 for F in family) for mu in grid)


def omega_grid():
    """25 spectral parameters with |Im mu_j| <= 2 and |Re mu_j| <= 1/2."""
    pts = [SpectralParameter.tempered(b1, b2)
           for b1 in (-1.0, -0.5, 0.0, 0.5, 1.0) for b2 in (-1.0, -0.5, 0.5, 1.0)]
    pts += [SpectralParameter.exceptional(r, g) for r, g in
            ((0.1, 0.0), (0.25, 0.5), (0.4, -0.5), (0.5, 1.0), (0.3, -1.0))]
    return pts


def search_family(grid, centers=None, width=0.4, threshold=1e-6, cfg: QuadratureConfig = QuadratureConfig(),
                  max_size=6):
    """Greedy search for bumps whose pairings cover ``grid``.

    Returns (family, coverage).  Failure to reach ``threshold`` is reported
    through the returned coverage, not raised.
    """
    if centers is None:
        centers = [(1.0, 1.0), (0.6, 0.6), (1.5, 1.5), (0.6, 1.5), (1.5, 0.6), (2.5, 2.5)]
    cands = [TestFunction((c1 * (1 - width / 2), c1 * (1 + width / 2), c2 * (1 - width / 2), c2 * (1 + width / 2)))
             for c1, c2 in centers]
    vals = {i: np.array([abs(pairing(F, mu, cfg, "mellin")) ** 2 for mu in grid]) for i, F in enumerate(cands)}
    chosen = []
    cover = np.zeros(len(grid))
    while len(chosen) < max_size:
        best = max((i for i in vals if i not in chosen), key=lambda i: (cover + vals[i]).min(), default=None)
        if best is None:
            break
        chosen.append(best)
        cover = cover + vals[best]
        if cover.min() > threshold:
            break
    return [cands[i] for i in chosen], float(cover.min())


# -- J transforms -------------------------------------------------------------------

def j_tilde_threshold(F: TestFunction) -> float:
    """Smallest A for which the integrand of J~_{eps; F}(A) can be nonzero.

    With (a1, b1, a2, b2) the support box of F, A^2 must exceed the minimum
    over y2 in [a2, b2] of max(a1^3 a2 m^(3/2)/y2, a1 a2 y2 m^(1/2),
    (a1 a2)^(3/2) y2^2 / (b1^(3/2) b2^(1/2))) with m = max(1, y2/b1)^2.
    That function is quasi-convex, so its minimum sits at an endpoint, at
    y2 = b1, or where the decreasing branch meets an increasing one.
    """
    a1, b1, a2, b2 = F.support

    def need(y2):
        m = max(1.0, y2 / b1) ** 2
        return max(a1 ** 3 * a2 * m ** 1.5 / y2, a1 * a2 * y2 * math.sqrt(m),
                   (a1 * a2) ** 1.5 * y2 ** 2 / (b1 ** 1.5 * math.sqrt(b2)))

    cands = {a2, b2, b1, a1, (a1 ** 1.5 * a2 ** -0.5 * b1 ** 1.5 * b2 ** 0.5) ** (1 / 3)}
    return math.sqrt(min(need(min(max(c, a2), b2)) for c in cands))


def j_big_feasible(F: TestFunction, A1: float, A2: float) -> bool:
    """min(A1^2 A2, A1 A2^2) >= (a1 a2)^(3/2), with a safety margin."""
    a1, _, a2, _ = F.support
    return min(A1 * A1 * A2, A1 * A2 * A2) >= (a1 * a2) ** 1.5 * SAFETY


def _e(x):
    return np.exp(TWO_PI * 1j * x)


def _jt_value(eps, F, A, ny, nx, generic=False):
    a1, b1, a2, b2 = F.support
    _, _, f1 = F.factor(0)
    _, _, f2 = F.factor(1)
    y1, w1 = gl_nodes(a1 / A, b1 / A, 1, ny)
    y2, w2 = gl_nodes(a2, b2, 1, ny)
    total = 0j
    for Y1, W1 in zip(y1, w1):
        outer = W1 * w2 * np.conj(f1(A * Y1) * f2(y2)) / (Y1 * y2 * y2)
        s = A / (Y1 * y2)
        if generic:
            ulo = np.ones_like(y2)
            uhi = 4 + 4 * (s * y2 ** 2 / (a1 ** 2 * a2)) ** (2 / 3)
        else:
            ulo = np.maximum.reduce([np.ones_like(y2), y2 ** 2 / b1 ** 2, (s * y2 ** 2 / (b1 ** 2 * b2)) ** (2 / 3)])
            uhi = np.minimum((s * y2 ** 2 / (a1 ** 2 * a2)) ** (2 / 3), (s / a2) ** 2)
        ok = (ulo < uhi) & (outer != 0)
        if not ok.any():
            continue
        Y2, out, S = y2[ok], outer[ok], s[ok]
        tlo, thi = np.sqrt(ulo[ok] - 1.0), np.sqrt(uhi[ok] - 1.0)
        p1 = _panels_for(float((thi - tlo).max()), 2 * b1 + b2, 1)
        t, wt = gl_nodes(tlo, thi, p1, nx)
        x1 = np.concatenate([t, -t], axis=1)
        wx1 = np.concatenate([wt, wt], axis=1)
        u = 1.0 + x1 * x1
        Yc, Sc = Y2[:, None], S[:, None]
        if generic:
            wlo = u
            whi = u + (b1 * u / Yc) ** 2 + Sc * np.sqrt(u) / a2
        else:
            wlo = np.maximum.reduce([(a1 * u / Yc) ** 2, Sc * np.sqrt(u) / b2, u])
            whi = np.minimum((b1 * u / Yc) ** 2, Sc * np.sqrt(u) / a2)
        whi = np.maximum(whi, wlo)
        rlo, rhi = np.sqrt(wlo - u), np.sqrt(whi - u)
        p2 = _panels_for(float((rhi - rlo).max()), 2 * b2, 1)
        r, wr = gl_nodes(rlo, rhi, p2, nx)
        x2 = np.concatenate([r, -r], axis=-1)
        wx2 = np.concatenate([wr, wr], axis=-1)
        X1, U, Y, SS = x1[..., None], u[..., None], Yc[..., None], Sc[..., None]
        w = U + x2 * x2
        phase = -eps * A * X1 * Y1 + Y * X1 * x2 / U + SS * x2 / w
        g = _e(phase) * f1(Y * np.sqrt(w) / U) * f2(SS * np.sqrt(U) / w)
        inner = np.sum(wx1 * np.sum(wx2 * g, axis=-1), axis=-1)
        total += np.sum(out * inner)
    return total / (A * A)


def j_tilde(eps: int, F: TestFunction, A: float, cfg: QuadratureConfig = QuadratureConfig(), force=False):
    """J~_{eps; F}(A) over the exact support; literal 0 when A is below threshold.

    ``force`` integrates over a generic box containing the support instead
    (used to probe the threshold).  Returns (value, error estimate).
    """
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    if A <= 0:
        raise ValueError("A must be positive")
    if F.is_zero:
        return 0j, 0.0
    if not force and A < j_tilde_threshold(F) * SAFETY:
        return 0j, 0.0
    n = cfg.j_nodes
    v1 = _jt_value(eps, F, A, n, 10, generic=force)
    v2 = _jt_value(eps, F, A, n + 12, 14, generic=force)
    err = abs(v1 - v2)
    if err > cfg.j_tol * max(1.0, abs(v2)) and not force:
        raise NotConverged(f"J~ quadrature estimate {err:.2e} exceeds tolerance")
    return complex(v2), float(err)


def _jb_value(eps, F, A1, A2, ny, nr, nth, nx, generic=False):
    e1, e2 = eps
    a1, b1, a2, b2 = F.support
    _, _, f1 = F.factor(0)
    _, _, f2 = F.factor(1)
    y1, w1 = gl_nodes(a1 / A1, b1 / A1, 2, ny // 2)
    y2, w2 = gl_nodes(a2 / A2, b2 / A2, 2, ny // 2)
    th = TWO_PI * np.arange(nth) / nth
    cos, sin = np.cos(th), np.sin(th)
    total = 0j
    for Y1, W1 in zip(y1, w1):
        outer = W1 * w2 * np.conj(f1(A1 * Y1) * f2(A2 * y2)) / (Y1 * y2)
        S1, S2 = A2 / y2, A1 / Y1
        c1, d1, c2, d2 = a1 / S1, b1 / S1, a2 / S2, b2 / S2
        qlo = np.maximum(1.0, (d2 * d1 * d1) ** (-1 / 3))
        qhi = (c2 * c1 * c1) ** (-1 / 3)
        if generic:
            # a margin around the exact window, kept nonempty
            qlo, qhi = np.maximum(1.0, 0.8 * qlo), 1.25 * np.maximum(qhi, qlo) + 0.05
        ok = (qlo < qhi) & (outer != 0)
        if not ok.any():
            continue
        out, Y2, S1, c1, d1 = outer[ok], y2[ok], S1[ok], c1[ok], d1[ok]
        rlo, rhi = np.sqrt(qlo[ok] ** 2 - 1), np.sqrt(qhi[ok] ** 2 - 1)
        pr = _panels_for(float((rhi - rlo).max()), b1 + b2, 1)
        r, wr = gl_nodes(rlo, rhi, pr, nr)  # (k, R)
        # axes: (k, R, theta, x1)
        R = r[..., None]
        x2 = R * cos
        x3 = R * sin
        Q = np.sqrt(1 + R * R)
        C1, D1 = c1[:, None, None], d1[:, None, None]
        plo = np.maximum(np.maximum(C1 * Q * Q, np.sqrt(Q / d2)), 1.0)
        phi = np.minimum(D1 * Q * Q, np.sqrt(Q / c2))
        if generic:
            plo, phi = np.maximum(1.0, 0.8 * plo), 1.25 * np.maximum(phi, plo) + 0.05
        inside = phi > plo
        L, U = plo * plo, phi * phi
        q = 1 + x2 * x2
        xs = x2 * x3 / q
        xmin = 1 + x3 * x3 / q

        def rad(xi):
            return np.sqrt(np.maximum(0.0, q * (xi - 1) - x3 * x3)) / q

        rU = np.where(inside, rad(U), 0.0)
        rL = np.where(inside & (L > xmin), rad(L), 0.0)
        rL = np.minimum(rL, rU)
        px = _panels_for(float((rU - rL).max()), b1 + b2, 1)
        t, wt = gl_nodes(rL, rU, px, nx)  # distance from the vertex xs
        x1 = np.concatenate([xs[..., None] + t, xs[..., None] - t], axis=-1)
        wx = np.concatenate([wt, wt], axis=-1)
        X2, X3, QQ = x2[..., None], x3[..., None], (Q * Q)[..., None]
        YY, SS1 = Y2[:, None, None, None], S1[:, None, None, None]
        x4 = x1 * X2 - X3
        xi1 = x4 * x4 + x1 * x1 + 1
        eta1 = X2 * x4 + x1
        eta2 = x1 * X3 + X2
        arg1 = SS1 * np.sqrt(xi1) / QQ
        arg2 = S2 * np.sqrt(QQ) / xi1
        live = (arg1 > a1) & (arg1 < b1) & (arg2 > a2) & (arg2 < b2)
        g = np.zeros(live.shape, dtype=complex)
        if live.any():
            YL = np.broadcast_to(YY, live.shape)[live]
            SL = np.broadcast_to(SS1, live.shape)[live]
            phase = (-e1 * A1 * x1[live] * Y1 - e2 * A2 * np.broadcast_to(X2, live.shape)[live] * YL
                     - SL * eta2[live] / np.broadcast_to(QQ, live.shape)[live] - S2 * eta1[live] / xi1[live])
            g[live] = _e(phase) * f1(arg1[live]) * f2(arg2[live])
        inner = np.sum(wx * g, axis=-1).sum(axis=-1) * (TWO_PI / nth)
        total += np.sum(out * np.sum(wr * r * inner, axis=-1))
    return total / (A1 * A2) ** 2


def j_big(eps, F: TestFunction, A1: float, A2: float, cfg: QuadratureConfig = QuadratureConfig(),
          estimate=True, force=False):
    """J_{eps; F}(A1, A2); literal 0 outside min(A1^2 A2, A1 A2^2) >= (a1 a2)^(3/2).

    Returns (value, error estimate).  With ``estimate=False`` only the coarse
    rule runs and the error is reported as nan.  ``force`` skips the
    feasibility test and integrates over widened ranges.
    """
    eps = tuple(eps)
    if len(eps) != 2 or any(e not in (1, -1) for e in eps):
        raise ValueError("eps must be a pair of signs")
    if A1 <= 0 or A2 <= 0:
        raise ValueError("A1, A2 must be positive")
    if F.is_zero or (not force and not j_big_feasible(F, A1, A2)):
        return 0j, 0.0
    n = cfg.j_nodes
    v1 = _jb_value(eps, F, A1, A2, n - 8, 8, 32, 8, generic=force)
    if not estimate:
        return complex(v1), math.nan
    v2 = _jb_value(eps, F, A1, A2, n, 10, 40, 10, generic=force)
    err = abs(v1 - v2)
    if err > cfg.j_tol * max(1.0, abs(v2)) and not force:
        raise NotConverged(f"J quadrature estimate {err:.2e} exceeds tolerance")
    return complex(v2), float(err)


# -- six-fold Fourier transform of J --------------------------------------------------

@dataclass(frozen=True)
class SixBump:
    """W(t1, t2, u1, u2, v1, v2) = product of 1-d bumps on the given boxes."""

    boxes: tuple = ((0.9, 1.1),) * 6
    amplitude: float = 1.0

    def factor(self, k):
        lo, hi = self.boxes[k]
        amp = self.amplitude if k == 0 else 1.0
        return lo, hi, (lambda x, lo=lo, hi=hi, amp=amp: amp * bump(x, lo, hi))


def _cheb(lo, hi, m):
    k = np.arange(m)
    x = np.cos(np.pi * k / (m - 1))
    nodes = (lo + hi) / 2 + (hi - lo) / 2 * x
    wb = np.ones(m)
    wb[0] = wb[-1] = 0.5
    wb *= (-1.0) ** k
    return nodes, wb


def _bary_matrix(x, nodes, wb):
    diff = x[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-15)
    diff = np.where(exact, 1.0, diff)
    L = wb / diff
    L = L / L.sum(axis=1, keepdims=True)
    row = exact.any(axis=1)
    L[row] = exact[row].astype(float)
    return L


def _side_weights(W: SixBump, idx, freqs, n):
    """rho = t u v and weights w(t)w(u)w(v) e(-t a - u b - v c) over a tensor GL grid."""
    grids = []
    for k, f in zip(idx, freqs):
        lo, hi, fn = W.factor(k)
        x, w = gl_nodes(lo, hi, 4, n)
        grids.append((x, w * fn(x) * _e(-f * x)))
    (t, wt), (u, wu), (v, wv) = grids
    rho = (t[:, None, None] * u[None, :, None] * v[None, None, :]).ravel()
    wts = (wt[:, None, None] * wu[None, :, None] * wv[None, None, :]).ravel()
    return rho, wts


def _rho_range(W: SixBump, idx):
    return (float(np.prod([W.boxes[k][0] for k in idx])), float(np.prod([W.boxes[k][1] for k in idx])))


_jcheb_cache: dict = {}


def _j_cheb(eps, F, A1, A2, W, m, cfg):
    """J sampled on an m x m Chebyshev grid in (rho1, rho2) covering W's support."""
    key = (tuple(eps), F, A1, A2, W.boxes, m, cfg)
    hit = _jcheb_cache.get(key)
    if hit is not None:
        return hit
    n1, b1 = _cheb(*_rho_range(W, (0, 2, 4)), m)
    n2, b2 = _cheb(*_rho_range(W, (1, 3, 5)), m)
    J = np.array([[j_big(eps, F, A1 * math.sqrt(r1), A2 * math.sqrt(r2), cfg, estimate=False)[0] for r2 in n2]
                  for r1 in n1])
    _jcheb_cache[key] = hit = (n1, b1, n2, b2, J)
    return hit


def j_big_fourier(eps, F: TestFunction, A1: float, A2: float, freqs=(0,) * 6, W: SixBump = SixBump(),
                  cfg: QuadratureConfig = QuadratureConfig(), m=5, n=8):
    """Six-fold Fourier transform of J(A1 sqrt(t1 u1 v1), A2 sqrt(t2 u2 v2)) against W.

    ``freqs = (alpha1, alpha2, beta1, beta2, gamma1, gamma2)``.  J is sampled on
    an m x m Chebyshev grid in (rho1, rho2) and interpolated to the tensor
    Gauss nodes in (t, u, v).
    """
    if W.amplitude == 0 or F.is_zero:
        return 0j
    al1, al2, be1, be2, ga1, ga2 = freqs
    rho1, w1 = _side_weights(W, (0, 2, 4), (al1, be1, ga1), n)
    rho2, w2 = _side_weights(W, (1, 3, 5), (al2, be2, ga2), n)
    n1, b1, n2, b2, J = _j_cheb(eps, F, A1, A2, W, m, cfg)
    L1 = _bary_matrix(rho1, n1, b1)
    L2 = _bary_matrix(rho2, n2, b2)
    return complex((w1 @ L1) @ J @ (L2.T @ w2))


def _pushforward_density(W: SixBump, idx, freqs, rho, n):
    """g(rho) = int int w(t) w(u) w(v) e(...) / (t u) dt du with v = rho/(t u)."""
    (k_t, k_u, k_v), (ft, fu, fv) = idx, freqs
    lt, ht, wt_f = W.factor(k_t)
    lu, hu, wu_f = W.factor(k_u)
    _, _, wv_f = W.factor(k_v)
    t, wt = gl_nodes(lt, ht, 4, n)
    u, wu = gl_nodes(lu, hu, 4, n)
    T, U = t[:, None], u[None, :]
    out = []
    for r in rho:
        v = r / (T * U)
        g = wt_f(T) * wu_f(U) * wv_f(v) * _e(-ft * T - fu * U - fv * v) / (T * U)
        out.append(np.sum(wt[:, None] * wu[None, :] * g))
    return np.array(out)


def j_big_fourier_nested(eps, F: TestFunction, A1: float, A2: float, freqs=(0,) * 6, W: SixBump = SixBump(),
                         cfg: QuadratureConfig = QuadratureConfig(), m=5, n=8):
    """The same transform in the other order: W is integrated over the level sets
    of rho = t u v first, then the rho-integrals run against the J interpolant."""
    if W.amplitude == 0 or F.is_zero:
        return 0j
    al1, al2, be1, be2, ga1, ga2 = freqs
    n1, b1, n2, b2, J = _j_cheb(eps, F, A1, A2, W, m, cfg)
    sides = []
    for idx, fr, nodes, bw in (((0, 2, 4), (al1, be1, ga1), n1, b1), ((1, 3, 5), (al2, be2, ga2), n2, b2)):
        lo, hi = _rho_range(W, idx)
        r, w = gl_nodes(lo, hi, 6, n)
        g = w * _pushforward_density(W, idx, fr, r, n)
        sides.append(g @ _bary_matrix(r, nodes, bw))
    return complex(sides[0] @ J @ sides[1])
