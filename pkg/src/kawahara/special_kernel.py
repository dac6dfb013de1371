"""Oscillatory kernel B(x) = (1/2pi) int exp(i x xi + i xi^5) d xi and relatives.

B is computed on a deformed contour.  For x >= 0 the contour is the ray
arg xi = pi/10 (and its mirror at 9pi/10); for x < 0 it follows the real
axis up to the stationary point xi0 = (-x/5)^(1/4) and then leaves along a
ray parallel to arg xi = pi/10.  On the ray Im(x xi + xi^5) >= r^5, so the
integrand decays super-exponentially and Gauss-Legendre panels converge
geometrically.

The same path, detoured around xi = 0, evaluates the Weyl fractional
integrals of B (``weyl_kernel``), which carry the branch factor
(-+ i xi)^(-mu).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

__all__ = [
    "KernelAccuracyError",
    "KernelEvaluator",
    "KernelConstants",
    "eval_kernel",
    "eval_kernel_raw",
    "kernel_constants",
    "taylor_coefficients",
    "mellin_transform",
    "weyl_kernel",
    "WeylTable",
    "weyl_table",
    "kernel_table",
]

_ROT = np.exp(1j * np.pi / 10)


class KernelAccuracyError(ArithmeticError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = float(achieved)


@dataclass(frozen=True)
class KernelEvaluator:
    """Configuration for ``eval_kernel``.

    nodes_per_panel, segment_panels, ray_panels: Gauss-Legendre layout.
    tol / tol_far: absolute target for x >= far_threshold / below it.
    taylor_radius: |x| <= radius uses the Taylor series when method="auto".
    x_max: clamp on |x|.
    """

    nodes_per_panel: int = 24
    segment_panels: int = 16
    ray_panels: int = 16
    ray_length: float = 2.6
    tol: float = 1e-10
    tol_far: float = 1e-6
    far_threshold: float = -10.0
    taylor_radius: float = 1.0
    x_max: float = 30.0
    method: str = "auto"
    check: bool = True

    def __post_init__(self):
        if self.tol <= 0 or self.tol_far <= 0:
            raise ValueError("tolerance must be positive")
        if min(self.nodes_per_panel, self.segment_panels, self.ray_panels) < 1:
            raise ValueError("panel counts must be positive")
        if self.nodes_per_panel < 8:
            raise ValueError("need at least 8 nodes per panel")
        if self.method not in ("auto", "quadrature", "taylor"):
            raise ValueError(f"unknown method {self.method!r}")

    def tolerance_at(self, x):
        return self.tol if x >= self.far_threshold else self.tol_far


@lru_cache(maxsize=None)
def _gl(q):
    return leggauss(q)


@lru_cache(maxsize=None)
def _panel_rule(a, b, npan, q):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    xg, wg = _gl(q)
    edges = np.linspace(a, b, npan + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * xg).ravel()
    weights = (half[:, None] * wg).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _stationary_point(x):
    return (max(-x, 0.0) / 5.0) ** 0.25


def _segment_panels(x, base):
    # one panel per ~8 radians of phase accumulated on the real segment
    xi0 = _stationary_point(x)
    phase = 0.8 * abs(min(x, 0.0)) * xi0
    return max(base, int(math.ceil(phase / 8.0)))


def _contour(x, start, cfg, q=None):
    """Right half of the contour: segment start -> P, then ray P + r e^{i pi/10}.

    Returns complex nodes z and complex weights dz.
    """
    q = q or cfg.nodes_per_panel
    P = max(_stationary_point(x), abs(start))
    parts_z, parts_w = [], []
    if P > 0:
        s, ws = _panel_rule(0.0, 1.0, _segment_panels(x, cfg.segment_panels), q)
        d = P - start
        parts_z.append(start + d * s)
        parts_w.append(ws * d)
    r, wr = _panel_rule(0.0, cfg.ray_length, cfg.ray_panels, q)
    parts_z.append(P + r * _ROT)
    parts_w.append(wr * _ROT)
    return np.concatenate(parts_z), np.concatenate(parts_w)


def _half_integral(x, n, cfg, q=None):
    z, dz = _contour(x, 0.0, cfg, q)
    return np.sum(dz * (1j * z) ** n * np.exp(1j * (x * z + z**5)))


def eval_kernel_raw(x, n=0, cfg=None):
    """Full symmetric contour sum for B^(n)(x); complex, imaginary part ~ 0.

    The left half is evaluated at the mirrored nodes -conj(z) rather than by
    conjugation, so the imaginary part is a genuine consistency check.
    """
    cfg = cfg or KernelEvaluator()
    z, dz = _contour(float(x), 0.0, cfg)
    zl = -np.conj(z)
    dzl = np.conj(dz)
    right = np.sum(dz * (1j * z) ** n * np.exp(1j * (x * z + z**5)))
    left = np.sum(dzl * (1j * zl) ** n * np.exp(1j * (x * zl + zl**5)))
    return complex((right + left) / (2 * np.pi))


def _check_args(x, n, cfg):
    if n not in (0, 1, 2, 3, 4):
        raise ValueError(f"derivative order must be in 0..4, got {n}")
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    if abs(x) > cfg.x_max:
        raise ValueError(f"|x| = {abs(x)} exceeds clamp {cfg.x_max}")


def _eval_scalar(x, n, cfg):
    _check_args(x, n, cfg)
    use_taylor = cfg.method == "taylor" or (
        cfg.method == "auto" and abs(x) <= cfg.taylor_radius
    )
    if use_taylor:
        return _taylor_eval(x, n)
    val = _half_integral(x, n, cfg).real / np.pi
    if cfg.check:
        coarse = _half_integral(x, n, cfg, q=max(cfg.nodes_per_panel - 6, cfg.nodes_per_panel // 2)).real / np.pi
        err = abs(val - coarse)
        tol = cfg.tolerance_at(x)
        if err > tol:
            raise KernelAccuracyError(f"B^({n})({x}) did not converge", err)
    return float(val)


def eval_kernel(x, n=0, cfg=None):
    """B^(n)(x).  Scalar in, float out; array in, array out."""
    cfg = cfg or KernelEvaluator()
    if np.ndim(x) == 0:
        return _eval_scalar(float(x), n, cfg)
    xs = np.asarray(x, dtype=float)
    out = np.array([_eval_scalar(float(v), n, cfg) for v in xs.ravel()])
    return out.reshape(xs.shape)


# ---------------------------------------------------------------- constants


@dataclass(frozen=True)
class KernelConstants:
    B0: float
    B1: float
    B2: float
    B3: float
    M: float
    halflineIntegral: Fraction = field(default=Fraction(2, 5))

    def __post_init__(self):
        if not self.B0 > 0:
            raise ValueError("B0 must be positive")


_DPS = 40


@lru_cache(maxsize=1)
def _constants_mp():
    with mp.workdps(_DPS):
        pi = mp.pi
        c1 = mp.cos(pi / 10)
        c3 = mp.cos(3 * pi / 10)
        B0 = c1 * mp.gamma(mp.mpf(1) / 5) / (5 * pi)
        B1 = -c3 * mp.gamma(mp.mpf(2) / 5) / (5 * pi)
        B2 = -c3 * mp.gamma(mp.mpf(3) / 5) / (5 * pi)
        B3 = c1 * mp.gamma(mp.mpf(4) / 5) / (5 * pi)
        M = 1 / (B0 * mp.gamma(mp.mpf(4) / 5))
    return B0, B1, B2, B3, M


def kernel_constants():
    B0, B1, B2, B3, M = _constants_mp()
    return KernelConstants(float(B0), float(B1), float(B2), float(B3), float(M))


def normalization_mp():
    """M = 1/(B(0) Gamma(4/5)) as an mpmath number."""
    return _constants_mp()[4]


@lru_cache(maxsize=None)
def taylor_coefficients(n=0, terms=90):
    """c_k with B^(n)(x) = sum_k c_k x^k, from B(0)..B'''(0) and B''''(0) = 0.

    B'''' = -(x/5) B gives B^(k+4)(0) = -(k/5) B^(k-1)(0).
    """
    B0, B1, B2, B3, _ = _constants_mp()
    with mp.workdps(_DPS):
        d = [B0, B1, B2, B3, mp.mpf(0)]
        while len(d) < n + terms + 1:
            m = len(d)
            d.append(-mp.mpf(m - 4) / 5 * d[m - 5])
        coeffs = [d[n + k] / mp.factorial(k) for k in range(terms)]
        return np.array([float(c) for c in coeffs])


def _taylor_eval(x, n):
    c = taylor_coefficients(n)
    return float(np.polynomial.polynomial.polyval(x, c))


# ------------------------------------------------------------------- Mellin


def _mellin_closed(lam, side):
    """Closed form with the Gamma(1/5 - lam/5) pole removed analytically."""
    with mp.workdps(_DPS):
        lam = mp.mpf(lam)
        pi = mp.pi
        # near lam = 1 + 5n the Gamma pole cancels the cosine zero
        n = int(mp.nint((lam - 1) / 5))
        if side == "plus" and n >= 0 and abs(lam - (1 + 5 * n)) < mp.mpf("1e-12"):
            return (-1) ** n * 2 * mp.factorial(5 * n) / (5 * mp.factorial(n))
        arg = (1 + 4 * lam) if side == "plus" else (1 - 6 * lam)
        return mp.gamma(lam) * mp.gamma((1 - lam) / 5) * mp.cos(arg * pi / 10) / (5 * pi)


def mellin_transform(lam, side="plus"):
    """int_0^inf x^(lam-1) B(+-x) dx for side 'plus' / 'minus'."""
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    lam = float(lam)
    if side == "plus" and not lam > 0:
        raise ValueError(f"plus-side Mellin transform needs lambda > 0, got {lam}")
    if side == "minus" and not 0 < lam < 3 / 8:
        raise ValueError(f"minus-side Mellin transform needs 0 < lambda < 3/8, got {lam}")
    return float(_mellin_closed(lam, side))


def mellin_continued(mu, side):
    """Analytic continuation of the Mellin closed form (no strip check)."""
    return _mellin_closed(mu, side)


# ---------------------------------------------------- Weyl fractional kernels

_SIDE_SIGN = {"right": 1, "left": -1}


def _weyl_rho(w, side, mu):
    if mu == int(mu) and mu <= 0:
        return 0.0
    wrong = (side == "right" and w < 0) or (side == "left" and w > 0)
    if wrong:
        return min(0.5, 1.0 / abs(w))
    return 0.5


def weyl_kernel(w, mu, side):
    """Weyl fractional integral of B of order mu.

    right:  K+_mu(w) = 1/Gamma(mu) int_w^inf  (z-w)^(mu-1) B(z) dz
    left:   K-_mu(w) = 1/Gamma(mu) int_-inf^w (w-z)^(mu-1) B(z) dz
    Non-positive integer mu gives (-+1)^|mu| B^(|mu|).  Accuracy degrades on
    the far side (w < 0 for right, w > 0 for left) where the detour around
    the origin must shrink.
    """
    if side not in _SIDE_SIGN:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    scalar = np.ndim(w) == 0
    ws = np.atleast_1d(np.asarray(w, dtype=float))
    out = _weyl_batch(ws.ravel(), float(mu), side).reshape(ws.shape)
    return float(out[0]) if scalar else out


_WEYL_CFG = KernelEvaluator(
    nodes_per_panel=16, ray_panels=10, x_max=1e6, check=False, method="quadrature"
)


@dataclass(frozen=True)
class WeylTable:
    """Cubic-spline table of K+-_mu on [lo, hi]; direct evaluation outside.

    On the right side values beyond ``hi`` are below 1e-16 and returned as 0.
    """

    mu: float
    side: str
    lo: float
    hi: float
    spline: CubicSpline

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        out = np.zeros(w.shape)
        inside = (w >= self.lo) & (w <= self.hi)
        out[inside] = self.spline(w[inside])
        outside = ~inside
        if self.side == "right":
            outside &= w < self.lo
        if np.any(outside):
            out[outside] = _weyl_batch(w[outside], self.mu, self.side)
        return out


_TABLE_LOCK = threading.Lock()
_TABLES: dict = {}

RIGHT_TABLE_SPAN = 40.0
LEFT_TABLE_SPAN = 80.0
TABLE_STEP = 0.01


def weyl_table(mu, side, span=None, step=TABLE_STEP):
    """Cached spline of K_mu over w in [0, span] (right) or [-span, 0] (left)."""
    if side not in _SIDE_SIGN:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    if span is None:
        span = RIGHT_TABLE_SPAN if side == "right" else LEFT_TABLE_SPAN
    key = (round(float(mu), 14), side, float(span), float(step))
    with _TABLE_LOCK:
        tab = _TABLES.get(key)
    if tab is not None:
        return tab
    n = int(round(span / step))
    grid = np.linspace(0.0, span, n + 1) if side == "right" else np.linspace(-span, 0.0, n + 1)
    vals = _weyl_batch(grid, float(mu), side)
    lo, hi = float(grid[0]), float(grid[-1])
    tab = WeylTable(float(mu), side, lo, hi, CubicSpline(grid, vals))
    with _TABLE_LOCK:
        _TABLES.setdefault(key, tab)
    return _TABLES[key]


def kernel_table(n, lo, hi, step=TABLE_STEP):
    """Cached cubic spline of B^(n) on [lo, hi] (n = 0..4)."""
    if n not in range(5):
        raise ValueError("derivative order must be 0..4")
    lo, hi = math.floor(lo), math.ceil(hi)
    key = ("B", n, lo, hi, float(step))
    with _TABLE_LOCK:
        tab = _TABLES.get(key)
    if tab is not None:
        return tab
    grid = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    # the left Weyl kernel of order -n is B^(n)
    tab = CubicSpline(grid, _weyl_batch(grid, -float(n), "left"), extrapolate=False)
    with _TABLE_LOCK:
        _TABLES.setdefault(key, tab)
    return _TABLES[key]


def _weyl_batch(grid, mu, side):
    """Vectorised Weyl kernel; each point gets the same rule it would alone."""
    sign = _SIDE_SIGN[side]
    cfg = _WEYL_CFG
    grid = np.asarray(grid, dtype=float)
    out = np.empty(grid.shape)
    q = cfg.nodes_per_panel
    npans = np.array([_segment_panels(w, cfg.segment_panels) for w in grid], dtype=int)
    rhos = np.array([_weyl_rho(w, side, mu) for w in grid])
    r, wr = _panel_rule(0.0, cfg.ray_length, cfg.ray_panels, q)
    for npan in np.unique(npans):
        idx = np.flatnonzero(npans == npan)
        wv = grid[idx]
        start = 1j * sign * rhos[idx]
        P = np.maximum((np.maximum(-wv, 0.0) / 5.0) ** 0.25, rhos[idx])
        s, ss = _panel_rule(0.0, 1.0, int(npan), q)
        d = (P - start)[:, None]
        z1 = start[:, None] + d * s[None, :]
        dz1 = d * ss[None, :]
        z2 = P[:, None] + (r * _ROT)[None, :]
        dz2 = np.broadcast_to(wr * _ROT, z2.shape)
        z = np.concatenate([z1, z2], axis=1)
        dz = np.concatenate([dz1, dz2], axis=1)
        for lo in range(0, len(idx), 512):
            sl = slice(lo, lo + 512)
            zz = z[sl]
            f = dz[sl] * (-1j * sign * zz) ** (-mu) * np.exp(1j * (wv[sl, None] * zz + zz**5))
            out[idx[sl]] = f.sum(axis=1).real / np.pi
    return out
