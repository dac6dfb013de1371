"""Boundary forcing operators, their trace constants and boundary systems.

The forcing field of order lam on side +- (right: x >= 0, left: x <= 0) is

    L g(t, x) = -+M int_0^t s^((lam+4)/5) K_(lam+5)(x s^(-1/5)) h(t - s) ds,
    h = I_{-(lam+9)/5} g,

with K the Weyl fractional integral of B from the matching side (see
``special_kernel.weyl_kernel``).  Differentiating j times in x lowers the
kernel order by j, lowers the power of s by j/5 and multiplies by (-+1)^j.
At x = 0 the integral collapses to a(lam) g(t), which is what the trace
constants describe.  Numerically the fractional derivative is applied after
the time convolution, which keeps it away from rough starts of g.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.signal import fftconvolve
from scipy.special import roots_jacobi

from .fractional import CausalSignal, TimeGrid, fractional_columns
from .special_kernel import kernel_constants, normalization_mp, weyl_table

__all__ = [
    "SIDES",
    "SingularMatrixError",
    "AdmissibilityError",
    "trace_coefficient",
    "derivative_sign",
    "TraceConstants",
    "BoundaryMatrix",
    "admissible_window",
    "default_lambdas",
    "assemble_boundary_matrix",
    "solve_gammas",
    "ForcingQuadrature",
    "ForcingField",
    "apply_forcing",
    "smooth_cutoff",
]

SIDES = ("right", "left")
_N_ROWS = {"right": 2, "left": 3}


class SingularMatrixError(np.linalg.LinAlgError):
    pass


class AdmissibilityError(ValueError):
    pass


def _check_side(side):
    if side not in SIDES:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")


# ----------------------------------------------------------- trace constants

_DPS = 40
_RICHARDSON_H = mp.mpf("1e-6")


def _a_raw(lam, side):
    pi = mp.pi
    M = normalization_mp()
    num = mp.cos((1 + 4 * lam) * pi / 10) if side == "right" else mp.cos((1 - 6 * lam) * pi / 10)
    return M * num / (5 * mp.sin((1 - lam) * pi / 5))


@lru_cache(maxsize=4096)
def _a(lam, side):
    with mp.workdps(_DPS):
        lam = mp.mpf(lam)
        n = mp.nint((1 - lam) / 5)
        lam0 = 1 - 5 * n
        if abs(lam - lam0) < mp.mpf("1e-7"):
            # removable point: symmetric Richardson from lam +- h, lam +- h/2
            h = _RICHARDSON_H

            def avg(hh):
                return (_a_raw(lam + hh, side) + _a_raw(lam - hh, side)) / 2

            return float((4 * avg(h / 2) - avg(h)) / 3)
        return float(_a_raw(lam, side))


def derivative_sign(side, j):
    """Sign picked up by d_x^j of a forcing field relative to a(lam - j).

    The right field is a Weyl integral from +infinity, so each x-derivative
    flips the sign; the left field integrates from -infinity and does not.
    """
    _check_side(side)
    return (-1) ** j if side == "right" else 1


def trace_coefficient(lam, side, j=0):
    """a(lam - j): the trace constant of the order lam - j field.

    The x = 0 value of d_x^j L^lam g is derivative_sign(side, j) times this,
    times I_{-j/5} g.  a(0) = 1 on both sides.
    """
    _check_side(side)
    if j not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {j}")
    lam = float(lam)
    if not lam > -4 + j:
        raise ValueError(f"trace formula needs lambda > {j - 4}, got {lam}")
    return _a(lam - j, side)


@dataclass(frozen=True)
class TraceConstants:
    side: str

    def __post_init__(self):
        _check_side(self.side)

    def a(self, lam):
        return trace_coefficient(lam, self.side, 0)

    def b(self, lam):
        return trace_coefficient(lam, self.side, 1)

    def c(self, lam):
        if self.side != "left":
            raise ValueError("c(lambda) is only used on the left half-line")
        return trace_coefficient(lam, self.side, 2)


# ---------------------------------------------------------- boundary system


def admissible_window(side, s):
    """Open interval of lambda allowed for regularity s."""
    _check_side(side)
    lo = max(s - 2, -3.0) if side == "right" else max(s - 2, -2.0)
    hi = min(0.5, s + 0.5)
    return lo, hi


def default_lambdas(side, s=None):
    _check_side(side)
    base = (0.0, 0.25) if side == "right" else (0.0, 0.25, -0.25)
    if s is None:
        return base
    lo, hi = admissible_window(side, s)
    if all(lo < lam < hi for lam in base):
        return base
    m = _N_ROWS[side]
    pts = np.linspace(lo, hi, m + 2)[1:-1]
    return tuple(float(p) for p in pts)


def _difference_singular(lams, tol=1e-9):
    for i in range(len(lams)):
        for k in range(i + 1, len(lams)):
            q = (lams[i] - lams[k]) / 5
            if abs(q - round(q)) * 5 < tol:
                return True
    return False


@dataclass(frozen=True)
class BoundaryMatrix:
    side: str
    lambdas: tuple
    entries: np.ndarray
    determinant: float
    singular: bool

    def inverse(self):
        if self.singular:
            raise SingularMatrixError(f"boundary matrix for lambdas {self.lambdas} is singular")
        return np.linalg.inv(self.entries)


def assemble_boundary_matrix(lambdas, side, s=None, det_threshold=1e-10):
    """Rows j = 0..m-1 hold the signed trace constants of d_x^j L^{lam_i} at x = 0."""
    _check_side(side)
    lams = tuple(float(v) for v in lambdas)
    m = _N_ROWS[side]
    if len(lams) != m:
        raise ValueError(f"{side} side needs {m} lambdas, got {len(lams)}")
    if s is not None:
        lo, hi = admissible_window(side, s)
        bad = [v for v in lams if not lo < v < hi]
        if bad:
            raise AdmissibilityError(f"lambdas {bad} outside ({lo}, {hi}) for s = {s}")
    A = np.array([[derivative_sign(side, j) * _a(lam - j, side) for lam in lams] for j in range(m)])
    det = float(np.linalg.det(A))
    singular = _difference_singular(lams) or abs(det) < det_threshold
    A.setflags(write=False)
    return BoundaryMatrix(side, lams, A, det, singular)


def solve_gammas(A: BoundaryMatrix, rhs):
    """gamma(t) = A^{-1} rhs(t) for every sample."""
    rhs = tuple(rhs)
    if len(rhs) != A.entries.shape[0]:
        raise ValueError(f"need {A.entries.shape[0]} right-hand sides, got {len(rhs)}")
    inv = A.inverse()
    R = np.vstack([r.samples for r in rhs])
    G = inv @ R
    return tuple(CausalSignal(rhs[0].grid, G[i]) for i in range(G.shape[0]))


# ----------------------------------------------------------- forcing fields


@dataclass(frozen=True)
class ForcingQuadrature:
    """Time-quadrature layout for the forcing integral.

    Regular panels use ``nodes`` Gauss-Legendre points, split further on the
    left side so each piece carries at most ``phase_step`` radians of kernel
    oscillation.  The first panel is graded geometrically (``ratio`` per
    level, ``levels`` levels) with a Gauss-Jacobi rule on the innermost piece.
    """

    nodes: int = 8
    levels: int = 12
    ratio: float = 0.5
    graded_nodes: int = 8
    phase_step: float = 2.0
    max_split: int = 64


@dataclass(frozen=True)
class ForcingField:
    grid: TimeGrid
    x: np.ndarray
    values: np.ndarray
    lam: float
    side: str
    deriv: int = 0
    time_index: np.ndarray = field(default=None)

    def trace(self):
        """Column at x = 0 (must be on the grid)."""
        k = np.flatnonzero(self.x == 0.0)
        if k.size == 0:
            raise ValueError("x = 0 is not on the field grid")
        return self.values[:, k[0]]


@lru_cache(maxsize=None)
def _gl(q):
    return leggauss(q)


@lru_cache(maxsize=None)
def _gj(q, a):
    return roots_jacobi(q, 0.0, a)


def _phase(x, s):
    # kernel phase 0.535 |w|^(5/4) with w = x s^(-1/5)
    return 0.535 * abs(x) ** 1.25 * s ** (-0.25)


def _node_set(x, a, dt, n, quad, oscillatory):
    """Nodes s and weights for panel moments.

    Returns (s, pw, wl, wr, panel): pw is the power factor s^a (1 on the
    Gauss-Jacobi piece, whose weights already include it); wl, wr are the
    weights for the rising and falling hat halves.
    """
    xs, wsg = _gl(quad.nodes)
    xgg, wgg = _gl(quad.graded_nodes)
    segs = []  # (lo, hi, panel, kind)
    edges = dt * np.arange(n + 1)
    # graded first panel
    eps = dt * quad.ratio**quad.levels
    hi = dt
    for _ in range(quad.levels):
        lo = hi * quad.ratio
        segs.append((lo, hi))
        hi = lo
    lo_all = np.array([sg[0] for sg in segs] + list(edges[1:-1]))
    hi_all = np.array([sg[1] for sg in segs] + list(edges[2:]))
    pan_all = np.concatenate([np.zeros(len(segs), dtype=int), np.arange(1, n)])
    graded = np.concatenate([np.ones(len(segs), bool), np.zeros(n - 1, bool)])
    if oscillatory and x != 0.0:
        dphi = np.abs(_phase(x, lo_all) - _phase(x, hi_all))
        split = np.clip(np.ceil(dphi / quad.phase_step), 1, quad.max_split).astype(int)
    else:
        split = np.ones(lo_all.size, dtype=int)
    # expand splits
    rep = np.repeat(np.arange(lo_all.size), split)
    k = np.arange(rep.size) - np.repeat(np.cumsum(split) - split, split)
    frac_lo = k / split[rep]
    frac_hi = (k + 1) / split[rep]
    span = hi_all[rep] - lo_all[rep]
    plo = lo_all[rep] + span * frac_lo
    phi = lo_all[rep] + span * frac_hi
    g = graded[rep]
    s_parts, w_parts, p_parts = [], [], []
    for mask, (xq, wq) in ((g, (xgg, wgg)), (~g, (xs, wsg))):
        if not np.any(mask):
            continue
        half = (phi[mask] - plo[mask]) / 2
        mid = (phi[mask] + plo[mask]) / 2
        s_parts.append((mid[:, None] + half[:, None] * xq).ravel())
        w_parts.append((half[:, None] * wq).ravel())
        p_parts.append(np.repeat(pan_all[rep][mask], xq.size))
    s = np.concatenate(s_parts)
    w = np.concatenate(w_parts)
    panel = np.concatenate(p_parts)
    pw = s**a
    # innermost piece [0, eps] with weight s^a
    uj, wj = _gj(quad.graded_nodes, a)
    s_in = eps * (1 + uj) / 2
    w_in = (eps / 2) ** (a + 1) * wj
    s = np.concatenate([s_in, s])
    w = np.concatenate([w_in, w])
    pw = np.concatenate([np.ones_like(s_in), pw])
    panel = np.concatenate([np.zeros(s_in.size, dtype=int), panel])
    rise = (s - panel * dt) / dt
    return s, pw, w * rise, w * (1 - rise), panel


def _moments(x, a, mu, side, dt, n, quad, table):
    oscillatory = side == "left"
    s, pw, wl, wr, panel = _node_set(x, a, dt, n, quad, oscillatory)
    if x == 0.0:
        kv = np.full(s.shape, table(np.zeros(1))[0])
    else:
        kv = table(x * s ** (-0.2))
    f = pw * kv
    PL = np.bincount(panel, weights=f * wl, minlength=n)
    PR = np.bincount(panel, weights=f * wr, minlength=n)
    return PL, PR


def _kernel_side(lam, side, x):
    """Kernel side used at x: lam = 0 fields are the same on both sides."""
    if side == "right" and x < 0 or side == "left" and x > 0:
        if lam != 0.0:
            raise ValueError(f"lambda = {lam} field on the {side} side is only evaluated for "
                             f"{'x >= 0' if side == 'right' else 'x <= 0'}")
        return "left" if side == "right" else "right"
    return side


def apply_forcing(g: CausalSignal, lam, side, x, deriv=0, times=None, quad=None):
    """Forcing field (or its deriv-th x-derivative) of order lam built from g.

    x: array of positions on the side's half-line (lam = 0 also accepts the
    other half-line).  times: optional indices of the time samples wanted.
    """
    _check_side(side)
    lam = float(lam)
    if not -5 < lam < 5.5:
        raise ValueError(f"lambda = {lam} outside (-5, 5.5)")
    if deriv < 0 or lam + 4 - deriv <= -5:
        raise ValueError(f"derivative order {deriv} not available for lambda = {lam}")
    quad = quad or ForcingQuadrature()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    grid = g.grid
    n, dt = grid.n, grid.dt
    idx = np.arange(n) if times is None else np.atleast_1d(np.asarray(times, dtype=int))
    if not np.any(g.samples):
        return ForcingField(grid, x, np.zeros((idx.size, x.size)), lam, side, deriv, idx)
    a = (lam + 4 - deriv) / 5
    mu = lam + 5 - deriv
    M = kernel_constants().M
    gs = g.samples
    Q = np.empty((n, x.size))
    tables = {}
    for col, xv in enumerate(x):
        ks = _kernel_side(lam, side, xv)
        if ks not in tables:
            tables[ks] = weyl_table(mu, ks)
        sign = -M * (-1) ** deriv if ks == "right" else M
        PL, PR = _moments(xv, a, mu, ks, dt, n, quad, tables[ks])
        W = PR.copy()
        W[1:] += PL[:-1]
        Q[:, col] = sign * (fftconvolve(W, gs)[:n] - PR * gs[0])
    # convolutions commute: k * I_{-nu} g = I_{-nu} (k * g), and k * g is the smoother input
    out = fractional_columns(Q, dt, -(lam + 9) / 5)[idx]
    out[idx == 0, :] = 0.0
    return ForcingField(grid, x, out, lam, side, deriv, idx)


def smooth_cutoff(t, width=1.0):
    """C-infinity cutoff: 1 on |t| <= width, 0 on |t| >= 2 width."""
    t = np.abs(np.asarray(t, dtype=float)) / width
    u = np.clip(t - 1.0, 0.0, 1.0)

    def bump(z):
        out = np.zeros_like(z)
        pos = z > 0
        out[pos] = np.exp(-1.0 / z[pos])
        return out

    num = bump(1.0 - u)
    return num / (num + bump(u))
