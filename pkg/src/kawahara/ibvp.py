"""Half-line initial-boundary value problems for u_t - u_xxxxx + (u^2)_x = 0.

Right problem: x > 0 with u(t,0) = f, u_x(t,0) = g.  Left problem: x < 0
with u(t,0) = f, u_x(t,0) = g, u_xx(t,0) = h.  Solutions are built as

    u = sum_i L^{lam_i} gamma_i + F,   F = exp(t d_x^5) E u0 - D(d_x (E u)^2),

where E is a smooth reflection extension to the whole (periodic) line and
gamma solves the boundary system at every time sample.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import simpson
from scipy.interpolate import make_interp_spline

from .forcing import (
    ForcingQuadrature,
    apply_forcing,
    assemble_boundary_matrix,
    default_lambdas,
    smooth_cutoff,
    solve_gammas,
)
from .fractional import CausalSignal, GridTooSmallError, TimeGrid, fd_weights, fractional_integral
from .special_kernel import kernel_table
from .spectral import Field2D, SeamWarning, SpaceGrid, duhamel

__all__ = [
    "IBVPProblem",
    "SolverConfig",
    "HalfLineField",
    "SolutionBundle",
    "CompatibilityError",
    "CompatibilityReport",
    "DivergenceError",
    "ResolutionError",
    "half_line_x",
    "validate_compatibility",
    "extend_initial_data",
    "Extension",
    "FreeEvolution",
    "solve_linear",
    "solve_nonlinear",
    "scale",
    "scaling_norm_factors",
    "energy_identity_residual",
    "extract_traces",
    "vanishing_trace_solution",
    "sobolev_norm",
]

N_TRACES = {"right": 2, "left": 3}

# reflection weights c_k for E u(x) = sum c_k u(-k x); reflectK matches the
# first K derivatives (0..K-1) at x = 0
REFLECTIONS = {
    "reflect2": ((1, 3.0), (2, -2.0)),
    "reflect3": ((1, 6.0), (2, -8.0), (3, 3.0)),
    "reflect4": ((1, 10.0), (2, -20.0), (3, 15.0), (4, -4.0)),
    "reflect5": ((1, 15.0), (2, -40.0), (3, 45.0), (4, -24.0), (5, 5.0)),
}


class CompatibilityError(ValueError):
    def __init__(self, report):
        failed = [c.index for c in report.clauses if not c.passed]
        super().__init__(f"compatibility clause(s) {failed} violated at s = {report.s}")
        self.report = report
        self.failed = failed


class DivergenceError(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


class ResolutionError(ValueError):
    pass


def half_line_index(space: SpaceGrid, side):
    if side == "right":
        return np.arange(space.origin, space.N)
    if side == "left":
        return np.arange(0, space.origin + 1)
    raise ValueError(f"side must be 'right' or 'left', got {side!r}")


def half_line_x(space: SpaceGrid, side):
    return space.x[half_line_index(space, side)]


@dataclass(frozen=True)
class IBVPProblem:
    side: str
    space: SpaceGrid
    u0: np.ndarray
    f: CausalSignal
    g: CausalSignal
    h: CausalSignal | None = None
    s: float = 0.0

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=float)
        idx = half_line_index(self.space, self.side)
        if u0.shape != idx.shape:
            raise ValueError(f"u0 needs {idx.size} half-line samples, got shape {u0.shape}")
        if not np.all(np.isfinite(u0)):
            raise ValueError("u0 must be finite")
        object.__setattr__(self, "u0", u0)
        if not -1.75 < self.s < 2.5 or self.s in (0.5, 1.5):
            raise ValueError(f"s = {self.s} outside (-7/4, 5/2) minus {{1/2, 3/2}}")
        if (self.h is None) != (self.side == "right"):
            raise ValueError(f"{self.side} side takes {N_TRACES[self.side]} boundary signals")
        if any(sig.grid != self.f.grid for sig in self.boundary_data):
            raise ValueError("boundary signals must share one time grid")

    @property
    def boundary_data(self):
        return (self.f, self.g) if self.side == "right" else (self.f, self.g, self.h)

    @property
    def time(self) -> TimeGrid:
        return self.f.grid

    @property
    def T(self):
        return self.time.T

    @property
    def x(self):
        return half_line_x(self.space, self.side)


@dataclass(frozen=True)
class SolverConfig:
    lambdas: tuple | None = None
    picard_tol: float = 1e-10
    max_iter: int = 40
    cutoff_width: float = 1.0
    field_extent: float = 10.0  # forcing fields are evaluated for |x| <= field_extent
    extension: str = "reflect3"
    extension_width: float = 1.0
    b: float = 0.45
    alpha: float = 0.55
    compat_tol: float = 1e-6
    extension_sensitivity: bool = False
    corner_radius: float = 3.0  # E u0 on |x| < 2 r is evolved by direct convolution; keep r >= 2 extension_width
    quad: ForcingQuadrature = field(default_factory=ForcingQuadrature)

    def __post_init__(self):
        if not 0 < self.b < 0.5 < self.alpha < 1:
            raise ValueError("need 0 < b < 1/2 < alpha < 1")
        if self.extension not in REFLECTIONS:
            raise ValueError(f"unknown extension {self.extension!r}")
        if self.picard_tol <= 0 or self.max_iter < 1:
            raise ValueError("picard_tol must be positive and max_iter >= 1")
        if min(self.field_extent, self.cutoff_width, self.extension_width, self.corner_radius) <= 0:
            raise ValueError("extents and widths must be positive")


@dataclass(frozen=True)
class HalfLineField:
    time: TimeGrid
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.time.n, np.size(self.x)):
            raise ValueError(f"values shape {v.shape} does not match grids")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def l2(self, xmax=None):
        """L2 norm over [0, T] x {|x| <= xmax} by the trapezoid rule on both axes."""
        m = np.ones(self.x.size, bool) if xmax is None else np.abs(self.x) <= xmax + 1e-12
        dx = abs(self.x[1] - self.x[0]) if self.x.size > 1 else 1.0
        v2 = self.values[:, m] ** 2
        wt = np.full(self.time.n, self.time.dt)
        wt[[0, -1]] /= 2
        wx = np.full(v2.shape[1], dx)
        wx[[0, -1]] /= 2
        return float(np.sqrt(wt @ v2 @ wx))


@dataclass(frozen=True)
class SolutionBundle:
    problem: IBVPProblem
    config: SolverConfig
    u: HalfLineField
    lambdas: tuple
    gammas: tuple
    extended: np.ndarray  # whole-line extension of u0
    history: tuple = ()
    ratios: tuple = ()
    nonlinear: bool = False
    diagnostics: dict = field(default_factory=dict)


# ------------------------------------------------------------ compatibility


@dataclass(frozen=True)
class Clause:
    index: int
    condition: str
    required: bool
    lhs: float
    rhs: float
    mismatch: float
    passed: bool


@dataclass(frozen=True)
class CompatibilityReport:
    s: float
    tolerance: float
    clauses: tuple
    passed: bool


def _one_sided(side, order, npts=5):
    offs = np.arange(npts) if side == "right" else -np.arange(npts)[::-1]
    return offs, fd_weights(offs, order)


def _corner_derivative(u0, dx, side, order):
    offs, w = _one_sided(side, order)
    pos = offs if side == "right" else u0.size - 1 + offs
    return float(w @ u0[pos]) / dx**order


def validate_compatibility(p: IBVPProblem, tol=1e-6, raise_on_failure=True) -> CompatibilityReport:
    """Corner matching u0(0) = f(0) for s > 1/2 and u0'(0) = g(0) for s > 3/2."""
    scale = 1 + np.max(np.abs(p.u0), initial=0) + max(np.max(np.abs(sig.samples)) for sig in p.boundary_data)
    tolerance = tol * scale
    i0 = 0 if p.side == "right" else p.u0.size - 1
    d1 = _corner_derivative(p.u0, p.space.dx, p.side, 1)
    clauses = [Clause(1, "no corner condition for s < 1/2", p.s < 0.5, 0.0, 0.0, 0.0, True)]
    for index, cond, need, lhs, rhs in (
        (2, "u0(0) = f(0)", p.s > 0.5, float(p.u0[i0]), float(p.f.samples[0])),
        (3, "d_x u0(0) = g(0)", p.s > 1.5, d1, float(p.g.samples[0])),
    ):
        mis = abs(lhs - rhs)
        clauses.append(Clause(index, cond, need, lhs, rhs, mis, not need or mis <= tolerance))
    report = CompatibilityReport(p.s, tolerance, tuple(clauses), all(c.passed for c in clauses))
    if raise_on_failure and not report.passed:
        raise CompatibilityError(report)
    return report


# ----------------------------------------------------------------- extension


def sobolev_norm(u, space: SpaceGrid, s):
    """Discrete H^s norm (sum <xi>^(2s) |u_hat|^2) of a whole-line array."""
    uh = np.fft.fft(u) * space.dx
    w = (1 + space.xi**2) ** s
    return float(np.sqrt(np.sum(w * np.abs(uh) ** 2) / (2 * space.L)))


@dataclass(frozen=True)
class Extension:
    values: np.ndarray
    norm_ratio: float
    method: str


def _reflect_rows(U, side, space, method, width):
    """Extend rows of half-line samples U (..., n_half) to the whole grid."""
    U = np.asarray(U, dtype=float)
    o, N = space.origin, space.N
    out = np.zeros(U.shape[:-1] + (N,))
    idx = half_line_index(space, side)
    out[..., idx] = U
    nh = U.shape[-1]
    if side == "right":
        m = np.arange(1, o + 1)  # target x = -m dx at index o - m
        target = o - m
    else:
        m = np.arange(1, N - o)  # target x = +m dx at index o + m
        target = o + m
    chi = smooth_cutoff(m * space.dx, width)
    keep = chi > 0
    m, target, chi = m[keep], target[keep], chi[keep]
    acc = np.zeros(U.shape[:-1] + (m.size,))
    for k, c in REFLECTIONS[method]:
        src = k * m
        ok = src < nh
        pos = src[ok] if side == "right" else nh - 1 - src[ok]
        acc[..., ok] += c * U[..., pos]
    out[..., target] = chi * acc
    return out


def extend_initial_data(u0, side, space: SpaceGrid, method="reflect3", width=1.0, s=0.0) -> Extension:
    """Smooth reflection extension with a cutoff of the reflected part.

    norm_ratio compares H^sigma norms (sigma = s clipped to [0, 1]) of the
    extension and of the even reflection of u0.
    """
    u0 = np.asarray(u0, dtype=float)
    if not np.all(np.isfinite(u0)):
        raise ValueError("u0 must be finite")
    ext = _reflect_rows(u0, side, space, method, width)
    sigma = min(max(s, 0.0), 1.0)
    even = np.zeros(space.N)
    idx = half_line_index(space, side)
    even[idx] = u0
    o = space.origin
    if side == "right":
        n = min(o, u0.size - 1)
        even[o - np.arange(1, n + 1)] = u0[1 : n + 1]
    else:
        n = min(space.N - o - 1, u0.size - 1)
        even[o + np.arange(1, n + 1)] = u0[::-1][1 : n + 1]
    den = sobolev_norm(even, space, sigma)
    ratio = sobolev_norm(ext, space, sigma) / den if den > 0 else 1.0
    ext.setflags(write=False)
    return Extension(ext, ratio, method)


# ------------------------------------------------------------------ solving


def _origin_traces(Fhat, space: SpaceGrid, orders, x0=0.0):
    """d_x^j of rows of a spectral field at x = x0, for j in orders."""
    phase = np.exp(1j * space.xi * (x0 + space.L))
    return [np.real(Fhat @ ((1j * space.xi) ** j * phase)) / space.N for j in orders]


def _boundary_rhs(p, F_traces):
    """f - F, I_{1/5}(g - F_x)(, I_{2/5}(h - F_xx)) as causal signals."""
    grid = p.time
    out = []
    for j, (data, tr) in enumerate(zip(p.boundary_data, F_traces)):
        r = CausalSignal(grid, data.samples - tr)
        out.append(fractional_integral(r, j / 5) if j else r)
    return out


def _forcing_sum(gammas, lambdas, side, x, cfg, deriv=0, times=None):
    acc = 0.0
    for gam, lam in zip(gammas, lambdas):
        acc = acc + apply_forcing(gam, lam, side, x, deriv=deriv, times=times, quad=cfg.quad).values
    return acc


def _lambdas(p, cfg):
    lams = cfg.lambdas if cfg.lambdas is not None else default_lambdas(p.side, p.s)
    return assemble_boundary_matrix(lams, p.side, s=p.s)


def _field_mask(x, cfg):
    return np.abs(x) <= cfg.field_extent + 1e-12


WRAP_WARNING = 1e-3


class FreeEvolution:
    """exp(t d_x^5) of the extended initial data, read on the half-line.

    The extension is only C^(K-1) at the corner, and on a periodic grid the
    high frequencies of that corner wrap around the seam within a fraction
    of a time unit.  So the corner piece rho * E u0 (rho a cutoff of radius
    ``corner_radius``) is evolved by direct convolution with
    t^(-1/5) B(x t^(-1/5)) on the whole line; the smooth remainder is
    evolved spectrally.
    """

    def __init__(self, p: IBVPProblem, cfg: SolverConfig, ext_values):
        self.p, self.cfg = p, cfg
        space = p.space
        self.r = cfg.corner_radius
        rho = smooth_cutoff(space.x, self.r)
        self.far_hat = np.fft.fft(np.asarray(ext_values) * (1 - rho))
        xh = half_line_x(space, p.side)
        self._u0s = make_interp_spline(xh, p.u0, k=5)
        self._xmax = np.max(np.abs(xh))
        self._coef = REFLECTIONS[cfg.extension]
        # quadrature nodes for the corner piece, aligned with the data grid
        self._h = space.dx

    # --- the extension at arbitrary points
    def extension(self, y, nu=0):
        """E u0 (or its nu-th derivative on the data side) at points y."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape)
        data = y >= 0 if self.p.side == "right" else y <= 0
        inside = data & (np.abs(y) <= self._xmax)
        out[inside] = self._u0s(y[inside], nu)
        if nu == 0:
            other = ~data
            yo = y[other]
            acc = np.zeros(yo.shape)
            for k, c in self._coef:
                src = -k * yo
                ok = np.abs(src) <= self._xmax
                acc[ok] += c * self._u0s(src[ok])
            out[other] = smooth_cutoff(yo, self.cfg.extension_width) * acc
        return out

    def corner(self, y, nu=0):
        return smooth_cutoff(y, self.r) * self.extension(y, nu)

    # --- spectral part
    def wrap_error(self, indices):
        """Change of the periodic part on |x| <= field_extent when the grid is
        doubled (same dx), relative to the free solution there; a measure of
        content that has travelled round the grid and re-entered the window."""
        space = self.p.space
        N = space.N
        far = np.fft.ifft(self.far_hat).real
        big = np.zeros(2 * N)
        big[N // 2 : N // 2 + N] = far
        xi2 = 2 * np.pi * np.fft.fftfreq(2 * N, d=space.dx)
        big_hat = np.fft.fft(big)
        m = np.abs(space.x) <= self.cfg.field_extent
        xw = space.x[m]
        worst = 0.0
        for k in np.atleast_1d(indices):
            t = self.p.time.t[k]
            u1 = np.fft.ifft(np.exp(1j * t * space.xi**5) * self.far_hat).real[m]
            u2 = np.fft.ifft(np.exp(1j * t * xi2**5) * big_hat).real[N // 2 : N // 2 + N][m]
            total = u2 + self.near(xw, 0, [k])[0]
            den = np.linalg.norm(total)
            if den > 0:
                worst = max(worst, float(np.linalg.norm(u1 - u2) / den))
        return worst

    def far_rows(self, t):
        return np.exp(1j * np.outer(t, self.p.space.xi**5)) * self.far_hat[None, :]

    # --- corner part
    def _nodes(self, span_z, s):
        xg, wg = _gl8()
        osc = 2.0 / (s * (1 + (span_z / 5) ** 0.25))
        m = max(1, int(math.ceil(self._h / osc)))
        h = self._h / m
        K = int(math.ceil(2 * self.r / h))
        edges = h * np.arange(-K, K + 1)
        half = h / 2
        y = ((edges[:-1] + half)[:, None] + half * xg).ravel()
        w = np.full((edges.size - 1, xg.size), half) * wg
        return y, w.ravel()

    def near(self, x, deriv=0, times=None):
        """d_x^deriv of the evolved corner piece at points x, rows = time samples.

        At t = 0 derivatives are taken from the data side (exact at x = 0
        and wherever the corner cutoff is flat).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        tg = self.p.time
        idx = np.arange(tg.n) if times is None else np.atleast_1d(times)
        t = tg.t[idx]
        out = np.zeros((idx.size, x.size))
        if not np.any(self.p.u0):
            return out
        ymax = 2 * self.r
        svals = (tg.dt ** -0.2, max(tg.t[-1], tg.dt) ** -0.2)
        a, b = x.min() - ymax, x.max() + ymax
        zlo = min(a * sv for sv in svals) - 1
        zhi = max(b * sv for sv in svals) + 1
        tab = kernel_table(deriv, zlo, zhi)
        span = max(abs(x.min() - ymax), abs(x.max() + ymax))
        for row, tt in enumerate(t):
            if tt == 0:
                out[row] = self.corner(x, deriv) if deriv else self.corner(x)
                continue
            s = tt**-0.2
            y, w = self._nodes(span * s, s)
            q = w * self.corner(y)
            out[row] = s ** (1 + deriv) * (tab((x[:, None] - y[None, :]) * s) @ q)
        return out

    def traces(self, orders, x0=0.0):
        far = _origin_traces(self.far_rows(self.p.time.t), self.p.space, orders, x0)
        return [fj + self.near([x0], j)[:, 0] for j, fj in zip(orders, far)]

    def half_line(self):
        """Rows of exp(t d_x^5) E u0 on the half-line grid; the corner part is
        added for |x| <= field_extent (it is below table accuracy beyond on
        the right, and outside the reported window on the left)."""
        p = self.p
        idx = half_line_index(p.space, p.side)
        F = np.fft.ifft(self.far_rows(p.time.t), axis=1).real[:, idx]
        x = p.space.x[idx]
        m = _field_mask(x, self.cfg)
        F[:, m] += self.near(x[m])
        return F

    def at(self, x, t_index):
        """Values at arbitrary points x at one time sample."""
        tt = self.p.time.t[t_index]
        far = self.far_hat * np.exp(1j * tt * self.p.space.xi**5)
        E = np.exp(1j * np.outer(np.asarray(x) + self.p.space.L, self.p.space.xi))
        return np.real(E @ far) / self.p.space.N + self.near(x, times=[t_index])[0]


@lru_cache(maxsize=None)
def _gl8():
    return leggauss(8)


def _duhamel_rows(p, cfg, u_prev):
    """Spectral rows of -D(d_x (E u)^2) for the half-line iterate u_prev."""
    space, tg = p.space, p.time
    whole = _reflect_rows(u_prev, p.side, space, cfg.extension, cfg.extension_width)
    keep = np.abs(np.fft.fftfreq(space.N) * space.N) < space.N / 3
    sq = np.fft.fft(np.fft.ifft(np.fft.fft(whole, axis=1) * keep, axis=1).real ** 2, axis=1)
    w = np.fft.ifft(-1j * space.xi * keep * sq, axis=1).real
    return np.fft.fft(duhamel(Field2D(tg, space, w)).values, axis=1)


def _iterate(p, cfg, A, F_lin, tr_lin, u_prev, quadratic):
    """One application of the solution operator; returns (u_half, gammas)."""
    F = F_lin
    traces = tr_lin
    if quadratic and u_prev is not None:
        Dhat = _duhamel_rows(p, cfg, u_prev)
        traces = [a + b for a, b in zip(tr_lin, _origin_traces(Dhat, p.space, range(len(tr_lin))))]
        F = F_lin + np.fft.ifft(Dhat, axis=1).real[:, half_line_index(p.space, p.side)]
    gammas = solve_gammas(A, _boundary_rhs(p, traces))
    x = half_line_x(p.space, p.side)
    m = _field_mask(x, cfg)
    u = F.copy()
    u[:, m] += _forcing_sum(gammas, A.lambdas, p.side, x[m], cfg)
    return u * smooth_cutoff(p.time.t, cfg.cutoff_width)[:, None], gammas


def _l2_half(v, p):
    return float(np.sqrt(np.sum(v**2) * p.space.dx * p.time.dt))


def _check_horizon(p, cfg):
    if p.T > cfg.cutoff_width:
        raise ValueError(f"T = {p.T} exceeds the time cutoff width {cfg.cutoff_width}")


def _solve(p: IBVPProblem, cfg: SolverConfig, picard, quadratic=True):
    _check_horizon(p, cfg)
    validate_compatibility(p, cfg.compat_tol)
    A = _lambdas(p, cfg)
    ext = extend_initial_data(p.u0, p.side, p.space, cfg.extension, cfg.extension_width, p.s)
    free = FreeEvolution(p, cfg, ext.values)
    F_lin = free.half_line()
    tr_lin = free.traces(range(N_TRACES[p.side]))
    u, gammas = _iterate(p, cfg, A, F_lin, tr_lin, None, quadratic)
    history, ratios = [], []
    if picard:
        for _ in range(cfg.max_iter):
            u_new, gammas = _iterate(p, cfg, A, F_lin, tr_lin, u, quadratic)
            diff = _l2_half(u_new - u, p)
            history.append(diff)
            if len(history) > 1:
                ratios.append(diff / history[-2] if history[-2] > 0 else 0.0)
            u = u_new
            if diff <= cfg.picard_tol * max(_l2_half(u, p), 1e-300) or diff == 0.0:
                break
        else:
            grew = len(history) > 1 and history[-1] >= history[-2]
            raise DivergenceError(
                f"Picard iteration {'diverging' if grew else 'not converged'} after {cfg.max_iter} "
                f"iterations (last difference {history[-1]:.3e})",
                history,
            )
    x = half_line_x(p.space, p.side)
    m = _field_mask(x, cfg)
    field_u = HalfLineField(p.time, x[m], u[:, m])
    nonlinear = picard and quadratic
    bundle = SolutionBundle(p, cfg, field_u, A.lambdas, gammas, ext.values, tuple(history), tuple(ratios), nonlinear)
    checkpoints = np.unique(np.linspace(0, p.time.n - 1, 5).round().astype(int)[1:])
    wrap = free.wrap_error(checkpoints)
    if wrap > WRAP_WARNING:
        warnings.warn(
            f"periodic part changes by {wrap:.2e} (relative) when the grid is doubled; increase SpaceGrid.L",
            SeamWarning,
        )
    diag = {
        "lambdas": list(A.lambdas),
        "periodic_wrap_error": wrap,
        "boundary_det": A.determinant,
        "extension_norm_ratio": ext.norm_ratio,
        "trace_errors": trace_errors(bundle),
        "iterations": len(history) if picard else 1,
        "contraction_ratios": list(ratios),
    }
    if cfg.extension_sensitivity:
        other = "reflect2" if cfg.extension == "reflect3" else "reflect3"
        alt = _solve(p, replace(cfg, extension=other, extension_sensitivity=False), picard, quadratic)
        den = field_u.l2()
        diff = HalfLineField(p.time, field_u.x, field_u.values - alt.u.values).l2()
        diag["extension_sensitivity"] = {"other": other, "relative_l2_difference": diff / den if den else 0.0}
    object.__setattr__(bundle, "diagnostics", diag)
    return bundle


def solve_linear(p: IBVPProblem, cfg: SolverConfig | None = None) -> SolutionBundle:
    """u = sum L^{lam_i} gamma_i + exp(t d_x^5) E u0 with gamma matching the traces."""
    return _solve(p, cfg or SolverConfig(), picard=False)


def solve_nonlinear(p: IBVPProblem, cfg: SolverConfig | None = None, nonlinear=True) -> SolutionBundle:
    """Picard iteration of the solution operator from u = 0.

    Each sweep recomputes the whole-line Duhamel term from the extended
    iterate, re-reads its boundary traces and re-solves for gamma.  With
    ``nonlinear=False`` the quadratic term is dropped (linear consistency).
    """
    return _solve(p, cfg or SolverConfig(), picard=True, quadratic=nonlinear)


# -------------------------------------------------------------- diagnostics


def extract_traces(u: HalfLineField, side, orders=(0, 1, 2)):
    """One-sided five-point stencil traces d_x^j u(t, 0)."""
    x = u.x
    i0 = int(np.argmin(np.abs(x)))
    if abs(x[i0]) > 1e-12:
        raise ValueError("x = 0 is not on the field grid")
    dx = abs(x[1] - x[0])
    out = {}
    for j in orders:
        offs, w = _one_sided(side, j)
        cols = i0 + offs
        if cols.min() < 0 or cols.max() >= x.size:
            raise ResolutionError("not enough grid points next to x = 0")
        out[j] = u.values[:, cols] @ w / dx**j
    return out


def _analytic_traces(bundle, orders, x0=0.0):
    """d_x^j u(t, x0) from the derivative fields and the spectral part."""
    p, cfg = bundle.problem, bundle.config
    if bundle.nonlinear:
        raise ValueError("analytic traces are only assembled for linear solves")
    F = FreeEvolution(p, cfg, bundle.extended).traces(list(orders), x0)
    out = {}
    for j, Fj in zip(orders, F):
        out[j] = Fj + _forcing_sum(bundle.gammas, bundle.lambdas, p.side, [x0], cfg, deriv=j)[:, 0]
    return out


def trace_errors(bundle):
    p = bundle.problem
    stencil = extract_traces(bundle.u, p.side, range(N_TRACES[p.side]))
    out = {}
    for j, data in enumerate(p.boundary_data):
        ref = data.samples
        err = float(np.max(np.abs(stencil[j] - ref)))
        den = float(np.max(np.abs(ref)))
        out[f"d{j}_stencil_max_abs"] = err
        # zero boundary data: the relative error falls back to the absolute one
        out[f"d{j}_stencil_rel"] = err / den if den > 0 else err
    return out


def _window_energy(bundle, X, at_end):
    """int u^2 over the window between x = 0 and the far end (Gauss-Legendre panels)."""
    p, cfg = bundle.problem, bundle.config
    xg, wg = leggauss(10)
    edges = np.linspace(0, X, max(4, int(math.ceil(X / 0.5))) + 1)
    half = np.diff(edges) / 2
    xs = (((edges[:-1] + edges[1:]) / 2)[:, None] + half[:, None] * xg).ravel()
    ws = (half[:, None] * wg).ravel()
    if p.side == "left":
        xs = -xs
    free = FreeEvolution(p, cfg, bundle.extended)
    if at_end:
        n = p.time.n
        u = free.at(xs, n - 1) + _forcing_sum(bundle.gammas, bundle.lambdas, p.side, xs, cfg, times=[n - 1])[0]
    else:
        u = free.extension(xs)
    return float(ws @ u**2)


def _flux(tr):
    # d/dt int_a^b u^2 = [2 u u4 - 2 u1 u3 + u2^2]_a^b for u_t = u_xxxxx
    return 2 * tr[0] * tr[4] - 2 * tr[1] * tr[3] + tr[2] ** 2


def energy_identity_residual(bundle: SolutionBundle, side=None, window=None, details=False):
    """Relative residual of the energy identity of the linear equation.

    Right: int u^2(T) = int u0^2 + int_0^T (-2 u u4 + 2 u1 u3 - u2^2)(t, 0) dt,
    left with the opposite sign of the boundary flux (uj = d_x^j u).  The
    integrals run over the window between 0 and +-X (X = field extent by
    default); the flux through the far end is included and reported, and
    vanishes when the solution has not reached it.
    """
    p = bundle.problem
    side = side or p.side
    if side != p.side:
        raise ValueError("side does not match the solved problem")
    if bundle.nonlinear:
        raise ValueError("the energy identity is checked for linear solves")
    if p.time.n < 9:
        raise ResolutionError("need at least 9 time samples for fourth-order trace derivatives")
    zero = {"residual": 0.0, "far_flux": 0.0, "boundary_flux": 0.0}
    if not np.any(bundle.extended) and not any(np.any(g.samples) for g in bundle.gammas):
        return zero if details else 0.0
    X = min(window or bundle.config.field_extent, bundle.config.field_extent, p.space.L / 2)
    far = X if side == "right" else -X
    try:
        near_tr = _analytic_traces(bundle, range(5))
        far_tr = _analytic_traces(bundle, range(5), far)
    except GridTooSmallError as exc:
        raise ResolutionError(str(exc)) from exc
    t = p.time.t
    sgn = -1.0 if side == "right" else 1.0  # the window is [0, X] on the right, [-X, 0] on the left
    near = sgn * float(simpson(_flux(near_tr), x=t))
    farf = -sgn * float(simpson(_flux(far_tr), x=t))
    babs = sum(
        float(simpson(np.abs(v), x=t))
        for tr in (near_tr, far_tr)
        for v in (2 * tr[0] * tr[4], 2 * tr[1] * tr[3], tr[2] ** 2)
    )
    e0 = _window_energy(bundle, X, at_end=False)
    e1 = _window_energy(bundle, X, at_end=True)
    den = e0 + e1 + babs
    if not np.isfinite(den + near + farf):
        raise ResolutionError("non-finite trace or energy in the energy identity")
    res = abs(e1 - e0 - near - farf) / den if den > 0 else 0.0
    if details:
        return {"residual": res, "far_flux": farf, "boundary_flux": near, "energy_0": e0, "energy_T": e1}
    return res


# ------------------------------------------------------------------ scaling


def _scaled_signal(sig, lam, power):
    if sig is None:
        return None
    return CausalSignal(TimeGrid(sig.grid.dt / lam**5, sig.grid.n), lam**power * sig.samples)


def scaling_norm_factors(lam, s):
    """Norm multipliers of the scaled data u0, f, g, h (upper bounds)."""
    br = math.sqrt(1 + lam**2)
    return {
        "u0": lam**3.5 * br**s,
        "f": lam**1.5 * br ** (s + 2),
        "g": lam**2.5 * br ** (s + 1),
        "h": lam**3.5 * br**s,
    }


def scale(obj, lam):
    """u_lam(t, x) = lam^4 u(lam^5 t, lam x) applied to a problem, field or bundle.

    Samples are kept and the grids are relabelled: dx -> dx/lam,
    dt -> dt/lam^5.  Boundary signals pick up lam^4, lam^5, lam^6.
    """
    if not lam > 0:
        raise ValueError("scaling factor must be positive")
    if lam == 1:
        return obj
    if isinstance(obj, IBVPProblem):
        space = SpaceGrid(obj.space.L / lam, obj.space.N)
        return IBVPProblem(
            obj.side,
            space,
            lam**4 * obj.u0,
            _scaled_signal(obj.f, lam, 4),
            _scaled_signal(obj.g, lam, 5),
            _scaled_signal(obj.h, lam, 6),
            obj.s,
        )
    if isinstance(obj, HalfLineField):
        return HalfLineField(TimeGrid(obj.time.dt / lam**5, obj.time.n), obj.x / lam, lam**4 * obj.values)
    if isinstance(obj, Field2D):
        return Field2D(
            TimeGrid(obj.time.dt / lam**5, obj.time.n),
            SpaceGrid(obj.space.L / lam, obj.space.N),
            lam**4 * obj.values,
        )
    if isinstance(obj, SolutionBundle):
        p = scale(obj.problem, lam)
        u = scale(obj.u, lam)
        gam = tuple(CausalSignal(TimeGrid(g.grid.dt / lam**5, g.grid.n), g.samples) for g in obj.gammas)
        diag = dict(obj.diagnostics, scaled_by=lam)
        return replace(obj, problem=p, u=u, gammas=gam, extended=lam**4 * obj.extended, diagnostics=diag)
    raise TypeError(f"cannot scale {type(obj).__name__}")


# ------------------------------------------------ left-side vanishing traces


def vanishing_trace_solution(grid: TimeGrid, x, lambdas=None, profile=None, cfg=None):
    """Nonzero left-side linear solution with u(t,0) = u_x(t,0) = 0 and u(0) = 0.

    gamma_i = v_i profile(t) with v spanning the null space of the first two
    rows of the left boundary matrix; returns (HalfLineField, gammas, v).
    """
    cfg = cfg or SolverConfig()
    lams = lambdas or default_lambdas("left")
    A = assemble_boundary_matrix(lams, "left")
    _, _, vt = np.linalg.svd(A.entries[:2])
    v = vt[-1]
    prof = CausalSignal.from_function(grid, profile or (lambda t: t**4))
    gammas = tuple(prof.scaled(vi) for vi in v)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals = _forcing_sum(gammas, A.lambdas, "left", x, cfg)
    return HalfLineField(grid, x, vals), gammas, v
