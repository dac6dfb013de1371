"""Empirical measurements in Fourier restriction (Bourgain) spaces.

Everything here measures; nothing certifies an inequality.  Fourier
transforms follow  f~(tau, xi) = int e^{-i(t tau + x xi)} f dt dx  with
Plancherel  ||f||^2 = (2 pi)^{-2} ||f~||^2, so a free wave e^{i(k x + k^5 t)}
sits on tau = xi^5.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .forcing import smooth_cutoff
from .fractional import GridTooSmallError

__all__ = [
    "PhaseGrid",
    "NormParams",
    "BlockFunction",
    "SupportError",
    "ProbeConfig",
    "resonance",
    "resonance_factored",
    "resonance_check",
    "time_window",
    "space_norms",
    "modulation_profile",
    "dyadic_box",
    "block_J",
    "stress_ratio",
    "block_samples",
    "block_regressions",
    "bilinear_probe",
    "default_jobs",
]


class SupportError(ValueError):
    """A sampled function touches the edge of its lattice."""


def default_jobs():
    env = os.environ.get("KAWAHARA_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


# ------------------------------------------------------------------ resonance


def resonance(xi1, xi2):
    """(xi1 + xi2)^5 - xi1^5 - xi2^5."""
    xi1, xi2 = np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float)
    return (xi1 + xi2) ** 5 - xi1**5 - xi2**5


def resonance_factored(xi1, xi2):
    xi1, xi2 = np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float)
    xi3 = xi1 + xi2
    return 2.5 * xi1 * xi2 * xi3 * (xi1**2 + xi2**2 + xi3**2)


def resonance_check(samples=100_000, seed=0, scale=10.0):
    """Largest |expanded - factored| over random pairs, in units of eps * scale,
    where scale = |xi1 + xi2|^5 + |xi1|^5 + |xi2|^5 bounds the rounding."""
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-scale, scale, (2, samples))
    diff = np.abs(resonance(a, b) - resonance_factored(a, b))
    size = np.abs(a + b) ** 5 + np.abs(a) ** 5 + np.abs(b) ** 5
    worst = float(np.max(diff / (np.finfo(float).eps * size)))
    return {"samples": samples, "seed": seed, "max_error_in_eps_scale": worst}


# ------------------------------------------------------------------ norms


@dataclass(frozen=True)
class PhaseGrid:
    """Periodic sampling of (t, x) in [-T, T) x [-L, L); sizes are powers of two."""

    nt: int = 512
    nx: int = 128
    T: float = 4.0
    L: float = 8 * math.pi

    def __post_init__(self):
        for n in (self.nt, self.nx):
            if n < 2 or n & (n - 1):
                raise ValueError(f"grid sizes must be powers of two, got {n}")
        if self.T <= 2.0:
            raise ValueError("time extent must exceed the support [-2, 2] of the window")
        if self.L <= 0:
            raise ValueError("space extent must be positive")

    @property
    def dt(self):
        return 2 * self.T / self.nt

    @property
    def dx(self):
        return 2 * self.L / self.nx

    @property
    def t(self):
        return -self.T + self.dt * np.arange(self.nt)

    @property
    def x(self):
        return -self.L + self.dx * np.arange(self.nx)

    @property
    def tau(self):
        return 2 * np.pi * np.fft.fftfreq(self.nt, self.dt)

    @property
    def xi(self):
        return 2 * np.pi * np.fft.fftfreq(self.nx, self.dx)

    @property
    def xi_max(self):
        return math.pi / self.dx

    @property
    def tau_max(self):
        return math.pi / self.dt


@dataclass(frozen=True)
class NormParams:
    s: float = 0.0
    b: float = 0.45
    alpha: float = 0.55

    def solver_regime(self):
        """True when b < 1/2 < alpha (the regime the solver works in)."""
        return self.b < 0.5 < self.alpha


def time_window(t):
    """psi: 1 on |t| <= 1, 0 on |t| >= 2."""
    return smooth_cutoff(t, 1.0)


def _bracket(z):
    return np.sqrt(1.0 + np.asarray(z, dtype=float) ** 2)


def _dyadic_pieces(z, kmax):
    """chi_0 .. chi_kmax evaluated at z (inhomogeneous dyadic partition)."""
    z = np.abs(np.asarray(z, dtype=float))
    eta = [smooth_cutoff(z / 2.0**k, 1.0) for k in range(kmax + 1)]
    return [eta[0]] + [eta[k] - eta[k - 1] for k in range(1, kmax + 1)]


def _shells_needed(zmax):
    return max(1, int(math.ceil(math.log2(max(zmax, 1.0)))) + 1)


def _spectrum_sq(F, grid):
    """|f~|^2 with the Plancherel factor folded in (sums to ||F||^2)."""
    F = np.asarray(F)
    if F.shape != (grid.nt, grid.nx):
        raise ValueError(f"field shape {F.shape} does not match grid {(grid.nt, grid.nx)}")
    Fh = np.fft.fft2(F)
    return np.abs(Fh) ** 2 * grid.dt * grid.dx / (grid.nt * grid.nx)


def space_norms(F, grid: PhaseGrid, p: NormParams, shells=None):
    """X^{s,b}, Y^{s,b}, D^alpha norms of a windowed field sampled on ``grid``.

    Also returns the dyadic-sum version of X^{s,b} and the X^{0,alpha} norm of
    the sharp |xi| <= 1 projection (the low-frequency comparison for D).
    ``shells = (kmax, jmax)`` fixes the dyadic range; by default it covers the grid.
    """
    S = _spectrum_sq(F, grid)
    tau, xi = grid.tau[:, None], grid.xi[None, :]
    sigma = tau - xi**5
    bx, bs = _bracket(xi), _bracket(sigma)
    X2 = np.sum(bx ** (2 * p.s) * bs ** (2 * p.b) * S)
    Y2 = np.sum(_bracket(tau) ** (2 * p.s / 5) * bs ** (2 * p.b) * S)
    low = np.abs(xi) <= 1.0
    D2 = np.sum(_bracket(tau) ** (2 * p.alpha) * low * S)
    P0 = np.sum(bs ** (2 * p.alpha) * low * S)

    kneed = _shells_needed(grid.xi_max)
    jneed = _shells_needed(float(np.max(np.abs(sigma))))
    if shells is None:
        kmax, jmax = kneed, jneed
    else:
        kmax, jmax = shells
        if 2.0 ** (kmax - 1) > grid.xi_max:
            raise GridTooSmallError(
                f"frequency shell k={kmax} lies beyond the grid Nyquist {grid.xi_max:.3g}"
            )
        if 2.0 ** (jmax - 1) > float(np.max(np.abs(sigma))):
            raise GridTooSmallError(f"modulation shell j={jmax} lies beyond the sampled modulations")
    wk = sum(2.0 ** (2 * p.s * k) * c**2 for k, c in enumerate(_dyadic_pieces(xi, kmax)))
    wj = sum(2.0 ** (2 * p.b * j) * c**2 for j, c in enumerate(_dyadic_pieces(sigma, jmax)))
    Xd2 = np.sum(wk * wj * S)
    return {
        "X": float(np.sqrt(X2)),
        "Y": float(np.sqrt(Y2)),
        "D": float(np.sqrt(D2)),
        "X_dyadic": float(np.sqrt(Xd2)),
        "X0alpha_low": float(np.sqrt(P0)),
    }


def modulation_profile(F, grid: PhaseGrid, p: NormParams):
    """Share of the dyadic X^{s,b} mass  sum_k 2^{2sk} 2^{2bj} ||chi_k eta_j f~||^2
    in each modulation shell j (sums to 1)."""
    S = _spectrum_sq(F, grid)
    sigma = grid.tau[:, None] - grid.xi[None, :] ** 5
    xi = grid.xi[None, :]
    wk = sum(2.0 ** (2 * p.s * k) * c**2 for k, c in enumerate(_dyadic_pieces(xi, _shells_needed(grid.xi_max))))
    pieces = _dyadic_pieces(sigma, _shells_needed(float(np.max(np.abs(sigma)))))
    mass = np.array([2.0 ** (2 * p.b * j) * np.sum(wk * c**2 * S) for j, c in enumerate(pieces)])
    tot = mass.sum()
    return mass / tot if tot > 0 else mass


# ------------------------------------------------------------------ block functional


@dataclass(frozen=True)
class BlockFunction:
    """f(zeta, xi) on the lattice xi = delta * (m0 + i), piecewise constant in zeta.

    ``values[i, c]`` is the value on the zeta cell [edges[c], edges[c + 1]].
    """

    delta: float
    m0: int
    values: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        e = np.asarray(self.edges, dtype=float)
        if v.ndim != 2 or e.shape != (v.shape[1] + 1,):
            raise ValueError("values must be (n_xi, n_cells) with n_cells + 1 edges")
        if np.any(np.diff(e) <= 0):
            raise ValueError("zeta cell edges must increase")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "edges", e)

    @property
    def xi(self):
        return self.delta * (self.m0 + np.arange(self.values.shape[0]))

    def l2(self):
        return float(np.sqrt(self.delta * np.sum(self.values**2 * np.diff(self.edges))))

    def tilde(self):
        """f(-zeta, -xi)."""
        n = self.values.shape[0]
        return BlockFunction(self.delta, -(self.m0 + n - 1), self.values[::-1, ::-1], -self.edges[::-1])

    def check_support(self):
        if np.any(self.values[0]) or np.any(self.values[-1]):
            raise SupportError("function is nonzero on the boundary rows of its lattice")


def dyadic_interval(j):
    """Cells of I_j: [-2, 2] for j = 0, +-[2^{j-1}, 2^{j+1}] otherwise."""
    if j == 0:
        return np.array([-2.0, 2.0]), np.array([1.0])
    a, b = 2.0 ** (j - 1), 2.0 ** (j + 1)
    return np.array([-b, -a, a, b]), np.array([1.0, 0.0, 1.0])


def dyadic_box(k, j, delta, sign=1, xi_range=None):
    """Indicator of sign * [2^{k-1}, 2^{k+1}] (in xi) times I_j (in zeta).

    Lattice points on the xi edges get the value 1/2; one zero row pads each end.
    """
    lo, hi = xi_range if xi_range is not None else (2.0 ** (k - 1), 2.0**k * 2)
    if sign < 0:
        lo, hi = -hi, -lo
    mlo, mhi = int(math.ceil(lo / delta - 1e-9)), int(math.floor(hi / delta + 1e-9))
    m = np.arange(mlo - 1, mhi + 2)
    w = ((m >= mlo) & (m <= mhi)).astype(float)
    w[np.isclose(m * delta, lo)] = 0.5
    w[np.isclose(m * delta, hi)] = 0.5
    edges, cells = dyadic_interval(j)
    return BlockFunction(delta, int(m[0]), np.outer(w, cells), edges)


def _overlap_integral(a1, b1, a2, b2, a3, b3, c):
    """Measure of {z1 in [a1,b1], z2 in [a2,b2], z1 + z2 + c in [a3,b3]} (broadcast)."""
    w3 = b3 - a3
    # p = a3 - c - z1 runs over [a3 - c - b1, a3 - c - a1]; overlap(p) = |[a2,b2] & [p, p + w3]|
    p_lo = np.maximum(a3 - c - b1, a2 - w3)
    p_hi = np.minimum(a3 - c - a1, b2)
    ok = p_hi > p_lo

    def R(z):
        z = np.maximum(z, 0.0)
        return 0.5 * z * z

    out = 0.0
    for e, sgn in ((a2 - w3, 1.0), (a2, -1.0), (b2 - w3, -1.0), (b2, 1.0)):
        out = out + sgn * (R(p_hi - e) - R(p_lo - e))
    return np.where(ok, out, 0.0)


def block_J(f: BlockFunction, g: BlockFunction, h: BlockFunction):
    """J(f, g, h) = int f(z1, x1) g(z2, x2) h(z1 + z2 + H(x1, x2), x1 + x2).

    Trapezoid-type lattice sum in (x1, x2) (all three functions share one
    lattice, so x1 + x2 stays on it) and exact integration in (z1, z2).
    The lattice map (x1, x2) -> (-x2, x1 + x2) is a bijection, so the
    symmetries of J hold to rounding.
    """
    if not (f.delta == g.delta == h.delta):
        raise ValueError("block functions must share the xi lattice spacing")
    for q in (f, g, h):
        q.check_support()
    d = f.delta
    nz_f = np.flatnonzero(np.any(f.values != 0, axis=1))
    nz_g = np.flatnonzero(np.any(g.values != 0, axis=1))
    if nz_f.size == 0 or nz_g.size == 0 or not np.any(h.values):
        return 0.0
    a1, b1 = f.edges[:-1], f.edges[1:]
    a2, b2 = g.edges[:-1], g.edges[1:]
    a3, b3 = h.edges[:-1], h.edges[1:]
    # broadcast shape (n2, c1, c2, c3)
    A1, B1 = a1[None, :, None, None], b1[None, :, None, None]
    A2, B2 = a2[None, None, :, None], b2[None, None, :, None]
    A3, B3 = a3[None, None, None, :], b3[None, None, None, :]
    total = 0.0
    nh = h.values.shape[0]
    for i in nz_f:
        m1 = f.m0 + i
        m3 = m1 + g.m0 + nz_g - h.m0
        keep = (m3 >= 0) & (m3 < nh)
        if not np.any(keep):
            continue
        rows_g, rows_h = nz_g[keep], m3[keep]
        hv = h.values[rows_h]
        live = np.any(hv != 0, axis=1)
        if not np.any(live):
            continue
        rows_g, hv = rows_g[live], hv[live]
        x1 = m1 * d
        x2 = (g.m0 + rows_g) * d
        c = resonance(x1, x2)[:, None, None, None]
        vol = _overlap_integral(A1, B1, A2, B2, A3, B3, c)
        wts = f.values[i][None, :, None, None] * g.values[rows_g][:, None, :, None] * hv[:, None, None, :]
        total += float(np.sum(wts * vol))
    return total * d * d


# ------------------------------------------------------------------ Lemma-type block samples


def _sample_boxes(rng, kmin=-1, kmax=4, jcap=8):
    """Random dyadic boxes (k_i, j_i, sign_i) arranged so that J is usually nonzero."""
    while True:
        k1, k2 = rng.integers(kmin, kmax + 1, 2)
        s1, s2 = rng.choice([-1, 1], 2)
        x1 = s1 * 2.0 ** (k1 + rng.uniform(-0.9, 0.9))
        x2 = s2 * 2.0 ** (k2 + rng.uniform(-0.9, 0.9))
        x3 = x1 + x2
        if abs(x3) < 2.0 ** (kmin - 1):
            continue
        k3 = int(round(math.log2(abs(x3))))
        j1, j2 = rng.integers(0, jcap + 1, 2)
        Hr = abs(float(resonance(x1, x2)))
        base = max(Hr, 2.0 ** max(j1, j2))
        j3 = max(0, int(round(math.log2(base))) + int(rng.integers(-1, 2)))
        return (int(k1), int(k2), k3), (int(j1), int(j2), j3), (int(s1), int(s2), int(np.sign(x3)))


def _block_sample(args):
    seed, index, kmin, kmax, jcap, per_octave = args
    rng = np.random.default_rng([seed, index])
    ks, js, signs = _sample_boxes(rng, kmin, kmax, jcap)
    delta = 2.0 ** min(ks) / per_octave
    fs = [dyadic_box(k, j, delta, sg) for k, j, sg in zip(ks, js, signs)]
    J = block_J(*fs)
    norms = [q.l2() for q in fs]
    return {"index": index, "k": list(ks), "j": list(js), "sign": list(signs), "J": J, "norms": norms}


def _lemma_constants(rec):
    """J divided by the three block bounds (None where a bound does not apply)."""
    k, j = sorted(rec["k"]), sorted(rec["j"])
    prod = float(np.prod(rec["norms"]))
    J = rec["J"]
    out = {"c": J / (2 ** (j[0] / 2) * 2 ** (k[0] / 2) * prod)}
    out["a"] = J / (2 ** (j[0] / 2) * 2 ** (j[1] / 4) * 2 ** (-0.75 * k[2]) * prod) if k[2] - k[0] <= 5 else None
    if k[1] - k[0] >= 3:
        jsum = sum(rec["j"])
        bound = min(
            2 ** (jsum / 2) * 2 ** (-1.5 * k[2]) * 2 ** (-(ki + ji) / 2) * prod for ki, ji in zip(rec["k"], rec["j"])
        )
        out["b"] = J / bound
    else:
        out["b"] = None
    return out


def block_samples(samples=200, seed=0, kmin=-1, kmax=4, jcap=8, per_octave=16, jobs=None):
    """Seeded dyadic-indicator samples of J with the Lemma-type constants."""
    args = [(seed, i, kmin, kmax, jcap, per_octave) for i in range(samples)]
    with ThreadPoolExecutor(max_workers=jobs or default_jobs()) as ex:
        recs = list(ex.map(_block_sample, args))
    recs.sort(key=lambda r: r["index"])
    for r in recs:
        r["constants"] = _lemma_constants(r)
    return recs


CLAIMED = {
    "a": {"j_min": 0.5, "j_med": 0.25, "k_max": -0.75},
    "b": {},
    "c": {"j_min": 0.5, "k_min": 0.5},
}
_REGRESSORS = ("j_min", "j_med", "j_max", "k_min", "k_med", "k_max")


def block_regressions(recs):
    """Least-squares exponents of log2(J / prod ||f_i||) on the sorted (j, k) indices,
    per lemma part, over samples where that bound applies and J > 0."""
    rows = []
    for part in ("a", "b", "c"):
        use = [r for r in recs if r["J"] > 0 and r["constants"][part] is not None]
        consts = np.array([r["constants"][part] for r in use])
        if len(use) < len(_REGRESSORS) + 2:
            rows.append({"part": part, "regressor": "samples", "fitted": float(len(use)), "claimed": None})
            continue
        A = np.array([[1.0, *sorted(r["j"]), *sorted(r["k"])] for r in use])
        y = np.log2([r["J"] / np.prod(r["norms"]) for r in use])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        rows.append({"part": part, "regressor": "intercept", "fitted": float(coef[0]), "claimed": None})
        for name, cf in zip(_REGRESSORS, coef[1:]):
            rows.append({"part": part, "regressor": name, "fitted": float(cf), "claimed": CLAIMED[part].get(name)})
        rows.append({"part": part, "regressor": "samples", "fitted": float(len(use)), "claimed": None})
        rows.append({"part": part, "regressor": "max_constant", "fitted": float(consts.max()), "claimed": None})
    return rows


def constant_growth(recs, part="c"):
    """Upper envelope of the part's constant against the block scale.

    Returns the max constant over the lower and upper halves of the samples
    ordered by scale k_max + j_max, and the slope of log2(constant) on that scale.
    """
    use = [r for r in recs if r["J"] > 0 and r["constants"][part] is not None]
    scale = np.array([max(r["k"]) + max(r["j"]) for r in use], dtype=float)
    C = np.array([r["constants"][part] for r in use])
    order = np.argsort(scale, kind="stable")
    half = len(order) // 2
    slope = float(np.polyfit(scale, np.log2(C), 1)[0]) if len(use) > 2 else float("nan")
    return {
        "samples": len(use),
        "max": float(C.max()) if C.size else float("nan"),
        "max_lower_half": float(C[order[:half]].max()) if half else float("nan"),
        "max_upper_half": float(C[order[half:]].max()) if half else float("nan"),
        "log2_slope": slope,
    }


# ------------------------------------------------------------------ bilinear ratios


@dataclass(frozen=True)
class ProbeConfig:
    samples: int = 100
    seed: int = 0
    grid: PhaseGrid = field(default_factory=PhaseGrid)
    band: float = 2.0  # |xi| cut of the random fields
    modulation_band: float = 8.0  # |tau - xi^5| cut of the random fields
    stress_ks: tuple = (4, 5, 6, 7, 8)
    stress_s: tuple = (-1.7, -2.2)
    stress_width: float = 1.0
    lemma_samples: int = 200
    jobs: int | None = None


def _random_field(rng, grid: PhaseGrid, band, mband):
    tau, xi = grid.tau[:, None], grid.xi[None, :]
    sigma = tau - xi**5
    mask = (np.abs(xi) <= band) & (np.abs(sigma) <= mband)
    coef = (rng.standard_normal(mask.shape) + 1j * rng.standard_normal(mask.shape)) * mask / _bracket(sigma)
    u = np.fft.ifft2(coef).real
    u = u / max(np.max(np.abs(u)), 1e-300)
    return u * time_window(grid.t)[:, None]


def _ensemble_member(args):
    p, cfg, index = args
    grid = cfg.grid
    rng = np.random.default_rng([cfg.seed, index])
    u = _random_field(rng, grid, cfg.band, cfg.modulation_band)
    v = _random_field(rng, grid, cfg.band, cfg.modulation_band)
    w = np.fft.ifft(1j * grid.xi[None, :] * np.fft.fft(u * v, axis=1), axis=1).real
    dual = NormParams(p.s, -p.b, p.alpha)
    nw = space_norms(w, grid, dual)
    nu, nv = space_norms(u, grid, p), space_norms(v, grid, p)
    num = nw["X"] + nw["Y"]
    den = (nu["X"] + nu["D"]) * (nv["X"] + nv["D"])
    dy = [nu["X_dyadic"] / nu["X"], nv["X_dyadic"] / nv["X"]]
    return {"index": index, "ratio": num / den, "dyadic_ratios": dy}


def _bump(z):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inside = np.abs(z) < 1
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


def _window_weight(b, nt=8192, T=16.0):
    """(2 pi)^{-1} int <sigma>^{2b} |psi^(sigma)|^2 d sigma."""
    dt = 2 * T / nt
    t = -T + dt * np.arange(nt)
    sig = 2 * np.pi * np.fft.fftfreq(nt, dt)
    P = np.abs(np.fft.fft(time_window(t))) ** 2
    return float(np.sum(_bracket(sig) ** (2 * b) * P) * dt / nt)


def _gl_panels(lo, hi, panels, q=16):
    x, w = leggauss(q)
    e = np.linspace(lo, hi, panels + 1)
    h = np.diff(e) / 2
    return ((e[:-1] + e[1:]) / 2 + h * x[:, None]).T.ravel(), (h * w[:, None]).T.ravel()


def stress_ratio(p: NormParams, k, width=1.0, panels=24):
    """Bilinear ratio for the high x high => low family.

    u, v are windowed free waves whose spectra are bumps of half-width
    ``width`` at +2^k and -2^k; d_x(uv) then lives near xi = 0 at modulation
    sigma = -H(xi1, xi2).  Its X^{s,-b} and Y^{s,-b} norms are evaluated by
    the large-modulation reduction
        int <sigma>^{-2b} |(uv)~|^2 d sigma  ->  int <H>^{-2b} |u^ v^|^2 / |d_xi1 H| d xi1,
    whose relative error is O((width |d_xi1 H|)^{-2}); the denominator
    norms are exact (D^alpha vanishes since both spectra avoid |xi| <= 1).
    """
    c = 2.0**k
    if c - width <= 1.0:
        raise ValueError("stress shells must avoid |xi| <= 1")
    x1, w1 = _gl_panels(c - width, c + width, panels)
    xs = []
    for lo, hi in ((-2 * width, 0.0), (0.0, 2 * width)):
        xs.append(_gl_panels(lo, hi, panels))
    xo = np.concatenate([a for a, _ in xs])
    wo = np.concatenate([b for _, b in xs])
    X1, XO = np.meshgrid(x1, xo, indexing="ij")
    W = np.outer(w1, wo)
    X2 = XO - X1
    amp = (_bump((X1 - c) / width) * _bump((X2 + c) / width)) ** 2
    Hm = resonance(X1, X2)
    dH = 5 * np.abs(X1**4 - X2**4)
    base = np.where(amp > 0, XO**2 * amp * _bracket(Hm) ** (-2 * p.b) / np.maximum(dH, 1e-300), 0.0)
    nx2 = np.sum(W * base * _bracket(XO) ** (2 * p.s)) / (2 * np.pi) ** 2
    ny2 = np.sum(W * base * _bracket(X1**5 + X2**5) ** (2 * p.s / 5)) / (2 * np.pi) ** 2
    xg, wg = _gl_panels(c - width, c + width, panels)
    spec = float(np.sum(wg * _bracket(xg) ** (2 * p.s) * _bump((xg - c) / width) ** 2)) / (2 * np.pi)
    un = math.sqrt(spec * _window_weight(p.b))
    return {"k": int(k), "numerator": math.sqrt(nx2) + math.sqrt(ny2), "u_norm": un, "ratio": (math.sqrt(nx2) + math.sqrt(ny2)) / un**2}


def _summary(values):
    v = np.asarray(values, dtype=float)
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"min": float(q[0]), "q25": float(q[1]), "median": float(q[2]), "q75": float(q[3]), "max": float(q[4])}


def bilinear_probe(p: NormParams, cfg: ProbeConfig | None = None):
    """Ensemble of ||d_x(uv)||_{X^{s,-b} & Y^{s,-b}} / (||u||_{X^{s,b} & D^a} ||v||_{X^{s,b} & D^a}),
    the stress family, and Lemma-type block constants.  Fully determined by the seed."""
    cfg = cfg or ProbeConfig()
    jobs = cfg.jobs or default_jobs()
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        members = list(ex.map(_ensemble_member, [(p, cfg, i) for i in range(cfg.samples)]))
    members.sort(key=lambda r: r["index"])
    ratios = [m["ratio"] for m in members]
    dyadic = [d for m in members for d in m["dyadic_ratios"]]
    stress = {
        str(s): [stress_ratio(NormParams(s, p.b, p.alpha), k, cfg.stress_width) for k in cfg.stress_ks]
        for s in cfg.stress_s
    }
    blocks = block_samples(cfg.lemma_samples, cfg.seed, jobs=jobs) if cfg.lemma_samples else []
    cfg_dict = asdict(cfg)
    cfg_dict["stress_ks"] = list(cfg.stress_ks)
    cfg_dict["stress_s"] = list(cfg.stress_s)
    return {
        "params": asdict(p),
        "config": cfg_dict,
        "ensemble": {"ratios": ratios, "summary": _summary(ratios) if ratios else None},
        "dyadic_equivalence": _summary(dyadic) if dyadic else None,
        "stress": stress,
        "blocks": {
            "samples": len(blocks),
            "nonzero": sum(r["J"] > 0 for r in blocks),
            "growth_c": constant_growth(blocks, "c") if blocks else None,
            "regressions": block_regressions(blocks) if blocks else [],
        },
    }
