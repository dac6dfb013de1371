"""Riemann-Liouville fractional integrals and derivatives of causal signals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import oaconvolve
from scipy.special import gamma

__all__ = [
    "TimeGrid",
    "CausalSignal",
    "GridTooSmallError",
    "fractional_integral",
    "fd_weights",
    "time_derivative",
    "product_weights",
    "fractional_columns",
]


class GridTooSmallError(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    n: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n < 2:
            raise ValueError("a time grid needs at least 2 samples")

    @property
    def t(self):
        return self.dt * np.arange(self.n)

    @property
    def T(self):
        return self.dt * (self.n - 1)

    @classmethod
    def covering(cls, T, n):
        """n samples on [0, T]."""
        return cls(T / (n - 1), n)


@dataclass(frozen=True)
class CausalSignal:
    """Samples on t = 0, dt, ..., vanishing for t < 0 by convention."""

    grid: TimeGrid
    samples: np.ndarray
    low_confidence: tuple = field(default=())

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, np.asarray(fn(grid.t), dtype=float))

    @property
    def t(self):
        return self.grid.t

    def __add__(self, other):
        return CausalSignal(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        return CausalSignal(self.grid, self.samples - other.samples)

    def scaled(self, c):
        return CausalSignal(self.grid, c * self.samples)


@lru_cache(maxsize=64)
def product_weights(alpha, n):
    """Toeplitz part of piecewise-linear product integration for I_alpha.

    I_alpha f(t_m) ~ dt^alpha/Gamma(alpha+2) * (sum_j w[m-j] f_j + e[m] f_0)
    where w[k] = (k+1)^(a+1) - 2k^(a+1) + (k-1)^(a+1) for k >= 1, w[0] = 1,
    and e corrects the first node (half hat).
    """
    a1 = alpha + 1.0
    k = np.arange(n, dtype=float)
    w = np.empty(n)
    w[0] = 1.0
    if n > 1:
        kk = k[1:]
        w[1:] = (kk + 1) ** a1 - 2 * kk**a1 + (kk - 1) ** a1
    # exact first-node weight minus the Toeplitz value it replaced
    m = k[1:]
    first = (m - 1) ** a1 - (m - alpha - 1) * m**alpha
    e = np.zeros(n)
    e[1:] = first - w[1:]
    w.setflags(write=False)
    e.setflags(write=False)
    return w, e


def _integral_positive(f, dt, alpha):
    """Product integration along axis 0 (1-D signals or columns of a 2-D array)."""
    n = f.shape[0]
    w, e = product_weights(float(alpha), n)
    if f.ndim == 2:
        w2 = w[:, None]
    else:
        w2 = w
    conv = oaconvolve(f, w2, axes=0)[:n] if n > 64 else _direct_conv(f, w2, n)
    out = conv + np.multiply.outer(e, f[0]) if f.ndim == 2 else conv + e * f[0]
    out[0] = 0.0
    return out * dt**alpha / gamma(alpha + 2)


def _direct_conv(f, w, n):
    out = np.zeros(f.shape)
    for k in range(n):
        out[k:] += w[k] * f[: n - k]
    return out


def fd_weights(offsets, order):
    """Finite-difference weights for the given derivative order at offset 0."""
    offs = np.asarray(offsets, dtype=float)
    m = offs.size
    A = np.vander(offs, m, increasing=True).T
    b = np.zeros(m)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


_CENTERED = {1: [-2, -1, 0, 1, 2], 2: [-2, -1, 0, 1, 2], 3: [-3, -2, -1, 0, 1, 2, 3]}


def time_derivative(f, dt, order):
    """order-th derivative of causal samples along axis 0.

    Centered 4th-order stencils, with the causal zero extension on the left
    end and one-sided 4th-order stencils on the right end.
    """
    if order == 0:
        return np.array(f, dtype=float)
    if order not in _CENTERED:
        raise ValueError("derivative order must be 1, 2 or 3")
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    offs = _CENTERED[order]
    h = max(-offs[0], offs[-1])
    width = order + 4
    if n < width + 1:
        raise GridTooSmallError(f"need at least {width + 1} samples for order {order}")
    zeros = np.zeros((h,) + f.shape[1:])
    pad = np.concatenate([zeros, f, zeros])
    cw = fd_weights(offs, order)
    out = np.zeros(f.shape)
    for c, o in zip(cw, offs):
        out += c * pad[h + o : h + o + n]
    # right end: one-sided stencils
    for i in range(n - h, n):
        last = n - 1 - i
        back = np.arange(last - width + 1, last + 1)
        out[i] = fd_weights(back, order) @ f[i + back]
    return out / dt**order


def fractional_columns(F, dt, alpha):
    """I_alpha applied along axis 0 of a sample array (same rules as fractional_integral)."""
    F = np.asarray(F, dtype=float)
    alpha = float(alpha)
    if not -3 < alpha <= 3:
        raise ValueError(f"order {alpha} outside (-3, 3]")
    if alpha == 0:
        return F.copy()
    if alpha > 0:
        return _integral_positive(F, dt, alpha)
    k = math.ceil(-alpha)
    a_pos = alpha + k
    if a_pos <= 1e-14:
        # integer order: d/dt I_1 is the identity, so differentiate directly
        return time_derivative(F, dt, k)
    return time_derivative(_integral_positive(F, dt, a_pos), dt, k)


def fractional_integral(f: CausalSignal, alpha: float) -> CausalSignal:
    """I_alpha f for alpha in (-3, 3].

    alpha > 0: product integration; alpha = 0: identity; alpha < 0: k-th
    derivative of I_{alpha+k} f with alpha + k in (0, 1].
    """
    x = f.samples
    out = fractional_columns(x, f.grid.dt, alpha)
    flags = (0, 1) if alpha < 0 and abs(x[0]) > 0 else ()
    return CausalSignal(f.grid, out, low_confidence=flags)
