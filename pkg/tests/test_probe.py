import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kawahara.acceptance import _symmetry_error
from kawahara.probe import (
    BlockFunction,
    NormParams,
    PhaseGrid,
    ProbeConfig,
    SupportError,
    bilinear_probe,
    block_J,
    block_regressions,
    block_samples,
    constant_growth,
    dyadic_box,
    modulation_profile,
    resonance,
    resonance_check,
    resonance_factored,
    space_norms,
    stress_ratio,
    time_window,
)
from kawahara.probe import _random_field

GRID = PhaseGrid()


def free_wave(grid=GRID):
    xi = grid.xi
    spec = np.exp(-(xi**2))
    u = np.fft.ifft(np.exp(1j * np.outer(grid.t, xi**5)) * spec[None, :], axis=1).real
    return u * time_window(grid.t)[:, None]


def test_resonance_values():
    assert resonance(1.0, 1.0) == 30.0
    assert resonance(1.0, -1.0) == 0.0
    assert resonance(1.0, 2.0) == 210.0
    assert resonance_factored(1.0, 2.0) == pytest.approx(210.0, rel=1e-15)


def test_resonance_check_within_rounding():
    rep = resonance_check(samples=20_000)
    assert rep["max_error_in_eps_scale"] <= 64


def test_phase_grid_validation():
    with pytest.raises(ValueError):
        PhaseGrid(nt=100)
    with pytest.raises(ValueError):
        PhaseGrid(T=2.0)


def test_norms_of_zero():
    n = space_norms(np.zeros((GRID.nt, GRID.nx)), GRID, NormParams())
    assert all(v == 0.0 for v in n.values())


def test_x00_is_l2():
    u = _random_field(np.random.default_rng(1), GRID, 2.0, 8.0)
    X = space_norms(u, GRID, NormParams(0.0, 0.0, 0.55))["X"]
    assert X == pytest.approx(math.sqrt(np.sum(u**2) * GRID.dt * GRID.dx), rel=1e-12)


def test_shape_check():
    with pytest.raises(ValueError):
        space_norms(np.zeros((4, 4)), GRID, NormParams())


@pytest.mark.parametrize("b, share", [(0.0, 0.93865786), (0.3, 0.89170815), (0.45, 0.85490623)])
def test_free_wave_sits_in_lowest_modulation_shell(b, share):
    prof = modulation_profile(free_wave(), GRID, NormParams(0.0, b, 0.55))
    assert prof.sum() == pytest.approx(1.0)
    assert prof[0] == pytest.approx(share, abs=1e-6)
    if b < 0.4:
        assert prof[0] >= 0.85


def test_dyadic_and_plain_norms_are_comparable():
    n = space_norms(free_wave(), GRID, NormParams(0.3, 0.45, 0.55))
    assert 0.25 <= n["X_dyadic"] / n["X"] <= 4


def test_dyadic_box_norm_closed_form():
    # xi in [1, 4] on a 1/8 lattice (half weights at the ends) times a zeta set of measure 12
    f = dyadic_box(1, 2, 0.125)
    assert f.l2() == pytest.approx(math.sqrt(0.125 * 23.5 * 12), rel=1e-14)
    t = f.tilde()
    assert t.tilde().m0 == f.m0 and np.array_equal(t.tilde().values, f.values)
    assert t.l2() == pytest.approx(f.l2())


def test_block_function_validation():
    with pytest.raises(ValueError):
        BlockFunction(0.1, 0, np.ones((3, 2)), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        BlockFunction(0.1, 0, np.ones((3, 1)), np.array([1.0, 0.0]))
    bad = BlockFunction(0.1, 0, np.ones((3, 1)), np.array([0.0, 1.0]))
    with pytest.raises(SupportError):
        block_J(bad, bad, bad)


def test_block_J_zero_cases():
    f = dyadic_box(0, 1, 0.125)
    z = BlockFunction(0.125, f.m0, np.zeros_like(f.values), f.edges)
    assert block_J(f, f, z) == 0.0
    assert block_J(z, f, f) == 0.0
    with pytest.raises(ValueError):
        block_J(f, dyadic_box(0, 1, 0.25), f)


def brute_J(f, g, h, n=400):
    """Midpoint sum over (z1, z2) cells for every lattice pair."""
    total = 0.0
    d = f.delta
    for i1, row1 in enumerate(f.values):
        for i2, row2 in enumerate(g.values):
            m3 = f.m0 + i1 + g.m0 + i2 - h.m0
            if not 0 <= m3 < h.values.shape[0] or not row1.any() or not row2.any():
                continue
            x1, x2 = (f.m0 + i1) * d, (g.m0 + i2) * d
            c = resonance(x1, x2)
            z1 = np.linspace(f.edges[0], f.edges[-1], n + 1)
            z2 = np.linspace(g.edges[0], g.edges[-1], n + 1)
            m1, m2 = (z1[1:] + z1[:-1]) / 2, (z2[1:] + z2[:-1]) / 2
            Z1, Z2 = np.meshgrid(m1, m2, indexing="ij")
            v1 = row1[np.clip(np.searchsorted(f.edges, m1) - 1, 0, row1.size - 1)]
            v2 = row2[np.clip(np.searchsorted(g.edges, m2) - 1, 0, row2.size - 1)]
            z3 = Z1 + Z2 + c
            k3 = np.searchsorted(h.edges, z3) - 1
            inside = (z3 > h.edges[0]) & (z3 < h.edges[-1])
            v3 = np.where(inside, h.values[m3][np.clip(k3, 0, h.values.shape[1] - 1)], 0.0)
            total += np.sum(v1[:, None] * v2[None, :] * v3) * (z1[1] - z1[0]) * (z2[1] - z2[0])
    return total * d * d


def test_block_J_matches_brute_force():
    d = 0.25
    f = dyadic_box(0, 1, d, 1)
    g = dyadic_box(0, 1, d, -1, xi_range=(0.5, 1.0))
    h = dyadic_box(-1, 2, d, 1, xi_range=(0.0, 1.5))
    J = block_J(f, g, h)
    assert J > 0
    assert J == pytest.approx(brute_J(f, g, h), rel=2e-2)


def test_J_symmetry():
    assert _symmetry_error(samples=6, seed=3) <= 1e-12


def test_stress_ratio_converges_in_panels():
    p = NormParams(-1.7, 0.45, 0.55)
    a = stress_ratio(p, 5)["ratio"]
    b = stress_ratio(p, 5, panels=48)["ratio"]
    assert abs(a - b) <= 1e-4 * b
    with pytest.raises(ValueError):
        stress_ratio(p, 0)


def test_block_samples_are_seeded():
    a = block_samples(12, seed=4, jobs=2)
    b = block_samples(12, seed=4, jobs=1)
    assert [r["J"] for r in a] == [r["J"] for r in b]
    assert [r["index"] for r in a] == list(range(12))
    g = constant_growth(a)
    assert g["samples"] <= 12 and g["max"] >= g["max_lower_half"]
    rows = block_regressions(a)
    assert {r["part"] for r in rows} == {"a", "b", "c"}


def test_bilinear_probe_reproducible():
    cfg = ProbeConfig(samples=4, grid=PhaseGrid(nt=128, nx=64), stress_ks=(4,), lemma_samples=6, jobs=2)
    p = NormParams(0.0, 0.45, 0.55)
    a = bilinear_probe(p, cfg)
    b = bilinear_probe(p, ProbeConfig(**{**cfg.__dict__, "jobs": 1}))
    assert a["ensemble"]["ratios"] == b["ensemble"]["ratios"]
    assert a["blocks"] == b["blocks"]
    assert all(r > 0 for r in a["ensemble"]["ratios"])
    assert NormParams().solver_regime() and not NormParams(b=0.6).solver_regime()


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_resonance_factorization_property(a, b):
    size = abs(a + b) ** 5 + abs(a) ** 5 + abs(b) ** 5
    assert abs(resonance(a, b) - resonance_factored(a, b)) <= 64 * np.finfo(float).eps * max(size, 1e-300)


@settings(max_examples=30, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_resonance_symmetries_property(a, b):
    r = float(resonance(a, b))
    tol = 64 * np.finfo(float).eps * (abs(a + b) ** 5 + abs(a) ** 5 + abs(b) ** 5 + 1e-300)
    assert abs(float(resonance(b, a)) - r) <= tol
    assert abs(float(resonance(-a, -b)) + r) <= tol
    assert abs(float(resonance(-b, a + b)) + r) <= tol
