import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kawahara.fractional import CausalSignal, TimeGrid
from kawahara.ibvp import (
    CompatibilityError,
    DivergenceError,
    HalfLineField,
    IBVPProblem,
    SolverConfig,
    energy_identity_residual,
    extend_initial_data,
    extract_traces,
    half_line_x,
    scale,
    scaling_norm_factors,
    solve_linear,
    solve_nonlinear,
    validate_compatibility,
)
from kawahara.spectral import SeamWarning, SpaceGrid

SPACE = SpaceGrid(40.0, 512)
TIME = TimeGrid.covering(0.5, 41)


def zeros(grid=TIME):
    return CausalSignal(grid, np.zeros(grid.n))


def corner_problem(side="right", amp=0.05, s=0.0):
    """Data near the corner matching f at t = 0 (g is zero, so u0'(0) does not match)."""
    x = half_line_x(SPACE, side)
    c = 1.0 if side == "right" else -1.0
    u0 = amp * np.exp(-(((x - c) / 0.6) ** 2))
    f = CausalSignal.from_function(TIME, lambda t: u0[0 if side == "right" else -1] * np.exp(-t))
    h = zeros() if side == "left" else None
    return IBVPProblem(side, SPACE, u0, f, zeros(), h, s)


def test_problem_validation():
    x = half_line_x(SPACE, "right")
    with pytest.raises(ValueError):
        IBVPProblem("right", SPACE, np.zeros(x.size - 1), zeros(), zeros())
    with pytest.raises(ValueError):
        IBVPProblem("right", SPACE, np.zeros(x.size), zeros(), zeros(), zeros())
    with pytest.raises(ValueError):
        IBVPProblem("left", SPACE, np.zeros(x.size), zeros(), zeros())
    with pytest.raises(ValueError):
        IBVPProblem("right", SPACE, np.zeros(x.size), zeros(), zeros(), s=0.5)
    with pytest.raises(ValueError):
        IBVPProblem("right", SPACE, np.zeros(x.size), zeros(), zeros(TimeGrid(0.1, 41)))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(b=0.6)
    with pytest.raises(ValueError):
        SolverConfig(extension="mirror")
    with pytest.raises(ValueError):
        SolverConfig(field_extent=0)


def test_compatibility_clauses():
    x = half_line_x(SPACE, "right")
    u0 = np.exp(-((x - 0.0) ** 2))  # u0(0) = 1, u0'(0) = 0
    f = CausalSignal.from_function(TIME, lambda t: np.exp(-t))
    g = CausalSignal.from_function(TIME, lambda t: 1 + 0 * t)
    for s, ok in ((0.0, True), (1.0, True), (2.0, False)):
        rep = validate_compatibility(IBVPProblem("right", SPACE, u0, f, g, s=s), raise_on_failure=False)
        assert rep.passed is ok
    with pytest.raises(CompatibilityError) as exc:
        validate_compatibility(IBVPProblem("right", SPACE, u0, f, g, s=2.0))
    assert exc.value.failed == [3]
    bad_f = CausalSignal.from_function(TIME, lambda t: 2 + t)
    rep = validate_compatibility(IBVPProblem("right", SPACE, u0, bad_f, g, s=1.0), raise_on_failure=False)
    assert [c.index for c in rep.clauses if not c.passed] == [2]


def test_extension_of_zero_and_data_side_values():
    ext = extend_initial_data(np.zeros(SPACE.N // 2), "right", SPACE)
    assert not np.any(ext.values)
    x = half_line_x(SPACE, "right")
    u0 = np.exp(-((x - 2) ** 2))
    ext = extend_initial_data(u0, "right", SPACE)
    assert np.array_equal(ext.values[SPACE.origin :], u0)
    # vanishes beyond twice the cutoff width on the reflected side
    assert not np.any(ext.values[SPACE.x < -2.0])
    assert ext.norm_ratio > 0


def test_extension_matches_derivatives_at_corner():
    space = SpaceGrid(10.0, 8192)
    x = half_line_x(space, "left")
    u0 = np.sin(x + 0.3) + x**2
    e = extend_initial_data(u0, "left", space).values
    o, dx = space.origin, space.dx
    # one-sided slopes agree to O(dx) on both sides of the corner
    left = (e[o] - e[o - 1]) / dx
    right = (e[o + 1] - e[o]) / dx
    assert abs(left - right) <= 10 * dx
    assert abs(e[o + 1] - e[o]) <= 2 * dx


def test_zero_data_gives_zero_solution():
    x = half_line_x(SPACE, "left")
    p = IBVPProblem("left", SPACE, np.zeros(x.size), zeros(), zeros(), zeros())
    b = solve_linear(p)
    assert not np.any(b.u.values)
    assert energy_identity_residual(b) == 0.0
    nb = solve_nonlinear(p)
    assert not np.any(nb.u.values)


def test_time_horizon_is_checked():
    p = corner_problem()
    with pytest.raises(ValueError):
        solve_linear(p, SolverConfig(cutoff_width=0.4))


def flat_start(t):
    # smooth bump on [0.05, 0.45], flat at t = 0 so every corner condition holds
    out = np.zeros_like(t)
    m = (t > 0.05) & (t < 0.45)
    z = (t[m] - 0.05) / 0.4
    out[m] = np.exp(-1 / (z * (1 - z)) + 4)
    return out


def boundary_problem(side, n=81, amp=0.05):
    grid = TimeGrid.covering(0.5, n)
    x = half_line_x(SPACE, side)
    f = CausalSignal.from_function(grid, lambda t: amp * flat_start(t))
    return IBVPProblem(side, SPACE, np.zeros(x.size), f, zeros(grid), zeros(grid) if side == "left" else None)


@pytest.fixture(scope="module", params=["right", "left"])
def linear_bundle(request):
    return solve_linear(boundary_problem(request.param))


def test_linear_solve_meets_boundary_data(linear_bundle):
    b = linear_bundle
    assert b.u.values.shape == (b.problem.time.n, np.sum(np.abs(b.u.x) <= 10 + 1e-12))
    assert b.diagnostics["trace_errors"]["d0_stencil_rel"] <= 2e-3
    assert b.diagnostics["periodic_wrap_error"] <= 1e-3


def test_trace_error_shrinks_with_time_step():
    coarse = solve_linear(boundary_problem("right", 81)).diagnostics["trace_errors"]["d0_stencil_rel"]
    fine = solve_linear(boundary_problem("right", 161)).diagnostics["trace_errors"]["d0_stencil_rel"]
    assert fine < coarse / 2


def test_zero_boundary_signal_reports_absolute_error(linear_bundle):
    te = linear_bundle.diagnostics["trace_errors"]
    assert te["d1_stencil_rel"] == te["d1_stencil_max_abs"] < 1e-3


def test_linear_consistency_of_picard_path(linear_bundle):
    b = solve_nonlinear(linear_bundle.problem, nonlinear=False)
    assert np.max(np.abs(b.u.values - linear_bundle.u.values)) <= 1e-10
    assert not b.nonlinear


def test_energy_identity_linear(linear_bundle):
    assert energy_identity_residual(linear_bundle) <= 1e-5
    other = "left" if linear_bundle.problem.side == "right" else "right"
    with pytest.raises(ValueError):
        energy_identity_residual(linear_bundle, side=other)


def test_incompatible_corner_leaves_initial_layer():
    # first-order matching only: the trace misses f in the first steps, then settles
    b = solve_linear(corner_problem("right"))
    err = np.abs(extract_traces(b.u, "right", (0,))[0] - b.problem.f.samples)
    assert err[1] > 1e-4
    assert np.max(err[TIME.n // 2 :]) <= 1e-6


def test_small_data_picard_contracts():
    b = solve_nonlinear(boundary_problem("right"))
    assert b.nonlinear and len(b.history) >= 2
    assert max(b.ratios) < 1
    assert b.history[-1] <= 1e-10 * b.u.l2()
    with pytest.raises(DivergenceError) as exc:
        solve_nonlinear(boundary_problem("right"), SolverConfig(max_iter=1))
    assert len(exc.value.history) == 1


def test_interior_data_on_small_grid_warns():
    space = SpaceGrid(20.0, 256)
    x = half_line_x(space, "right")
    u0 = np.exp(-(((x - 5) / 1.5) ** 2))
    f = CausalSignal.from_function(TIME, lambda t: 0 * t)
    p = IBVPProblem("right", space, u0 * (x > 0.5) * (1 - np.exp(-(x**8))), f, zeros())
    with pytest.warns(SeamWarning):
        b = solve_linear(p)
    assert b.diagnostics["periodic_wrap_error"] > 1e-3


def test_scale_identity_and_factors():
    p = corner_problem()
    assert scale(p, 1.0) is p
    lam = 0.5
    fac = scaling_norm_factors(lam, 0.3)
    assert fac["f"] == pytest.approx(lam**1.5 * math.sqrt(1 + lam**2) ** 2.3)
    q = scale(p, lam)
    assert q.space.L == pytest.approx(80.0)
    assert q.time.dt == pytest.approx(TIME.dt * 32)
    assert np.allclose(q.u0, lam**4 * p.u0)
    with pytest.raises(ValueError):
        scale(p, 0.0)
    with pytest.raises(TypeError):
        scale("field", 2.0)


def test_scale_round_trip_of_field():
    f = HalfLineField(TIME, np.linspace(0, 1, 5), np.ones((TIME.n, 5)))
    g = scale(scale(f, 2.0), 0.5)
    assert np.allclose(g.values, f.values) and np.allclose(g.x, f.x)
    assert g.time.dt == pytest.approx(TIME.dt)


def test_half_line_l2():
    f = HalfLineField(TimeGrid.covering(1.0, 11), np.linspace(0, 2, 21), np.ones((11, 21)))
    assert f.l2() == pytest.approx(math.sqrt(2.0))
    assert f.l2(xmax=1.0) == pytest.approx(1.0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 5.0))
def test_scaling_relabels_grids_property(lam):
    p = corner_problem("left")
    q = scale(p, lam)
    assert q.space.dx == pytest.approx(SPACE.dx / lam)
    assert q.h.grid.dt == pytest.approx(TIME.dt / lam**5)
    assert np.allclose(q.g.samples, lam**5 * p.g.samples)
    back = scale(q, 1 / lam)
    assert np.allclose(back.u0, p.u0, rtol=1e-12, atol=1e-290)
