import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kawahara.acceptance import check_jump, check_traces
from kawahara.forcing import (
    AdmissibilityError,
    SingularMatrixError,
    TraceConstants,
    admissible_window,
    apply_forcing,
    assemble_boundary_matrix,
    default_lambdas,
    derivative_sign,
    smooth_cutoff,
    solve_gammas,
    trace_coefficient,
)
from kawahara.fractional import CausalSignal, TimeGrid
from kawahara.special_kernel import kernel_constants


def bump_signal(n=201, T=1.0):
    def f(t):
        out = np.zeros_like(t)
        m = (t > 0.1) & (t < 0.9)
        z = (t[m] - 0.1) / 0.8
        out[m] = np.exp(-1 / (z * (1 - z)) + 4)
        return out

    return CausalSignal.from_function(TimeGrid.covering(T, n), f)


def test_trace_constant_is_one_at_zero():
    for side in ("right", "left"):
        assert trace_coefficient(0.0, side) == pytest.approx(1.0, abs=1e-12)


def test_removable_points_by_lhopital():
    # numerator and denominator both vanish at lambda = 1; the limits are 0.4 M and 0.6 M
    M = kernel_constants().M
    assert trace_coefficient(1.0, "right") == pytest.approx(math.sqrt(5) - 1, abs=1e-10)
    assert trace_coefficient(1.0, "right") == pytest.approx(0.4 * M, abs=1e-10)
    assert trace_coefficient(1.0, "left") == pytest.approx(0.6 * M, abs=1e-10)
    # continuity across the removable point
    for side in ("right", "left"):
        near = trace_coefficient(1.0 + 1e-5, side)
        assert abs(near - trace_coefficient(1.0, side)) <= 1e-4


def test_derivative_constants_are_shifted_a():
    for side in ("right", "left"):
        tc = TraceConstants(side)
        for lam in (-0.7, 0.1, 0.45):
            assert tc.b(lam) == tc.a(lam - 1)
    assert TraceConstants("left").c(0.2) == TraceConstants("left").a(-1.8)
    with pytest.raises(ValueError):
        TraceConstants("right").c(0.2)


def test_derivative_sign():
    assert [derivative_sign("right", j) for j in range(3)] == [1, -1, 1]
    assert [derivative_sign("left", j) for j in range(3)] == [1, 1, 1]


def test_trace_coefficient_domain():
    with pytest.raises(ValueError):
        trace_coefficient(-4.0, "right")
    with pytest.raises(ValueError):
        trace_coefficient(-3.05, "left", 1)
    with pytest.raises(ValueError):
        trace_coefficient(0.0, "up")
    with pytest.raises(ValueError):
        trace_coefficient(0.0, "left", 3)


def test_zero_signal_gives_zero_field():
    g = CausalSignal(TimeGrid(0.01, 50), np.zeros(50))
    f = apply_forcing(g, 0.25, "right", [0.0, 0.5, 2.0])
    assert f.values.shape == (50, 3) and not np.any(f.values)


def test_field_vanishes_at_time_zero_and_respects_side():
    g = bump_signal(101)
    f = apply_forcing(g, 0.25, "right", [0.0, 1.0])
    assert np.all(f.values[0] == 0)
    with pytest.raises(ValueError):
        apply_forcing(g, 0.25, "right", [-1.0])
    with pytest.raises(ValueError):
        apply_forcing(g, 0.25, "left", [1.0])
    # lambda = 0 is defined on the whole line
    assert apply_forcing(g, 0.0, "right", [-1.0]).values.shape == (101, 1)


def test_time_subset_matches_full_field():
    g = bump_signal(101)
    full = apply_forcing(g, -0.25, "left", [-0.5]).values
    part = apply_forcing(g, -0.25, "left", [-0.5], times=[10, 50, 100]).values
    assert np.allclose(part, full[[10, 50, 100]], atol=1e-14)


def test_trace_requires_origin():
    g = bump_signal(51)
    with pytest.raises(ValueError):
        apply_forcing(g, 0.0, "right", [0.5]).trace()


def test_argument_errors():
    g = bump_signal(51)
    with pytest.raises(ValueError):
        apply_forcing(g, 6.0, "right", [0.0])
    with pytest.raises(ValueError):
        apply_forcing(g, 0.0, "middle", [0.0])


def test_equal_lambdas_are_singular():
    A = assemble_boundary_matrix((0.1, 0.1), "right")
    assert A.singular
    with pytest.raises(SingularMatrixError):
        A.inverse()
    # differences in 5Z are singular too
    assert assemble_boundary_matrix((0.0, 5.0), "right").singular


def test_default_right_matrix_is_well_conditioned():
    A = assemble_boundary_matrix((0.0, 0.25), "right")
    assert abs(A.determinant) > 1e-6 and not A.singular
    assert A.entries[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_left_matrix_inverse():
    A = assemble_boundary_matrix((-0.2, 0.1, 0.4), "left")
    assert np.max(np.abs(A.entries @ A.inverse() - np.eye(3))) <= 1e-12


def test_solve_gammas_round_trip():
    A = assemble_boundary_matrix(default_lambdas("left"), "left")
    grid = TimeGrid(0.01, 40)
    rng = np.random.default_rng(3)
    gam = rng.normal(size=(3, 40))
    rhs = [CausalSignal(grid, r) for r in A.entries @ gam]
    out = solve_gammas(A, rhs)
    assert np.max(np.abs(np.vstack([o.samples for o in out]) - gam)) <= 1e-10
    zero = solve_gammas(A, [CausalSignal(grid, np.zeros(40))] * 3)
    assert all(not np.any(z.samples) for z in zero)
    with pytest.raises(ValueError):
        solve_gammas(A, rhs[:2])


def test_lambda_count_and_admissibility():
    with pytest.raises(ValueError):
        assemble_boundary_matrix((0.0, 0.25), "left")
    with pytest.raises(AdmissibilityError):
        assemble_boundary_matrix((0.0, 0.45), "right", s=-0.2)


def test_default_lambdas_inside_window():
    for side in ("right", "left"):
        for s in (-0.5, 0.0, 0.3, 1.0, 2.0):
            lo, hi = admissible_window(side, s)
            lams = default_lambdas(side, s)
            assert all(lo < v < hi for v in lams)
            assert not assemble_boundary_matrix(lams, side, s=s).singular


def test_trace_criterion():
    ok, vals = check_traces()
    assert ok, vals
    assert vals["max_derivative_trace_error"] <= 1e-4


def test_jump_criterion():
    ok, vals = check_jump("quick")
    assert ok, vals


def test_smooth_cutoff():
    t = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    c = smooth_cutoff(t)
    assert c[0] == c[1] == c[2] == 1.0 and c[4] == c[5] == 0.0
    assert c[3] == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 0.49), st.sampled_from(["right", "left"]))
def test_trace_coefficient_matches_closed_form_property(lam, side):
    if abs(lam - 1) < 1e-3:
        return
    M = kernel_constants().M
    num = math.cos((1 + 4 * lam) * math.pi / 10) if side == "right" else math.cos((1 - 6 * lam) * math.pi / 10)
    ref = M * num / (5 * math.sin((1 - lam) * math.pi / 5))
    assert trace_coefficient(lam, side) == pytest.approx(ref, rel=1e-12, abs=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2))
def test_field_is_linear_in_signal_property(c):
    g = bump_signal(41)
    a = apply_forcing(g.scaled(c), 0.25, "right", [0.0, 0.7]).values
    b = c * apply_forcing(g, 0.25, "right", [0.0, 0.7]).values
    # FFT convolution round-off
    assert np.max(np.abs(a - b)) <= 1e-10 * (1 + np.max(np.abs(b)))
