import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma

from kawahara.special_kernel import (
    KernelAccuracyError,
    KernelEvaluator,
    eval_kernel,
    eval_kernel_raw,
    kernel_constants,
    kernel_table,
    mellin_transform,
    taylor_coefficients,
    weyl_kernel,
)

QUAD = KernelEvaluator(method="quadrature", x_max=1e6, check=False)

# 30-digit mpmath contour quadrature (segment to the stationary point, then the ray at angle pi/10)
MP_ORACLE = {
    20.0: -1.1786233346814726159e-8,
    25.0: -2.0528252976718771812e-11,
    -10.0: -0.10328125323147646534,
    -3.5: -0.01700753402964737737,
    2.5: 0.047953257580014742747,
    7.0: -0.0015105076644583716639,
}


def closed_forms():
    c1, c3 = math.cos(math.pi / 10), math.cos(3 * math.pi / 10)
    return (
        c1 * gamma(0.2) / (5 * math.pi),
        -c3 * gamma(0.4) / (5 * math.pi),
        -c3 * gamma(0.6) / (5 * math.pi),
        c1 * gamma(0.8) / (5 * math.pi),
    )


def test_values_at_origin_match_closed_forms():
    for n, ref in enumerate(closed_forms()):
        assert abs(eval_kernel(0.0, n, QUAD) - ref) <= 1e-10


def test_b0_numeric_value():
    # the quoted 0.277959 is a rounded value of 0.2779579
    assert kernel_constants().B0 == pytest.approx(0.277959, abs=2e-6)
    assert eval_kernel(0.0) == pytest.approx(0.27795785826020675, abs=1e-12)


def test_constants_definitions():
    kc = kernel_constants()
    assert kc.M == pytest.approx(1 / (kc.B0 * gamma(0.8)), rel=1e-14)
    assert kc.halflineIntegral == Fraction(2, 5)
    assert gamma(0.2) == pytest.approx(4.5908437119988, rel=1e-12)


def test_gamma_reflection_forms_agree():
    kc = kernel_constants()
    via_reflection = math.cos(math.pi / 10) / (5 * math.sin(math.pi / 5) * gamma(0.8))
    assert abs(kc.B0 - via_reflection) <= 1e-12


@pytest.mark.parametrize("x", sorted(MP_ORACLE))
def test_against_extended_precision_oracle(x):
    tol = 1e-6 if x < -10 else 1e-10
    assert abs(eval_kernel(x, 0, KernelEvaluator(x_max=30)) - MP_ORACLE[x]) <= tol


def test_second_derivative_oracle():
    assert abs(eval_kernel(-3.5, 2) - 0.053228422310348450168) <= 1e-10


def test_decay_at_25_and_documented_value_at_20():
    # |B(20)| is 1.18e-8, just above 1e-8; the superpolynomial bound is checked further out
    assert abs(eval_kernel(20.0)) == pytest.approx(1.1786e-8, rel=1e-3)
    assert abs(eval_kernel(25.0)) <= 1e-10


def test_reality_of_raw_contour_sum():
    for x in np.linspace(-30, 30, 25):
        z = eval_kernel_raw(x, 0, KernelEvaluator(x_max=30))
        assert abs(z.imag) <= (1e-6 if x < -10 else 1e-10)


def test_ode_recurrence_at_fifty_points():
    xs = np.linspace(-10, 10, 50)
    lhs = eval_kernel(xs, 4, QUAD)
    rhs = -xs / 5 * eval_kernel(xs, 0, QUAD)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_taylor_consistency():
    xs = np.linspace(-1, 1, 21)
    for n in range(4):
        tay = np.array([np.polynomial.polynomial.polyval(x, taylor_coefficients(n)) for x in xs])
        assert np.max(np.abs(tay - eval_kernel(xs, n, QUAD))) <= 1e-8


def test_decay_envelopes():
    cfg = KernelEvaluator(x_max=30)
    x = np.linspace(5, 30, 40)
    right = np.abs(eval_kernel(x, 0, cfg)) * (1 + x**2) ** 2.5
    left = np.abs(eval_kernel(-x, 0, cfg)) * (1 + x**2) ** (3 / 16)
    # bounded envelopes; the right one peaks near x = 6 and then collapses
    assert right.max() < 50 and right[-10:].max() < 1e-3
    assert left.max() < 1


def test_halfline_integral():
    val = quad(lambda x: eval_kernel(x, 0, QUAD), 0, 40, epsabs=1e-13, limit=200)[0]
    assert abs(val - 0.4) <= 1e-8


def test_deterministic():
    a = eval_kernel(-7.3, 2)
    b = eval_kernel(-7.3, 2)
    assert a == b


def test_argument_errors():
    with pytest.raises(ValueError):
        eval_kernel(0.0, 5)
    with pytest.raises(ValueError):
        eval_kernel(float("nan"))
    with pytest.raises(ValueError):
        eval_kernel(31.0)
    with pytest.raises(ValueError):
        KernelEvaluator(tol=0)
    with pytest.raises(ValueError):
        KernelEvaluator(nodes_per_panel=4)


def test_accuracy_failure_carries_estimate():
    cfg = KernelEvaluator(nodes_per_panel=8, segment_panels=1, ray_panels=1, x_max=30, tol_far=1e-14)
    with pytest.raises(KernelAccuracyError) as exc:
        eval_kernel(-25.0, 0, cfg)
    assert exc.value.achieved > 1e-14


def test_mellin_limit_and_domain():
    assert mellin_transform(1.0) == pytest.approx(0.4, abs=1e-12)
    assert mellin_transform(1 + 1e-7) == pytest.approx(0.4, abs=1e-7)
    with pytest.raises(ValueError):
        mellin_transform(0.0, "plus")
    with pytest.raises(ValueError):
        mellin_transform(0.4, "minus")
    with pytest.raises(ValueError):
        mellin_transform(0.2, "middle")


def test_mellin_plus_quadrature():
    direct = quad(lambda x: eval_kernel(x, 0, QUAD), 0, 40, weight="alg", wvar=(-0.8, 0), epsabs=1e-12, limit=400)[0]
    assert abs(direct - mellin_transform(0.2, "plus")) <= 1e-6


def test_weyl_kernel_first_order_is_tail_integral():
    for w in (0.5, 2.0):
        tail = quad(lambda z: eval_kernel(z, 0, QUAD), w, 40, epsabs=1e-12, limit=200)[0]
        assert weyl_kernel(w, 1.0, "right") == pytest.approx(tail, abs=1e-8)


def test_kernel_table_matches_direct_values():
    tab = kernel_table(1, -12, 6)
    xs = np.array([-11.3, -4.2, 0.3, 5.5])
    assert np.max(np.abs(tab(xs) - eval_kernel(xs, 1, QUAD))) <= 1e-7
    assert np.isnan(tab(20.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10))
def test_recurrence_property(x):
    assert abs(eval_kernel(x, 4) + x / 5 * eval_kernel(x, 0)) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.integers(0, 3))
def test_taylor_and_quadrature_agree_property(x, n):
    t = eval_kernel(x, n, KernelEvaluator(method="taylor"))
    q = eval_kernel(x, n, QUAD)
    assert abs(t - q) <= 1e-8
