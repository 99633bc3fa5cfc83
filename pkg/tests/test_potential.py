import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coerce_lab.discretize import build_grid
from coerce_lab.errors import OrderUnsupported
from coerce_lab.potential import (
    check_arc,
    check_assumption_am,
    check_gradient_growth,
    double_well,
    eval_derivatives,
    eval_potential,
    even_monomial,
    gaussian,
    multi_indices,
    polynomial,
    sine_perturbation,
    smoothed_power,
)

FAMILIES_1D = [
    gaussian(0.5),
    gaussian(2.0),
    even_monomial(4, 1.0),
    even_monomial(6, 0.5),
    double_well(1.0, 1.0),
    polynomial({4: 1.0, 3: 0.5, 1: -2.0}),
    smoothed_power(1.0, 0.1),
    smoothed_power(1.5, 0.3),
]
FAMILIES_2D = [gaussian(0.5, dim=2), double_well(1.0, 2.0, dim=2), polynomial({(4, 0): 1, (0, 4): 1, (1, 1): 0.3}, dim=2)]


def test_eval_examples():
    assert eval_potential(gaussian(0.5), 0.0) == 0.0
    assert eval_potential(gaussian(0.5), 2.0) == pytest.approx(2.0, abs=1e-15)
    assert eval_potential(double_well(1, 1), 1.0) == pytest.approx(0.0, abs=1e-15)
    assert eval_potential(gaussian(0.5, dim=2), (1.0, 2.0)) == pytest.approx(2.5)


def test_derivative_examples():
    d = eval_derivatives(gaussian(0.5), 3.0, 2)
    assert [d[(0,)], d[(1,)], d[(2,)]] == pytest.approx([4.5, 3.0, 1.0])
    d = eval_derivatives(even_monomial(4, 1), 1.0, 3)
    assert [d[(i,)] for i in range(4)] == pytest.approx([1, 4, 12, 24])
    d = eval_derivatives(double_well(1, 1), 0.0, 2)
    assert [d[(i,)] for i in range(3)] == pytest.approx([1, 0, -4], abs=1e-14)


def test_order_unsupported():
    with pytest.raises(OrderUnsupported):
        eval_derivatives(smoothed_power(1.0, 0.1), 0.5, 5)
    with pytest.raises(OrderUnsupported):
        eval_derivatives(gaussian(0.5), 0.5, 7)


def test_bad_parameters():
    for make in (lambda: gaussian(-1), lambda: even_monomial(3), lambda: double_well(0, 1),
                 lambda: smoothed_power(0.5, 0.1), lambda: polynomial({3: 1.0}),
                 lambda: polynomial({4: -1.0}), lambda: gaussian(0.5, dim=3)):
        with pytest.raises(ValueError):
            make()


def test_mixed_partials_symmetric():
    U = polynomial({(4, 0): 1, (0, 4): 1, (2, 1): 0.7, (1, 1): 0.3}, dim=2)
    d = eval_derivatives(U, (0.4, -0.9), 3)
    # (x^2 y) contributes d_xxy = 2 * 0.7 regardless of order
    assert d[(2, 1)] == pytest.approx(1.4)
    assert d[(1, 1)] == pytest.approx(0.3 + 0.7 * 2 * 0.4)


def _fd(U, x, alpha_lower, axis, h):
    # central difference of d^{alpha_lower} U along ``axis``
    e = np.zeros(U.dim)
    e[axis] = h
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    fwd = eval_derivatives(U, pt + e if U.dim == 2 else float(pt[0] + h), sum(alpha_lower))[alpha_lower]
    bwd = eval_derivatives(U, pt - e if U.dim == 2 else float(pt[0] - h), sum(alpha_lower))[alpha_lower]
    return (fwd - bwd) / (2 * h)


@settings(max_examples=25, deadline=None)
@given(x=st.floats(-2.5, 2.5), which=st.integers(0, len(FAMILIES_1D) - 1))
def test_derivatives_match_finite_differences_1d(x, which):
    U = FAMILIES_1D[which]
    if U.family == "smoothed_power":
        delta = U.param_dict["delta"]
        if abs(abs(x) - delta) < 1e-3:
            return
    top = U.max_order
    d = eval_derivatives(U, x, top)
    for k in range(1, top + 1):
        h = 1e-5 * max(1.0, abs(x))
        approx = _fd(U, x, (k - 1,), 0, h)
        exact = d[(k,)]
        tol = 1e-6 if k <= 3 else 1e-4
        assert abs(approx - exact) <= tol * max(1.0, abs(exact)), (U.label, k, x)


@settings(max_examples=15, deadline=None)
@given(x=st.floats(-2, 2), y=st.floats(-2, 2), which=st.integers(0, len(FAMILIES_2D) - 1))
def test_derivatives_match_finite_differences_2d(x, y, which):
    U = FAMILIES_2D[which]
    d = eval_derivatives(U, (x, y), 3)
    for k in range(1, 4):
        for alpha in multi_indices(2, k):
            axis = 0 if alpha[0] else 1
            lower = tuple(a - (i == axis) for i, a in enumerate(alpha))
            approx = _fd(U, (x, y), lower, axis, 1e-5)
            assert abs(approx - d[alpha]) <= 1e-6 * max(1.0, abs(d[alpha]))


def test_smoothed_power_matches_outside_and_is_c4():
    U = smoothed_power(1.5, 0.3)
    for x in (0.3, 0.5, 2.0, -1.7):
        assert eval_potential(U, x) == pytest.approx(abs(x) ** 1.5, rel=1e-13)
    delta = 0.3
    lo = eval_derivatives(U, delta - 1e-9, 4)
    hi = eval_derivatives(U, delta + 1e-9, 4)
    for k in range(5):
        assert lo[(k,)] == pytest.approx(hi[(k,)], rel=1e-5, abs=1e-6)
    # smooth at the origin: odd derivatives vanish
    d0 = eval_derivatives(U, 0.0, 3)
    assert d0[(1,)] == 0.0 and d0[(3,)] == 0.0


def test_perturbation_bounded_by_osc():
    base = gaussian(0.5)
    U = base.with_perturbation(sine_perturbation(0.3, 2.0))
    x = np.linspace(-5, 5, 2001)
    diff = eval_potential(U, x) - eval_potential(base, x)
    assert diff.max() - diff.min() <= U.perturbation.osc_bound + 1e-15
    assert np.max(np.abs(diff)) <= 0.3 + 1e-15
    # derivatives come from the smooth part only
    assert eval_derivatives(U, 1.0, 1)[(1,)] == eval_derivatives(base, 1.0, 1)[(1,)]


def test_arc_examples():
    gm = build_grid(gaussian(0.5), 8.0, 257)
    rep = check_arc(gaussian(0.5), gm, 1.0)
    assert rep.c_min == pytest.approx(1.0) and rep.satisfied
    assert rep.argmax_point == (0.0,)

    q = build_grid(even_monomial(4, 1), 3.0, 513)
    rep = check_arc(q.potential, q, 0.5)
    x = q.coords[0]
    oracle = np.max(12 * x**2 / (1 + 4 * np.abs(x) ** 3) ** 1.5)
    assert rep.satisfied and rep.c_min == pytest.approx(oracle, rel=1e-12)

    U = smoothed_power(1.0, 0.1)
    sp = build_grid(U, 40.0, 4001)
    rep = check_arc(U, sp, 1.0)
    assert rep.satisfied and rep.in_smoothing_zone


@pytest.mark.parametrize("U,R,N", [(even_monomial(4, 1), 3.0, 257), (double_well(1, 1), 3.0, 257)])
def test_arc_monotone_in_epsilon(U, R, N):
    gm = build_grid(U, R, N)
    cs = [check_arc(U, gm, e).c_min for e in (0.1, 0.5, 1.0, 1.5)]
    assert all(a <= b + 1e-12 for a, b in zip(cs, cs[1:]))


def test_assumption_am_examples():
    gm = build_grid(gaussian(0.5), 8.0, 257)
    rep = check_assumption_am(gaussian(0.5), gm, 4, 0.5)
    assert rep.constants == {3: 0.0, 4: 0.0} and rep.satisfied

    q = build_grid(even_monomial(4, 1), 3.0, 513)
    rep = check_assumption_am(q.potential, q, 4, 0.5)
    assert rep.satisfied and all(np.isfinite(v) for v in rep.constants.values())

    U = double_well(1, 1)
    dw = build_grid(U, 3.0, 513)
    rep = check_assumption_am(U, dw, 3, 0.5)
    x = dw.coords[0]
    assert rep.constants[3] == pytest.approx(np.max(24 * np.abs(x) / (1 + np.abs(4 * x**3 - 4 * x)) ** 3))


def test_gradient_growth_examples():
    gm = build_grid(gaussian(0.5), 8.0, 1025)
    rep = check_gradient_growth(gaussian(0.5), gm)
    assert rep.eta == pytest.approx([1 + r for r in rep.radii], abs=gm.h)
    assert rep.divergent

    U = double_well(1, 1)
    dw = build_grid(U, 4.0, 1025)
    rep = check_gradient_growth(U, dw, radii=[2.0, 2.5, 3.0, 3.5])
    assert rep.nondecreasing and rep.divergent

    U = smoothed_power(1.0, 0.1)
    sp = build_grid(U, 40.0, 4001)
    rep = check_gradient_growth(U, sp)
    assert rep.eta == pytest.approx([2.0] * len(rep.radii), abs=1e-12)
    assert not rep.divergent and "fails" in rep.note


def test_gradient_growth_needs_four_radii():
    gm = build_grid(gaussian(0.5), 8.0, 257)
    with pytest.raises(ValueError):
        check_gradient_growth(gaussian(0.5), gm, radii=[1, 2, 3])


def test_multi_indices_order():
    assert multi_indices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert multi_indices(1, 3) == [(3,)]
    assert math.comb(2 + 3 - 1, 3) == len(multi_indices(2, 3))
