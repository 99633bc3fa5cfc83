import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coerce_lab.discretize import (
    build_grid,
    derivative,
    entropy,
    grad_norm_k,
    integrate,
    lp_norm,
    make_test_bank,
    sobolev_norm,
    tilde_norm,
    write_function_csv,
)
from coerce_lab.errors import GridMismatch, OrderUnsupported, TailTooHeavy, ZeroFunction
from coerce_lab.potential import even_monomial, gaussian

from . import oracles


def test_build_grid_ou(ou):
    assert ou.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(ou.weights > 0)
    assert ou.tail_estimate < 1e-12
    assert ou.axis[0] == -8.0 and ou.axis[ou.n // 2] == 0.0
    assert ou.h == pytest.approx(16 / 1024)


def test_build_grid_refuses_heavy_tail():
    with pytest.raises(TailTooHeavy):
        build_grid(gaussian(0.5), 2.0, 129)


def test_build_grid_quartic_r4():
    gm = build_grid(even_monomial(4, 1), 4.0, 513)
    assert gm.tail_estimate < 1e-8


@pytest.mark.parametrize("n", [32, 31, 1024])
def test_build_grid_rejects_bad_n(n):
    with pytest.raises(ValueError):
        build_grid(gaussian(0.5), 8.0, n)


def test_tail_estimate_tracks_true_mass():
    # the Laplace estimate should be within a factor of a few of the exact tail
    from scipy.special import erfc

    gm = build_grid(gaussian(0.5), 6.5, 513)
    exact = erfc(6.5 / math.sqrt(2))
    assert exact / 3 < gm.tail_estimate < 3 * exact


def test_integrate_moments(ou):
    assert integrate(ou, ou.constant()) == pytest.approx(1.0, abs=1e-15)
    x = ou.coordinate()
    assert abs(integrate(ou, x)) < 1e-12
    assert integrate(ou, x * x) == pytest.approx(1.0, abs=1e-8)
    assert integrate(ou, x * x * x * x) == pytest.approx(3.0, abs=1e-8)


def test_quadrature_converges_quadratically_or_better():
    # the uniform rule is spectrally accurate here, so errors may hit rounding
    for U, R, moment in ((gaussian(0.5), 8.0, 1.0), (even_monomial(4, 1), 3.0, oracles.quartic_moment(2))):
        errs = []
        for n in (33, 65, 129, 257):
            gm = build_grid(U, R, n)
            x = gm.coordinate()
            errs.append(abs(integrate(gm, x * x) - moment))
        for a, b in zip(errs, errs[1:]):
            assert b <= max(a / 4, 1e-13)


def test_grid_mismatch(ou, ou_small):
    with pytest.raises(GridMismatch):
        integrate(ou, ou_small.coordinate())


def test_derivative_examples(ou):
    x = ou.coordinate()
    inner = slice(2, -2)
    assert np.allclose(derivative(ou, x, (1,)).values, 1.0, atol=1e-12)
    x2 = ou.function(x.values**2, "x2")
    assert np.allclose(derivative(ou, x2, (2,)).values[inner], 2.0, atol=1e-9)
    s = ou.function(np.sin(x.values), "sin")
    d = derivative(ou, s, (1,)).values[ou.n // 2]
    assert abs(d - 1.0) <= ou.h**2
    with pytest.raises(OrderUnsupported):
        derivative(ou, x, (5,))


def test_mixed_derivative_2d():
    gm = build_grid(gaussian(0.5, dim=2), 7.0, 65)
    x, y = gm.coords
    f = gm.function(x**2 * y, "x2y")
    d = derivative(gm, f, (1, 1)).values
    assert np.allclose(d[2:-2, 2:-2], 2 * x[2:-2, 2:-2], atol=1e-9)
    assert np.allclose(derivative(gm, f, (2, 1)).values[3:-3, 3:-3], 2.0, atol=1e-8)


@settings(max_examples=20, deadline=None)
@given(c=st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_stencil_exact_on_quadratics(c):
    gm = build_grid(gaussian(0.5), 8.0, 65)
    x = gm.axis
    f = gm.function(c[0] + c[1] * x + c[2] * x * x)
    assert np.allclose(derivative(gm, f, (1,)).values, c[1] + 2 * c[2] * x, atol=1e-9)
    assert np.allclose(derivative(gm, f, (2,)).values[2:-2], 2 * c[2], atol=1e-8)


def test_norm_examples(ou):
    one = ou.constant()
    x = ou.coordinate()
    assert sobolev_norm(ou, one, 3, 2) == pytest.approx(1.0)
    assert grad_norm_k(ou, one, 1, 2) == 0.0
    assert sobolev_norm(ou, x, 1, 2) == pytest.approx(math.sqrt(2), abs=1e-4)
    assert sobolev_norm(ou, x, 2, 2) == pytest.approx(math.sqrt(2), abs=1e-4)
    x2 = ou.function(x.values**2)
    assert grad_norm_k(ou, x2, 2, 2) == pytest.approx(2.0, abs=1e-6)
    x3 = ou.function(x.values**3)
    assert grad_norm_k(ou, x3, 1, 2) == pytest.approx(math.sqrt(9 * oracles.gaussian_moment(4)), abs=1e-3)
    assert tilde_norm(ou, one, 1, 2) == pytest.approx(1.0)
    assert tilde_norm(ou, x, 1, 2) == pytest.approx(2.0, abs=1e-4)
    assert tilde_norm(ou, x, 2, 2) == pytest.approx(1.0, abs=1e-8)
    assert lp_norm(ou, x, 4) == pytest.approx(3 ** 0.25, abs=1e-8)


def test_norm_monotonicity_and_tilde_bound(ou, ou_bank):
    for f in ou_bank:
        vals = [sobolev_norm(ou, f, m, 2) for m in range(4)]
        assert all(a <= b * (1 + 1e-14) for a, b in zip(vals, vals[1:]))
        for k in (1, 2, 3):
            for p in (2, 3):
                assert tilde_norm(ou, f, k, p) <= 2 * sobolev_norm(ou, f, k, p) * (1 + 1e-12)


def test_entropy_examples(ou):
    assert entropy(ou, ou.constant(3.0)) == 0.0
    with pytest.raises(ZeroFunction):
        entropy(ou, ou.constant(0.0))
    # two-point function: values a on x < 0 and b on x >= 0
    x = ou.axis
    a, b = 1.0, 2.0
    f = ou.function(np.where(x < 0, a, b))
    w = ou.weights
    pa, pb = float(w[x < 0].sum()), float(w[x >= 0].sum())
    m = pa * a * a + pb * b * b
    hand = pa * a * a * math.log(a * a / m) + pb * b * b * math.log(b * b / m)
    assert entropy(ou, f) == pytest.approx(hand, rel=1e-12)
    # f = x: Ent = mu(x^2 log x^2), against adaptive quadrature
    ref = oracles.expectation(lambda t: t * t * math.log(t * t) if t else 0.0, lambda t: t * t / 2)
    assert entropy(ou, ou.coordinate()) == pytest.approx(ref, abs=1e-5)


def test_bank_deterministic(ou):
    b1 = make_test_bank(ou, seed=3)
    b2 = make_test_bank(ou, seed=3)
    assert b1.names == b2.names
    for f, g in zip(b1, b2):
        assert np.array_equal(f.values, g.values)


def test_bank_seed_changes_random_members_only(ou):
    b1 = make_test_bank(ou, seed=0)
    b2 = make_test_bank(ou, seed=1)
    for f, g in zip(b1, b2):
        same = np.array_equal(f.values, g.values)
        assert same == (not f.name.startswith("rand_"))


def test_bank_contents(ou, ou_bank, ou_sd):
    names = ou_bank.names
    assert "const" in names and "x^6" in names and "He_6" in names
    assert sum(n.startswith("rand_") for n in names) == 8
    assert sum(n.startswith("bump") for n in names) == 4
    for f in ou_bank.nonconstant():
        assert grad_norm_k(ou, f, 1, 2) > 1e-10
    spec_bank = make_test_bank(ou, seed=0, spectral=ou_sd, n_spectral=3)
    assert sum(n.startswith("eig_") for n in spec_bank.names) == 3
    with pytest.raises(ValueError):
        make_test_bank(ou, size=4)


def test_bank_rebuild_on_refined_grid(ou, ou_bank):
    fine = ou.refined()
    assert fine.n == 2 * ou.n + 1
    rb = ou_bank.rebuild(fine)
    assert rb.names == ou_bank.names and rb.tag == fine.tag


def test_bank_2d():
    gm = build_grid(gaussian(0.5, dim=2), 7.0, 65)
    bank = make_test_bank(gm, seed=0)
    assert "radial_bump" in bank.names and "x^1y^0" in bank.names
    assert all(grad_norm_k(gm, f, 1, 2) > 1e-10 for f in bank.nonconstant())


def test_function_csv(tmp_path, ou_small):
    x = ou_small.coordinate()
    path = write_function_csv(ou_small, [x, ou_small.function(x.values**2, "x2")], tmp_path / "f.csv")
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", x.name, "x2"]
    assert len(rows) == ou_small.n + 1
    assert float(rows[1][0]) == -8.0
