import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coerce_lab.discretize import integrate
from coerce_lab.errors import BasisDeficit, Underflow, WindowTooSmall
from coerce_lab.evolve import DecayCurve, decay_curve, evolve, fit_decay_rate, write_curve_csv

from . import oracles


def _l2(gm, f):
    return math.sqrt(float(np.sum(gm.weights * f.values**2)))


def test_constants_are_fixed(ou, ou_op, ou_sd):
    one = ou.constant()
    for t in (0.0, 0.3, 5.0):
        assert np.allclose(evolve(ou_sd, one, t).values, 1.0, atol=1e-8)
    assert np.allclose(evolve(ou_op, one, 0.2, dt=0.01).values, 1.0, atol=1e-9)


def test_ou_flow_of_x(ou, ou_sd):
    x = ou.coordinate()
    xt = evolve(ou_sd, x, 1.0)
    diff = xt - math.exp(-1) * x
    assert _l2(ou, diff) < 0.01 * math.exp(-1) * _l2(ou, x)


def test_schemes_agree(ou_small):
    from coerce_lab.dirichlet import assemble_operator, spectral_decomposition
    from coerce_lab.discretize import make_test_bank

    op = assemble_operator(ou_small)
    sd = spectral_decomposition(op)
    bank = make_test_bank(ou_small, seed=0)
    for name in ("x^3", "He_4", "rand_0", "bump(c=0,s=0.25,j=0)"):
        f = bank.get(name)
        a = evolve(sd, f, 0.5)
        b = evolve(op, f, 0.5, dt=1e-3)
        assert _l2(ou_small, a - b) < 1e-4 * max(1.0, _l2(ou_small, f)), name


def test_mass_conserved(ou, ou_op, ou_sd, ou_bank):
    for f in ou_bank.members[:12]:
        m = integrate(ou, f)
        assert integrate(ou, evolve(ou_sd, f, 0.7)) == pytest.approx(m, abs=1e-9 * (1 + abs(m)))
    f = ou_bank.get("rand_1")
    m = integrate(ou, f)
    assert integrate(ou, evolve(ou_op, f, 0.1, dt=0.01)) == pytest.approx(m, abs=1e-9 * (1 + abs(m)))


@settings(max_examples=20, deadline=None)
@given(s=st.floats(0, 2), t=st.floats(0, 2), member=st.integers(0, 30))
def test_semigroup_property(ou, ou_sd, ou_bank, s, t, member):
    f = ou_bank.members[member % len(ou_bank)]
    a = evolve(ou_sd, evolve(ou_sd, f, s), t)
    b = evolve(ou_sd, f, s + t)
    assert _l2(ou, a - b) <= 1e-8 * (1 + _l2(ou, f))


def test_contraction(ou, ou_sd, ou_bank):
    times = np.linspace(0, 3, 13)
    for f in ou_bank.nonconstant():
        m = integrate(ou, f)
        norms = [_l2(ou, evolve(ou_sd, f, t) - m) for t in times]
        assert all(b <= a * (1 + 1e-12) + 1e-14 for a, b in zip(norms, norms[1:])), f.name


def test_evolve_argument_errors(ou, ou_op, ou_sd, ou_small):
    x = ou.coordinate()
    with pytest.raises(ValueError):
        evolve(ou_sd, x, -1.0)
    with pytest.raises(TypeError):
        evolve(ou_op, x, 1.0, scheme="spectral")
    with pytest.raises(TypeError):
        evolve(ou_sd, x, 1.0, scheme="crank_nicolson")
    with pytest.raises(ValueError):
        evolve(ou_op, x, 1.0, dt=0.0)
    with pytest.raises(ValueError):
        evolve(ou_sd, x, 1.0, scheme="euler")
    with pytest.raises(ValueError):
        evolve(ou_sd, ou_small.coordinate(), 1.0)


def test_basis_deficit(ou, ou_op):
    from coerce_lab.dirichlet import spectral_decomposition

    few = spectral_decomposition(ou_op, 3)
    with pytest.raises(BasisDeficit):
        evolve(few, ou.function(ou.axis**5), 1.0)


def test_decay_curves(ou, ou_sd):
    times = np.linspace(0, 3, 13)
    zero = decay_curve(ou, ou_sd, ou.constant(2.0), 1, times)
    assert np.allclose(zero.values, 0.0, atol=1e-14)
    x = decay_curve(ou, ou_sd, ou.coordinate(), 1, times)
    assert np.allclose(x.values, np.exp(-2 * times), rtol=0.02)
    h2 = ou.function(oracles.hermite(2, ou.axis), "He_2")
    c2 = decay_curve(ou, ou_sd, h2, 1, times)
    ratio = c2.values / c2.values[0]
    assert np.allclose(ratio, np.exp(-4 * times), rtol=0.03)
    assert np.all(np.diff(c2.values) <= 0)
    with pytest.raises(ValueError):
        decay_curve(ou, ou_sd, ou.coordinate(), 4, times)
    with pytest.raises(ValueError):
        decay_curve(ou, ou_sd, ou.coordinate(), 1, times[::-1])


def test_decay_curve_crank_nicolson(ou_small):
    from coerce_lab.dirichlet import assemble_operator, spectral_decomposition

    op = assemble_operator(ou_small)
    sd = spectral_decomposition(op)
    times = np.linspace(0, 1, 6)
    x = ou_small.coordinate()
    a = decay_curve(ou_small, sd, x, 1, times)
    b = decay_curve(ou_small, op, x, 1, times, dt=1e-3)
    assert b.scheme == "crank_nicolson"
    assert np.allclose(a.values, b.values, rtol=1e-4)


def test_fit_exact_exponential():
    t = np.linspace(0, 5, 21)
    curve = DecayCurve(t, 3.0 * np.exp(-2 * t), 1, "spectral")
    assert fit_decay_rate(curve) == pytest.approx(2.0, abs=1e-6)
    assert curve.window == (t[10], t[-1])
    assert curve.fit_residual < 1e-10


def test_fit_ou_rate(ou, ou_sd):
    times = np.linspace(0, 6, 25)
    c = decay_curve(ou, ou_sd, ou.coordinate(), 1, times)
    assert fit_decay_rate(c) == pytest.approx(2.0, rel=0.02)


def test_fit_mixture_moves_to_slowest_mode(ou, ou_sd):
    f = ou.coordinate() + ou.function(oracles.hermite(2, ou.axis))
    times = np.linspace(0, 8, 33)
    c = decay_curve(ou, ou_sd, f, 1, times)
    early = fit_decay_rate(c, (0.0, 1.0))
    late = fit_decay_rate(c, (4.0, 8.0))
    assert 2.0 <= late <= early <= 4.0 + 1e-6
    assert late == pytest.approx(2.0, rel=0.02)


def test_fit_errors():
    t = np.linspace(0, 1, 8)
    with pytest.raises(WindowTooSmall):
        fit_decay_rate(DecayCurve(t, np.exp(-t), 1, "spectral"))
    t = np.linspace(0, 40, 21)
    with pytest.raises(Underflow):
        fit_decay_rate(DecayCurve(t, np.exp(-2 * t), 1, "spectral"))


def test_curve_csv_and_dict(tmp_path):
    t = np.linspace(0, 1, 11)
    c = DecayCurve(t, np.exp(-t), 1, "spectral", "x")
    fit_decay_rate(c)
    d = c.to_dict()
    assert d["rate"] == pytest.approx(1.0) and d["name"] == "x"
    path = write_curve_csv(c, tmp_path / "c.csv")
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "value"] and len(rows) == 12
