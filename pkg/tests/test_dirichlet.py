import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coerce_lab.dirichlet import (
    apply_fractional,
    assemble_operator,
    dirichlet_form,
    l_norm,
    spectral_decomposition,
    spectral_gap,
    write_eigenvalues_csv,
)
from coerce_lab.discretize import build_grid, integrate, make_test_bank
from coerce_lab.errors import BasisDeficit, GridMismatch
from coerce_lab.potential import double_well, gaussian

from . import oracles


def _ip(gm, f, g):
    return float(np.sum(gm.weights * f.values * g.values))


def test_constants_in_kernel(ou_op, ou):
    assert np.array_equal(ou_op.apply(ou.constant(3.0)).values, np.zeros(ou.shape))


def test_ou_acts_as_x_on_x(ou, ou_op):
    x = ou.coordinate()
    Lx = ou_op.apply(x).values
    inner = np.abs(ou.axis) < 6
    assert np.max(np.abs(Lx[inner] - ou.axis[inner])) < 10 * ou.h**2 * 8


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_symmetric_and_positive(ou_small, seed):
    gm = ou_small
    op = assemble_operator(gm)
    rng = np.random.default_rng(seed)
    f = gm.function(rng.standard_normal(gm.shape))
    g = gm.function(rng.standard_normal(gm.shape))
    nf, ng = math.sqrt(_ip(gm, f, f)), math.sqrt(_ip(gm, g, g))
    assert abs(_ip(gm, g, op.apply(f)) - _ip(gm, op.apply(g), f)) <= 1e-10 * nf * ng * (1 + op.size)
    e = _ip(gm, f, op.apply(f))
    assert e >= 0
    assert e == pytest.approx(dirichlet_form(gm, f), rel=1e-10)


def test_symmetric_2d():
    gm = build_grid(double_well(1.0, 1.0, dim=2), 3.0, 65)
    op = assemble_operator(gm)
    rng = np.random.default_rng(1)
    f = gm.function(rng.standard_normal(gm.shape))
    g = gm.function(rng.standard_normal(gm.shape))
    a, b = _ip(gm, g, op.apply(f)), _ip(gm, op.apply(g), f)
    assert abs(a - b) <= 1e-10 * max(abs(a), 1.0)
    assert np.allclose(op.apply(gm.constant()).values, 0.0)


def test_ou_spectrum(ou_sd):
    lam = ou_sd.eigenvalues[:6]
    assert lam[0] < 1e-10
    for n in range(1, 6):
        assert lam[n] == pytest.approx(n, rel=0.01)
    assert spectral_gap(ou_sd) == pytest.approx(1.0, rel=0.01)
    assert ou_sd.complete and ou_sd.method == "dense tridiagonal"


def test_spectral_invariants(ou, ou_sd):
    V = ou_sd.vectors[:, :40]
    G = V.T @ (ou.weights[:, None] * V)
    assert np.max(np.abs(G - np.eye(40))) < 1e-10
    assert np.all(ou_sd.residuals < 1e-8 * np.maximum(1, np.abs(ou_sd.eigenvalues)))
    assert np.all(ou_sd.eigenvalues >= -1e-10)


def test_eigenfunctions_are_hermite(ou, ou_sd):
    for n in range(1, 5):
        phi = ou_sd.eigenfunction(n).values
        he = oracles.hermite(n, ou.axis) / math.sqrt(math.factorial(n))
        # same up to sign and O(h^2), measured in L2(mu)
        err = min(np.sum(ou.weights * (phi - s * he) ** 2) for s in (1, -1))
        assert math.sqrt(err) < 2e-3


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_gap_scales_with_a(a):
    R = 8.0 / math.sqrt(2 * a)
    gm = build_grid(gaussian(a), R, 1025)
    sd = spectral_decomposition(assemble_operator(gm), n_eigs=4)
    assert spectral_gap(sd) == pytest.approx(2 * a, rel=0.01)


def test_double_well_gap_is_smaller(dwell):
    sd = spectral_decomposition(assemble_operator(dwell), n_eigs=3)
    ou = build_grid(gaussian(0.5), 3.0 * 8 / 3, 513)
    ou_sd = spectral_decomposition(assemble_operator(ou), n_eigs=3)
    assert 0 < spectral_gap(sd) < spectral_gap(ou_sd)


def test_gap_refinement_stable(ou_small):
    a = spectral_gap(spectral_decomposition(assemble_operator(ou_small), 4))
    b = spectral_gap(spectral_decomposition(assemble_operator(ou_small.refined()), 4))
    assert abs(a - b) / b < 0.005


def test_gap_below_rayleigh_quotients(ou, ou_bank, ou_sd):
    gap = spectral_gap(ou_sd)
    for f in ou_bank.nonconstant():
        g = f - integrate(ou, f)
        rq = dirichlet_form(ou, g) / _ip(ou, g, g)
        assert gap <= rq + 1e-8


def test_lanczos_path_matches_dense(ou_small):
    op = assemble_operator(ou_small)
    dense = spectral_decomposition(op, 6)
    gm2 = build_grid(gaussian(0.5, dim=2), 7.0, 65)
    sd2 = spectral_decomposition(assemble_operator(gm2), 8)
    assert sd2.method == "shift-invert Lanczos"
    lam = sd2.eigenvalues
    assert lam[0] < 1e-10
    # 2D O-U: 0, 1, 1, 2, 2, 2, ...
    assert lam[1:3] == pytest.approx([1, 1], rel=0.02)
    assert lam[3:6] == pytest.approx([2, 2, 2], rel=0.02)
    assert dense.eigenvalues[1] == pytest.approx(1.0, rel=0.01)


def test_n_eigs_validation(ou_op):
    with pytest.raises(ValueError):
        spectral_decomposition(ou_op, 1)
    with pytest.raises(ValueError):
        spectral_decomposition(ou_op, ou_op.size + 1)


def test_apply_fractional_examples(ou, ou_op, ou_sd, ou_bank):
    x = ou.coordinate()
    half = apply_fractional(ou_sd, x, 0.5)
    assert np.max(np.abs(half.values - x.values)[np.abs(ou.axis) < 5]) < 1e-3
    for f in ou_bank:
        same = apply_fractional(ou_sd, f, 0)
        assert np.max(np.abs(same.values - f.values)) < 1e-8 * (1 + np.max(np.abs(f.values)))
        # compared in L2(mu); pointwise the far tails carry roundoff divided by sqrt(rho)
        diff = apply_fractional(ou_sd, f, 1) - ou_op.apply(f)
        direct = ou_op.apply(f)
        assert math.sqrt(_ip(ou, diff, diff)) < 1e-6 * (1 + math.sqrt(_ip(ou, direct, direct)))


def test_parseval_and_deficit(ou, ou_op, ou_bank, ou_sd):
    for f in ou_bank:
        c = ou_sd.coefficients(f)
        assert float(c @ c) == pytest.approx(_ip(ou, f, f), rel=1e-8)
    few = spectral_decomposition(ou_op, 3)
    with pytest.raises(BasisDeficit):
        apply_fractional(few, ou.function(ou.axis**4), 1)
    with pytest.raises(ValueError):
        apply_fractional(ou_sd, ou.coordinate(), -1)


def test_l_norm_examples(ou, ou_op, ou_sd, ou_bank):
    assert l_norm(ou, ou_sd, ou.constant(), 2, 2) == pytest.approx(1.0)
    assert l_norm(ou, ou_sd, ou.coordinate(), 1, 2) == pytest.approx(2.0, rel=0.01)
    for f in ou_bank:
        Lf = apply_fractional(ou_sd, f, 1)
        lhs = _ip(ou, Lf, Lf)
        L2f = apply_fractional(ou_sd, f, 2)
        assert lhs == pytest.approx(_ip(ou, f, L2f), rel=1e-8, abs=1e-12)
    with pytest.raises(GridMismatch):
        small = build_grid(gaussian(0.5), 8.0, 257)
        l_norm(small, ou_sd, small.coordinate(), 1, 2)


def test_inner_product_of_x(ou, ou_op):
    # the discrete identity is O(h^2) away from mu|x'|^2 = 1; at this grid
    # size the gap is a few 1e-3, and a fine grid gets it under 1e-6
    x = ou.coordinate()
    assert _ip(ou, x, ou_op.apply(x)) == pytest.approx(1.0, rel=5e-3)
    fine = build_grid(gaussian(0.5), 8.0, 65537)
    xf = fine.coordinate()
    assert dirichlet_form(fine, xf) == pytest.approx(1.0, rel=1e-6)


def test_eigenvalue_csv(tmp_path, ou_sd):
    path = write_eigenvalues_csv(ou_sd, tmp_path / "eig.csv")
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "lambda", "residual"]
    assert len(rows) == ou_sd.count + 1
    assert float(rows[2][1]) == pytest.approx(1.0, rel=0.01)


def test_bank_with_eigenfunctions(ou, ou_sd):
    bank = make_test_bank(ou, seed=0, spectral=ou_sd, n_spectral=4)
    # random combinations of modes 1..8: mean zero, Rayleigh quotient in [lambda_1, lambda_8]
    lam = ou_sd.eigenvalues
    for i in range(4):
        f = bank.get(f"eig_{i}")
        assert abs(integrate(ou, f)) < 1e-10
        c = ou_sd.coefficients(f)
        assert float(c[1:9] @ c[1:9]) == pytest.approx(_ip(ou, f, f), rel=1e-10)
        rq = dirichlet_form(ou, f) / _ip(ou, f, f)
        assert lam[1] - 1e-8 <= rq <= lam[8] + 1e-8
