"""Decay of higher gradients along the semigroup e^{-tL}.

On O-U, x decays like e^{-t}, so mu|f_t'|^2 decays at rate 2 = 2 m_0. The
Hessian quadratic form (condition (C)) is 2a for gaussian(a) and turns
negative for a double well, where the envelope argument has nothing to
work with.
"""

import numpy as np

from coerce_lab.dirichlet import assemble_operator, spectral_decomposition, spectral_gap
from coerce_lab.discretize import build_grid, make_test_bank
from coerce_lab.evolve import decay_curve, fit_decay_rate
from coerce_lab.potential import double_well, gaussian
from coerce_lab.verify import check_condition_c, check_decay_envelope

gm = build_grid(gaussian(0.5), 8.0, 1025)
op = assemble_operator(gm)
sd = spectral_decomposition(op)
times = np.linspace(0, 6, 25)

curve = decay_curve(gm, sd, gm.coordinate(), 1, times)
print("rate for f0 = x:", fit_decay_rate(curve), " 2 m0 =", 2 * spectral_gap(sd))

# Crank-Nicolson agrees with the spectral flow to the step error
cn = decay_curve(gm, op, gm.coordinate(), 1, times[:7], dt=1e-3)
print("max rel gap spectral vs CN:", np.max(np.abs(cn.values / curve.values[:7] - 1)))

bank = make_test_bank(gm, seed=0)
for k in (1, 2, 3):
    rep = check_decay_envelope(gm, sd, bank, k, np.linspace(0, 4, 17))
    print(f"k={k}: C' = {rep.details['C_prime']:.4f}, later max {rep.details['holdout_max']:.4f}, {rep.checks}")

for U, R in ((gaussian(1.0), 5.7), (double_well(1.0, 1.0), 3.0)):
    g = build_grid(U, R, 513)
    rep = check_condition_c(g, make_test_bank(g, seed=0), 1)
    print(f"{U.label}: m = {rep.constant:.4f} ({rep.details['sign']}, witness {rep.witness})")
