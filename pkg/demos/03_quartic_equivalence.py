"""Norm equivalence for e^{-x^4}: where the constant 10 stops being enough.

For U = x^4, L x = U'(x) = 4 x^3 and L^2 x = L(4 x^3) = 48 x^5 - 24 x, so
||L^{3/2} x||_2^2 = <L x, L^2 x> = 4 (48 mu(x^8) - 24 mu(x^4)), with moments
mu(x^n) = Gamma((n+1)/4) / Gamma(1/4). The ratio ||x||_{L,3,2} / ||x||~_{3,2}
comes out near 11.3, above the bound 10, and the grid finds worse members.
"""

import math

from scipy.special import gamma

from coerce_lab.dirichlet import assemble_operator, spectral_decomposition
from coerce_lab.discretize import build_grid, make_test_bank
from coerce_lab.potential import even_monomial
from coerce_lab.verify import norm_equivalence_sweep


def moment(n):
    return gamma((n + 1) / 4) / gamma(0.25)


# continuum value: ||L^{3/2} x||^2 = <Lx, L^2 x> = mu(4x^3 * (48x^5 - 24x))
l32 = math.sqrt(4 * (48 * moment(8) - 24 * moment(4)))
x_norm = math.sqrt(moment(2))
print(f"||L^(3/2) x|| = {l32:.4f}, ||x|| = {x_norm:.4f}, ratio r1(x) = {(x_norm + l32) / x_norm:.3f}")

gm = build_grid(even_monomial(4, 1.0), 3.0, 513)
sd = spectral_decomposition(assemble_operator(gm))
bank = make_test_bank(gm, seed=0)
for k in (1, 2, 3):
    rep = norm_equivalence_sweep(gm, sd, bank, k, 2, refine=True)
    d = rep.details
    print(f"k={k}: max r1 {d['max_r1']:.3f} (witness {rep.witness}), max r2 {d['max_r2']:.3f}, "
          f"drift {rep.refinement_delta:.1e}, passed {rep.passed}")
