"""Best approximation by polynomials and constants in L_q(mu) and Orlicz norms.

Three minimizers are provided.

* ``lq_min_polynomial``: the polynomial M_{k,q}(f) of total degree at most
  k-1 minimizing ``mu|f - w|^q``. The objective is strictly convex for
  1 < q < inf, so the minimizer is unique. It is computed in a
  mu-orthonormal basis (weighted QR of the monomial Vandermonde matrix):
  a projection for q = 2, damped Newton for q > 2, and iteratively
  reweighted least squares for q < 2.
* ``orlicz_shift_minimizer``: the constant a* minimizing ``||f - a||_Phi``.
  At the optimum ``mu Phi'((f - a*)/||f - a*||_Phi) = 0``, and the left side
  is decreasing in a, so after a golden-section search the root is polished
  by bisection.
* ``subspace_minimizer``: the same problem over the span of a finite basis,
  solved by coordinate descent with the stationarity condition per
  coordinate.

``downhill_polynomial`` assembles a degree k-1 polynomial top-down from
order-zero minimizers of the derivatives of f: at level j every multi-index
beta with |beta| = j contributes ``M_{1,q}(d^beta f - d^beta P) x^beta / beta!``
where P collects the higher levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .discretize import GridFunction, _check, derivative, integrate
from .errors import ConstantFunction, DegenerateBasis, NonConvergence, OrderUnsupported, QOutOfRange
from .orlicz import _luxemburg_values, phi_inverse
from .potential import multi_indices

__all__ = [
    "Polynomial",
    "MinimizerResult",
    "lq_min_polynomial",
    "orlicz_shift_minimizer",
    "subspace_minimizer",
    "downhill_polynomial",
    "lp_shift_bounds",
    "IRLS_FLOOR",
    "MAX_ITER",
]

IRLS_FLOOR = 1e-12
MAX_ITER = 500
STEP_TOL = 1e-10


class Polynomial:
    """``sum_alpha c_alpha x^alpha`` in ``dim`` variables (plain monomials)."""

    def __init__(self, dim, coeffs=None):
        self.dim = int(dim)
        self.coeffs = {}
        for alpha, c in dict(coeffs or {}).items():
            alpha = (int(alpha),) if np.isscalar(alpha) else tuple(int(a) for a in alpha)
            if len(alpha) != self.dim or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha}")
            if c != 0:
                self.coeffs[alpha] = self.coeffs.get(alpha, 0.0) + float(c)

    @classmethod
    def zero(cls, dim):
        return cls(dim)

    @property
    def degree(self):
        return max((sum(a) for a in self.coeffs), default=-1)

    def __repr__(self):
        return f"Polynomial({self.to_json()})"

    def coefficient(self, alpha):
        return self.coeffs.get(tuple(alpha), 0.0)

    def __add__(self, other):
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0.0) + c
        return Polynomial(self.dim, out)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, s):
        return Polynomial(self.dim, {a: s * c for a, c in self.coeffs.items()})

    def __call__(self, *coords):
        coords = [np.asarray(c, dtype=float) for c in coords]
        out = np.zeros(np.broadcast(*coords).shape)
        for alpha, c in self.coeffs.items():
            term = np.full(out.shape, c)
            for x, a in zip(coords, alpha):
                if a:
                    term = term * x**a
            out = out + term
        return out

    def on_grid(self, gm, name=None):
        return GridFunction(self(*gm.coords), gm.tag, name or "poly")

    def derivative(self, alpha):
        """Exact ``d^alpha`` of the polynomial."""
        out = {}
        for gamma, c in self.coeffs.items():
            if all(g >= a for g, a in zip(gamma, alpha)):
                k = c
                for g, a in zip(gamma, alpha):
                    k *= math.perm(g, a)
                key = tuple(g - a for g, a in zip(gamma, alpha))
                out[key] = out.get(key, 0.0) + k
        return Polynomial(self.dim, out)

    def to_json(self):
        return {",".join(map(str, a)): c for a, c in sorted(self.coeffs.items())}

    @classmethod
    def from_json(cls, dim, data):
        return cls(dim, {tuple(int(t) for t in k.split(",")): v for k, v in data.items()})

    def max_coefficient_gap(self, other):
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self.coefficient(a) - other.coefficient(a)) for a in keys), default=0.0)


@dataclass
class MinimizerResult:
    minimizer: object
    distance: float
    iterations: int
    residual: float
    converged: bool
    unique: bool | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        m = self.minimizer
        if isinstance(m, Polynomial):
            m = m.to_json()
        elif isinstance(m, np.ndarray):
            m = m.tolist()
        return {
            "minimizer": m,
            "distance": self.distance,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "unique": self.unique,
            "extra": {k: v for k, v in self.extra.items() if not isinstance(v, GridFunction)},
        }


def _all_indices(dim, max_degree):
    return [a for d in range(max_degree + 1) for a in multi_indices(dim, d)]


def _orthonormal_basis(gm, k):
    """mu-orthonormal basis of polynomials of degree < k at the nodes.

    Returns (indices, Q, T) with ``Q = V T``: columns of Q are orthonormal
    in the weighted inner product and T maps Q-coefficients to monomial ones.
    """
    idx = _all_indices(gm.dim, k - 1)
    sig = [max(float(np.sqrt(np.dot(gm.weights.ravel(), c.ravel() ** 2))), 1e-300) for c in gm.coords]
    cols = []
    for alpha in idx:
        v = np.ones(gm.size)
        for c, a, s in zip(gm.coords, alpha, sig):
            if a:
                v = v * (c.ravel() / s) ** a
        cols.append(v)
    V = np.column_stack(cols)
    sw = np.sqrt(gm.weights.ravel())
    Q, R = np.linalg.qr(sw[:, None] * V)
    if np.min(np.abs(np.diag(R))) < 1e-13 * np.max(np.abs(np.diag(R))):
        raise DegenerateBasis("polynomial basis is rank deficient on this grid")
    T = np.linalg.solve(R, np.eye(len(idx)))
    scale = np.array([math.prod(s**a for s, a in zip(sig, alpha)) for alpha in idx])
    return idx, Q / sw[:, None], T / scale[:, None]


def _objective(w, r, q):
    return float(np.dot(w, np.abs(r) ** q))


def _gradient(w, B, r, q):
    return -q * (B.T @ (w * np.abs(r) ** (q - 1) * np.sign(r)))


def _solve_lq(w, B, f, q, c0, max_iter):
    c = c0.copy()
    fscale = max(float(np.dot(w, np.abs(f) ** q)) ** (1.0 / q), 1e-300)
    it = 0
    for it in range(1, max_iter + 1):
        r = f - B @ c
        J = _objective(w, r, q)
        if J ** (1.0 / q) <= 1e-14 * fscale:
            return c, it, True
        if q > 2:
            g = _gradient(w, B, r, q)
            H = q * (q - 1) * (B.T @ ((w * np.abs(r) ** (q - 2))[:, None] * B))
            H = H + 1e-14 * np.trace(H) * np.eye(len(c))
            step = -np.linalg.solve(H, g)
            t = 1.0
            while t > 1e-12 and _objective(w, f - B @ (c + t * step), q) > J:
                t *= 0.5
            step = t * step
        else:
            om = w * np.maximum(np.abs(r), IRLS_FLOOR) ** (q - 2)
            G = B.T @ (om[:, None] * B)
            step = np.linalg.solve(G, B.T @ (om * f)) - c
        c = c + step
        if np.linalg.norm(step) < STEP_TOL * max(1.0, np.linalg.norm(c)):
            return c, it, True
    return c, it, False


def lq_min_polynomial(gm, f, k, q, check_uniqueness=True):
    """The polynomial of degree < k closest to ``f`` in ``L_q(mu)``.

    ``distance`` is ``||f - M||_q``. ``residual`` is the norm of the
    objective gradient in the orthonormal coordinates; ``unique`` records
    whether a second solve from the zero start reaches the same distance
    (relative 1e-7).
    """
    _check(gm, f)
    if not (np.isfinite(q) and q > 1):
        raise QOutOfRange(f"q must lie in (1, inf), got {q}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > 5:
        raise OrderUnsupported("minimizing polynomials are supported up to degree 4")
    idx, B, T = _orthonormal_basis(gm, k)
    w = gm.weights.ravel()
    fv = f.values.ravel()
    c_l2 = B.T @ (w * fv)
    if q == 2:
        c, it, ok = c_l2, 1, True
    else:
        c, it, ok = _solve_lq(w, B, fv, q, c_l2, MAX_ITER)
    r = fv - B @ c
    dist = _objective(w, r, q) ** (1.0 / q)
    poly = Polynomial(gm.dim, dict(zip(idx, T @ c)))
    resid = float(np.linalg.norm(_gradient(w, B, r, q)))
    fq = _objective(w, fv, q) ** (1.0 / q)
    wq = _objective(w, B @ c, q) ** (1.0 / q)
    res = MinimizerResult(
        poly,
        dist,
        it,
        resid,
        ok,
        extra={
            "q": q,
            "k": k,
            "method": "projection" if q == 2 else ("newton" if q > 2 else f"irls(floor={IRLS_FLOOR:g})"),
            "minimizer_norm": wq,
            "f_norm": fq,
            "candidate_bound_ok": bool(wq <= 2 * fq + 1e-9),
            "zero_candidate_ok": bool(dist <= fq * (1 + 1e-12) + 1e-300),
        },
    )
    if not ok:
        raise NonConvergence(f"L_{q} minimization did not converge in {MAX_ITER} iterations", res)
    if check_uniqueness and q != 2:
        c2, _, ok2 = _solve_lq(w, B, fv, q, np.zeros_like(c), MAX_ITER)
        d2 = _objective(w, fv - B @ c2, q) ** (1.0 / q)
        res.unique = bool(ok2 and abs(d2 - dist) <= 1e-7 * max(dist, 1e-300) + 1e-14 * fq)
        res.extra["second_start_distance"] = d2
    elif check_uniqueness:
        res.unique = True
    return res


def _phi_stationarity(w, values, a, phi):
    r = values - a
    d = _luxemburg_values(w, r, phi)
    if d == 0:
        return 0.0, 0.0
    return float(np.dot(w, phi.derivative(r / d))), d


def orlicz_shift_minimizer(gm, f, phi, weights=None, tol=1e-14):
    """The constant ``a*`` minimizing ``||f - a||_Phi``.

    ``residual`` is ``|mu Phi'((f - a*)/||f - a*||_Phi)|``; the result is
    marked converged when it is below 1e-8.
    """
    _check(gm, f)
    w = gm.weights.ravel() if weights is None else np.asarray(weights, dtype=float).ravel()
    v = f.values.ravel()
    lo, hi = float(v.min()), float(v.max())
    scale = max(abs(lo), abs(hi))
    if hi - lo <= 1e-14 * max(scale, 1e-300):
        raise ConstantFunction(f"{f.name!r} is constant; the minimizer is that constant")
    D = lambda a: _luxemburg_values(w, v - a, phi)
    # golden-section on the convex map a -> ||f - a||
    gr = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - gr * (b - a), a + gr * (b - a)
    Dc, Dd = D(c), D(d)
    it = 0
    while b - a > 1e-6 * (hi - lo):
        it += 1
        if Dc < Dd:
            b, d, Dd = d, c, Dc
            c = b - gr * (b - a)
            Dc = D(c)
        else:
            a, c, Dc = c, d, Dd
            d = a + gr * (b - a)
            Dd = D(d)
    # bisection on the stationarity sign, which decreases in a
    S = lambda t: _phi_stationarity(w, v, t, phi)[0]
    a, b = max(lo, a - (hi - lo) * 1e-6), min(hi, b + (hi - lo) * 1e-6)
    if S(a) < 0:
        a = lo
    if S(b) > 0:
        b = hi
    while b - a > tol * max(scale, hi - lo):
        it += 1
        m = 0.5 * (a + b)
        if S(m) > 0:
            a = m
        else:
            b = m
        if it > 10_000:
            break
    # pick the endpoint with the smaller residual
    sa, sb = abs(S(a)), abs(S(b))
    astar = a if sa <= sb else b
    resid, dist = _phi_stationarity(w, v, astar, phi)
    resid = abs(resid)
    return MinimizerResult(
        float(astar),
        float(dist),
        it,
        resid,
        bool(resid < 1e-8),
        extra={"phi": phi.label, "bracket": [lo, hi]},
    )


def subspace_minimizer(gm, f, phi, basis, weights=None, max_sweeps=MAX_ITER, tol=1e-12):
    """Minimize ``||f - sum_i c_i b_i||_Phi`` over the span of ``basis``.

    Coordinate descent: each coordinate solves ``mu(Phi'(u) b_i) = 0`` with
    ``u`` the normalized residual, which is a monotone root problem because
    the norm is convex along every line.
    """
    _check(gm, f)
    if not basis:
        raise DegenerateBasis("empty basis")
    for b in basis:
        _check(gm, b)
    w = gm.weights.ravel() if weights is None else np.asarray(weights, dtype=float).ravel()
    Bm = np.column_stack([b.values.ravel() for b in basis])
    G = Bm.T @ (w[:, None] * Bm)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        raise DegenerateBasis(f"basis Gram matrix is singular (condition {cond:.3g})")
    fv = f.values.ravel()
    # start from the L2 projection
    c = np.linalg.solve(G, Bm.T @ (w * fv))
    bnorm = np.sqrt(np.diag(G))

    def coord_score(r, bi):
        d = _luxemburg_values(w, r, phi)
        if d == 0:
            return 0.0
        return float(np.dot(w, phi.derivative(r / d) * bi))

    fscale = max(_luxemburg_values(w, fv, phi), 1e-300)
    sweeps = 0
    converged = False
    for sweeps in range(1, max_sweeps + 1):
        biggest = 0.0
        for i in range(len(basis)):
            bi = Bm[:, i]
            r0 = fv - Bm @ c
            g = lambda t: coord_score(r0 - t * bi, bi)
            g0 = g(0.0)
            if g0 == 0.0:
                continue
            step = fscale / bnorm[i]
            sgn = 1.0 if g0 > 0 else -1.0
            far = sgn * step
            n = 0
            while g(far) * sgn > 0 and n < 200:
                far *= 2.0
                n += 1
            a, b = (0.0, far) if far > 0 else (far, 0.0)
            t = brentq(g, a, b, xtol=1e-16 * fscale / bnorm[i], rtol=4 * np.finfo(float).eps, maxiter=500)
            c[i] += t
            biggest = max(biggest, abs(t) * bnorm[i])
        if biggest <= tol * fscale:
            converged = True
            break
    r = fv - Bm @ c
    dist = _luxemburg_values(w, r, phi)
    resid = max(abs(coord_score(r, Bm[:, i])) for i in range(len(basis))) if dist > 0 else 0.0
    proj = GridFunction((Bm @ c).reshape(gm.shape), gm.tag, f"proj[{f.name}]")
    return MinimizerResult(
        c.copy(),
        float(dist),
        sweeps,
        float(resid),
        bool(converged),
        extra={"phi": phi.label, "basis": [b.name for b in basis], "projection": proj},
    )


def _level_constant(gm, g, q):
    # order-zero L_q minimizer (a constant)
    if q == 2:
        return integrate(gm, g)
    res = lq_min_polynomial(gm, g, 1, q, check_uniqueness=False)
    return res.minimizer.coefficient((0,) * gm.dim)


def downhill_polynomial(gm, f, k, q):
    """Top-down assembly of a degree ``k-1`` polynomial from derivative data.

    Level ``j = k-1, ..., 0`` adds ``M_{1,q}(d^beta f - d^beta P) x^beta / beta!``
    for every ``|beta| = j``, with P the sum of the higher levels. Derivatives
    of f are finite differences; those of P are exact.
    """
    _check(gm, f)
    if not 1 <= k <= 4:
        raise OrderUnsupported("downhill construction supports 1 <= k <= 4")
    if not (np.isfinite(q) and q > 1):
        raise QOutOfRange(f"q must lie in (1, inf), got {q}")
    P = Polynomial.zero(gm.dim)
    for level in range(k - 1, -1, -1):
        add = {}
        for beta in multi_indices(gm.dim, level):
            dfb = derivative(gm, f, beta)
            dpb = P.derivative(beta)
            g = GridFunction(dfb.values - dpb(*gm.coords), gm.tag, f"d{beta}")
            c = _level_constant(gm, g, q)
            add[beta] = c / math.prod(math.factorial(b) for b in beta)
        P = P + Polynomial(gm.dim, add)
    return P


def lp_shift_bounds(gm, f, p, z_grid):
    """Both sides of the two-sided L_p shift bounds over a grid of shifts z.

    Returns ``(lower, sup_dist, upper, sup_shift, shift_bound)`` with
    ``lower = ||f - mu f||_p / 2``, ``upper = ||f - mu f||_p``,
    ``sup_dist = max_z ||(f+z) - M_p(f+z)||_p``,
    ``sup_shift = max_z |M_p(f+z) - z|`` and
    ``shift_bound = |mu f| + ||f - mu f||_p``.
    """
    mf = integrate(gm, f)
    w = gm.weights.ravel()
    cen = float(np.dot(w, np.abs(f.values.ravel() - mf) ** p)) ** (1.0 / p)
    dists, shifts = [], []
    for z in z_grid:
        r = lq_min_polynomial(gm, f + float(z), 1, p, check_uniqueness=False)
        dists.append(r.distance)
        shifts.append(abs(r.minimizer.coefficient((0,) * gm.dim) - z))
    return 0.5 * cen, max(dists), cen, max(shifts), abs(mf) + cen
