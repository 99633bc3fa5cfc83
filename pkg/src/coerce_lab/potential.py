"""Potential families U for measures dmu = e^{-U} dx and regularity checks.

Every family is built symbolically once (sympy) and lambdified, so the
partial derivatives handed out by :func:`eval_derivatives` are exact closed
forms rather than finite differences. In two dimensions the families are
radial in ``|x|^2 = x0^2 + x1^2`` except ``polynomial``, which takes an
arbitrary coefficient map.

The regularity checks (ARC, assumption A_m, gradient growth) are grid-sup
certificates: they scan the grid nodes, then rescan on a box of twice the
radius with the same spacing and flag whether the supremum moved.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from .errors import OrderUnsupported

__all__ = [
    "BoundedPerturbation",
    "PotentialSpec",
    "gaussian",
    "even_monomial",
    "smoothed_power",
    "double_well",
    "polynomial",
    "sine_perturbation",
    "multi_indices",
    "multinomial",
    "eval_potential",
    "eval_derivatives",
    "gradient_norm",
    "derivative_tensor_norm",
    "ARCReport",
    "AmReport",
    "GrowthReport",
    "check_arc",
    "check_assumption_am",
    "check_gradient_growth",
]

POLY_MAX_ORDER = 6
SMOOTHED_MAX_ORDER = 4


def multi_indices(dim, order):
    """All multi-indices ``alpha`` in ``dim`` variables with ``|alpha| == order``.

    Ordered lexicographically descending in the first coordinate, so
    ``multi_indices(2, 2)`` is ``[(2, 0), (1, 1), (0, 2)]``.
    """
    if dim == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices(dim - 1, order - first):
            out.append((first,) + rest)
    return out


def multinomial(alpha):
    """Number of ordered index sequences that collapse to ``alpha``."""
    n = math.factorial(sum(alpha))
    for a in alpha:
        n //= math.factorial(a)
    return n


@dataclass(frozen=True, eq=False)
class BoundedPerturbation:
    """Bounded measurable V, evaluated on coordinate arrays.

    ``v`` takes ``dim`` coordinate arrays and returns values of the same
    shape. ``osc_bound`` is a certified upper bound for ``sup V - inf V``.
    """

    v: Callable[..., np.ndarray]
    osc_bound: float
    name: str = "V"

    def __call__(self, *coords):
        return np.asarray(self.v(*coords), dtype=float)


def sine_perturbation(amplitude, frequency=1.0, axis=0):
    """``V(x) = amplitude * sin(frequency * x_axis)``; oscillation at most ``2|amplitude|``."""

    def v(*coords):
        return amplitude * np.sin(frequency * np.asarray(coords[axis], dtype=float))

    return BoundedPerturbation(
        v=v,
        osc_bound=2.0 * abs(amplitude),
        name=f"{amplitude:g}*sin({frequency:g}*x{axis})",
    )


@dataclass(frozen=True)
class PotentialSpec:
    """A member of one of the shipped potential families.

    ``params`` is a tuple of ``(name, value)`` pairs so the spec is hashable;
    use the module-level constructors rather than building it directly.
    """

    family: str
    params: tuple
    dim: int = 1
    perturbation: BoundedPerturbation | None = field(default=None, compare=False)

    @property
    def param_dict(self):
        return dict(self.params)

    @property
    def max_order(self):
        return SMOOTHED_MAX_ORDER if self.family == "smoothed_power" else POLY_MAX_ORDER

    @property
    def label(self):
        inner = ",".join(f"{k}={_fmt(v)}" for k, v in self.params)
        s = f"{self.family}({inner};dim={self.dim})"
        if self.perturbation is not None:
            s += f"+{self.perturbation.name}"
        return s

    def with_perturbation(self, perturbation):
        return PotentialSpec(self.family, self.params, self.dim, perturbation)

    def base(self):
        return PotentialSpec(self.family, self.params, self.dim, None)


def _fmt(v):
    if isinstance(v, tuple):
        return "[" + ";".join(_fmt(x) for x in v) + "]"
    return f"{v:g}" if isinstance(v, float) else str(v)


def _check_dim(dim):
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")


def gaussian(a=0.5, dim=1):
    """``U = a |x|^2``; ``a = 1/2`` is the Ornstein-Uhlenbeck measure."""
    _check_dim(dim)
    if not a > 0:
        raise ValueError("gaussian requires a > 0")
    return PotentialSpec("gaussian", (("a", float(a)),), dim)


def even_monomial(degree=4, scale=1.0, dim=1):
    """``U = scale * |x|^degree`` with an even degree >= 2."""
    _check_dim(dim)
    if degree < 2 or degree % 2:
        raise ValueError("even_monomial requires an even degree >= 2")
    if not scale > 0:
        raise ValueError("even_monomial requires scale > 0")
    return PotentialSpec("even_monomial", (("degree", int(degree)), ("scale", float(scale))), dim)


def smoothed_power(alpha=1.0, delta=0.1, dim=1):
    """``U = |x|^alpha`` for ``|x| >= delta``, smoothed inside the ball.

    Inside, U is the even polynomial ``sum_{i<=4} c_i |x|^{2i}`` matching
    the value and the first four radial derivatives of ``r^alpha`` at
    ``r = delta``; being a polynomial in ``|x|^2`` it is smooth at the origin.
    """
    _check_dim(dim)
    if alpha < 1:
        raise ValueError("smoothed_power requires alpha >= 1")
    if not delta > 0:
        raise ValueError("smoothed_power requires delta > 0")
    return PotentialSpec("smoothed_power", (("alpha", float(alpha)), ("delta", float(delta))), dim)


def double_well(a=1.0, b=1.0, dim=1):
    """``U = a (|x|^2 - b)^2``."""
    _check_dim(dim)
    if not (a > 0 and b > 0):
        raise ValueError("double_well requires a, b > 0")
    return PotentialSpec("double_well", (("a", float(a)), ("b", float(b))), dim)


def polynomial(coefficients, dim=1):
    """Semibounded polynomial potential from ``{multi-index: coefficient}``.

    Integer keys are accepted in one dimension. The top-degree homogeneous
    part must be even and strictly positive away from the origin, which is
    what makes ``e^{-U}`` integrable.
    """
    _check_dim(dim)
    items = []
    for key, c in dict(coefficients).items():
        alpha = (int(key),) if np.isscalar(key) else tuple(int(a) for a in key)
        if len(alpha) != dim or min(alpha) < 0:
            raise ValueError(f"bad multi-index {key!r} for dim={dim}")
        if c != 0:
            items.append((alpha, float(c)))
    items.sort()
    if not items:
        raise ValueError("polynomial potential needs nonzero coefficients")
    top = max(sum(a) for a, _ in items)
    if top < 2 or top % 2:
        raise ValueError("polynomial potential must have even top degree >= 2")
    theta = np.linspace(0.0, 2 * np.pi, 721)
    dirs = [np.ones(1), -np.ones(1)] if dim == 1 else [np.cos(theta), np.sin(theta)]
    if dim == 1:
        lead = sum(c for a, c in items if sum(a) == top)
        ok = lead > 0
    else:
        lead = sum(c * dirs[0] ** a[0] * dirs[1] ** a[1] for a, c in items if sum(a) == top)
        ok = bool(np.all(lead > 0))
    if not ok:
        raise ValueError("polynomial potential is not semibounded (top part not positive)")
    return PotentialSpec("polynomial", (("coefficients", tuple(items)),), dim)


def _blend_coefficients(alpha, delta):
    # sum_i c_i r^{2i}, i = 0..4, matching r^alpha and 4 derivatives at delta
    A = np.zeros((5, 5))
    b = np.zeros(5)
    for m in range(5):
        b[m] = math.prod(alpha - j for j in range(m)) * delta ** (alpha - m)
        for i in range(5):
            n = 2 * i
            if n >= m:
                A[m, i] = math.prod(n - j for j in range(m)) * delta ** (n - m)
    return np.linalg.solve(A, b)


@functools.lru_cache(maxsize=64)
def _symbolic(family, params, dim):
    xs = sp.symbols(f"x0:{dim}")
    s = sum(x**2 for x in xs)
    p = dict(params)
    if family == "gaussian":
        expr = sp.Float(p["a"]) * s
    elif family == "even_monomial":
        expr = sp.Float(p["scale"]) * s ** (p["degree"] // 2)
    elif family == "double_well":
        expr = sp.Float(p["a"]) * (s - sp.Float(p["b"])) ** 2
    elif family == "polynomial":
        expr = sum(
            sp.Float(c) * sp.Mul(*[x**k for x, k in zip(xs, alpha)])
            for alpha, c in p["coefficients"]
        )
    elif family == "smoothed_power":
        alpha, delta = p["alpha"], p["delta"]
        c = _blend_coefficients(alpha, delta)
        inner = sum(sp.Float(ci) * s**i for i, ci in enumerate(c))
        # (inner branch, outer branch); the switch sits at |x| = delta
        return xs, (sp.expand(inner), s ** (sp.Float(alpha) / 2))
    else:
        raise ValueError(f"unknown family {family!r}")
    return xs, (sp.expand(expr),)


@functools.lru_cache(maxsize=64)
def _derivative_functions(family, params, dim, order):
    xs, branches = _symbolic(family, params, dim)
    funcs = {}
    for k in range(order + 1):
        for alpha in multi_indices(dim, k):
            fns = []
            for expr in branches:
                d = expr
                for x, a in zip(xs, alpha):
                    if a:
                        d = sp.diff(d, x, a)
                fns.append(sp.lambdify(xs, d, modules="numpy"))
            funcs[alpha] = fns
    return funcs


def _coords(U, x):
    x = np.asarray(x, dtype=float)
    if U.dim == 1:
        return (x,)
    if x.shape[-1] != 2:
        raise ValueError("2D potentials expect points with a trailing axis of length 2")
    return (x[..., 0], x[..., 1])


def _eval_funcs(funcs, coords, inner_mask=None):
    shape = np.broadcast(*coords).shape
    out = {}
    with np.errstate(all="ignore"):
        for alpha, fns in funcs.items():
            vals = [np.broadcast_to(np.asarray(fn(*coords), dtype=float), shape) for fn in fns]
            out[alpha] = np.array(vals[0] if len(vals) == 1 else np.where(inner_mask, vals[0], vals[1]))
    return out


def base_derivatives_at(U, coords, order):
    """Exact partials of the unperturbed potential at coordinate arrays."""
    if order > U.max_order:
        raise OrderUnsupported(
            f"{U.family} provides derivatives up to order {U.max_order}, asked {order}"
        )
    funcs = _derivative_functions(U.family, U.params, U.dim, order)
    mask = None
    if U.family == "smoothed_power":
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        mask = r2 < U.param_dict["delta"] ** 2
    return _eval_funcs(funcs, coords, mask)


def potential_at(U, coords):
    """U (including any perturbation) at coordinate arrays."""
    val = base_derivatives_at(U, coords, 0)[(0,) * U.dim]
    if U.perturbation is not None:
        val = val + U.perturbation(*coords)
    return val


def eval_potential(U, x):
    """Value of U at a point (or array of points; trailing axis = dim in 2D)."""
    val = potential_at(U, _coords(U, x))
    return float(val) if val.ndim == 0 else val


def eval_derivatives(U, x, order):
    """All partials ``d^alpha U`` with ``|alpha| <= order`` as ``{alpha: value}``.

    Derivatives are those of the smooth family member; a bounded
    perturbation, being merely measurable, contributes to values only.
    """
    vals = base_derivatives_at(U, _coords(U, x), order)
    return {a: (float(v) if v.ndim == 0 else v) for a, v in vals.items()}


def gradient_norm(U, coords):
    d = base_derivatives_at(U, coords, 1)
    return np.sqrt(sum(d[a] ** 2 for a in multi_indices(U.dim, 1)))


def derivative_tensor_norm(U, coords, k, derivs=None):
    """Frobenius norm of the order-k derivative tensor (with index multiplicity)."""
    d = derivs if derivs is not None else base_derivatives_at(U, coords, k)
    return np.sqrt(sum(multinomial(a) * d[a] ** 2 for a in multi_indices(U.dim, k)))


def _extended_coords(gm, factor=2.0):
    n_half = int(round(factor * gm.radius / gm.h))
    axis = gm.h * np.arange(-n_half, n_half + 1)
    return tuple(np.meshgrid(*([axis] * gm.dim), indexing="ij"))


@dataclass
class ARCReport:
    epsilon: float
    c_min: float
    satisfied: bool
    argmax_point: tuple
    radius: float
    extended_c: float
    refinement_ratio: float
    in_smoothing_zone: bool | None = None


def _arc_ratio(U, coords, epsilon):
    d = base_derivatives_at(U, coords, 2)
    second = sum(np.abs(d[a]) for a in multi_indices(U.dim, 2))
    grad = np.sqrt(sum(d[a] ** 2 for a in multi_indices(U.dim, 1)))
    return second / (1.0 + grad) ** (2.0 - epsilon)


def check_arc(U, gm, epsilon):
    """Grid certificate for ``sum_{|a|=2} |d^a U| <= C (1 + |grad U|)^{2-eps}``.

    ``c_min`` is the smallest C that works on the grid nodes. The check is
    repeated on a box of twice the radius; ``satisfied`` means the sup did
    not grow there (ratio within 1e-9), i.e. it is attained inside the box.
    """
    if not 0 < epsilon < 2:
        raise ValueError("epsilon must lie in (0, 2)")
    r = _arc_ratio(U, gm.coords, epsilon)
    i = np.unravel_index(np.argmax(r), r.shape)
    c = float(r[i])
    c_ext = float(np.max(_arc_ratio(U, _extended_coords(gm), epsilon)))
    point = tuple(float(x[i]) for x in gm.coords)
    zone = None
    if U.family == "smoothed_power":
        zone = math.hypot(*point) < U.param_dict["delta"]
    ratio = c_ext / c if c > 0 else (1.0 if c_ext == 0 else math.inf)
    return ARCReport(
        epsilon=float(epsilon),
        c_min=c,
        satisfied=bool(np.isfinite(c) and ratio <= 1 + 1e-9),
        argmax_point=point,
        radius=gm.radius,
        extended_c=c_ext,
        refinement_ratio=ratio,
        in_smoothing_zone=zone,
    )


@dataclass
class AmReport:
    m: int
    epsilon: float
    k2_constant: float
    constants: dict
    satisfied: bool
    extension_ratios: dict


def _am_constants(U, coords, m, epsilon):
    d = base_derivatives_at(U, coords, m)
    grad = np.sqrt(sum(d[a] ** 2 for a in multi_indices(U.dim, 1)))
    out = {}
    for k in range(2, m + 1):
        expo = 2.0 - epsilon if k == 2 else float(k)
        out[k] = float(np.max(derivative_tensor_norm(U, coords, k, d) / (1.0 + grad) ** expo))
    return out


def check_assumption_am(U, gm, m, epsilon):
    """Grid constants K_k = max |d^k U| / (1 + |grad U|)^k for 3 <= k <= m.

    The order-2 entry (``k2_constant``) uses exponent ``2 - epsilon``.
    Tensor norms are Frobenius norms over all index sequences.
    """
    if m < 3:
        raise ValueError("assumption A_m is stated for m >= 3")
    inner = _am_constants(U, gm.coords, m, epsilon)
    outer = _am_constants(U, _extended_coords(gm), m, epsilon)
    ratios = {
        k: (outer[k] / inner[k] if inner[k] > 0 else (1.0 if outer[k] == 0 else math.inf))
        for k in inner
    }
    ok = all(np.isfinite(inner[k]) and ratios[k] <= 1 + 1e-9 for k in inner)
    return AmReport(
        m=m,
        epsilon=float(epsilon),
        k2_constant=inner[2],
        constants={k: inner[k] for k in range(3, m + 1)},
        satisfied=bool(ok),
        extension_ratios=ratios,
    )


@dataclass
class GrowthReport:
    radii: list
    eta: list
    nondecreasing: bool
    divergent: bool
    note: str


def check_gradient_growth(U, gm, radii=None):
    """``eta(R) = 1 + inf_{|x| >= R} |grad U|`` over a ladder of radii in the box.

    ``divergent`` requires strict growth at every rung; a saturating
    gradient (e.g. ``|x|`` far out) is flagged as failing the hypothesis
    ``|grad U| -> infinity``.
    """
    if radii is None:
        radii = [gm.radius * f for f in (0.25, 0.4, 0.55, 0.7, 0.85)]
    radii = [float(r) for r in radii]
    if len(radii) < 4 or max(radii) >= gm.radius:
        raise ValueError("need at least 4 radii inside the truncation box")
    dist = np.sqrt(sum(x**2 for x in gm.coords))
    g = gradient_norm(U, gm.coords)
    eta = [1.0 + float(np.min(g[dist >= r - 1e-12])) for r in radii]
    steps = np.diff(eta)
    nondecreasing = bool(np.all(steps >= -1e-12))
    divergent = bool(np.all(steps > 1e-9 * np.abs(eta[:-1])))
    note = (
        "eta(R) grows along the ladder; consistent with |grad U| -> infinity"
        if divergent
        else "eta(R) does not grow along the ladder; the |grad U| -> infinity hypothesis fails"
    )
    return GrowthReport(radii, eta, nondecreasing, divergent, note)
