"""Truncated tensor grids carrying a normalized measure, plus weighted Sobolev norms.

The measure ``dmu = e^{-U} dx / Z`` is replaced by point masses on a uniform
grid over the box ``[-R, R]^dim``:

    w_i = rho_i h^dim / sum_j rho_j h^dim,     rho_i = exp(-(U(x_i) - min U)).

Shifting U by its minimum before exponentiating only rescales Z and keeps
the density from underflowing near the center. The same nodes serve three
purposes: quadrature (``integrate``), finite differences (``derivative``),
and, in :mod:`coerce_lab.dirichlet`, the flux assembly of the generator.

Derivatives are repeated per-axis second-order central differences
(``np.gradient`` with ``edge_order=2``), so any ``d^alpha`` is exact at
interior nodes on polynomials of degree at most 2 along each axis.

With ``|grad^k f|^p = sum_{|alpha|=k} |d^alpha f|^p`` (each multi-index
counted once) the norms are

    ||f||_{m,p}^p = sum_{|alpha| <= m} mu |d^alpha f|^p,
    ||f||~_{k,p}  = ||f||_p + ||grad^k f||_p.

The truncation error is not bounded rigorously. ``build_grid`` reports a
Laplace-type estimate of the mass outside the box,

    mu(box^c) ~ sum_{boundary nodes} rho_i h^{dim-1} / d_n U(x_i) / Z,

and refuses grids where it exceeds 1e-8.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite_e

from .errors import GridMismatch, OrderUnsupported, TailTooHeavy, ZeroFunction
from .potential import PotentialSpec, base_derivatives_at, multi_indices, potential_at

__all__ = [
    "GridMeasure",
    "GridFunction",
    "TestBank",
    "TAIL_LIMIT",
    "MAX_DERIVATIVE_ORDER",
    "build_grid",
    "integrate",
    "derivative",
    "sobolev_norm",
    "grad_norm_k",
    "tilde_norm",
    "lp_norm",
    "entropy",
    "make_test_bank",
    "write_function_csv",
]

TAIL_LIMIT = 1e-8
MAX_DERIVATIVE_ORDER = 4


def _layout_tag(dim, radius, n):
    key = f"{dim}|{radius!r}|{n}".encode()
    return hashlib.sha1(key).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Uniform grid on ``[-R, R]^dim`` with normalized weights for ``e^{-U}``.

    ``tag`` identifies the node layout only. Two measures on the same nodes
    (say mu and a perturbation nu) share it, so their grid functions are
    interchangeable.
    """

    potential: PotentialSpec
    dim: int
    radius: float
    n: int
    h: float
    axis: np.ndarray
    coords: tuple
    potential_values: np.ndarray
    density: np.ndarray
    weights: np.ndarray
    log_z: float
    tail_estimate: float
    tag: str

    @property
    def shape(self):
        return self.weights.shape

    @property
    def size(self):
        return self.weights.size

    @property
    def z(self):
        """Normalizing constant ``sum_i e^{-U(x_i)} h^dim`` of the unshifted density."""
        return math.exp(self.log_z)

    def function(self, values, name="f"):
        """Wrap node values, or a callable of the coordinate arrays, as a GridFunction."""
        if callable(values):
            values = values(*self.coords)
        arr = np.array(np.broadcast_to(np.asarray(values, dtype=float), self.shape))
        return GridFunction(arr, self.tag, name)

    def constant(self, c=1.0, name="const"):
        return self.function(np.full(self.shape, float(c)), name)

    def coordinate(self, axis=0):
        return self.function(self.coords[axis], f"x{axis}" if self.dim > 1 else "x")

    def refined(self):
        """Same box and potential with ``N -> 2N + 1`` nodes per axis."""
        return build_grid(self.potential, self.radius, 2 * self.n + 1)

    def with_potential(self, potential):
        """The measure of another potential on identical nodes."""
        return build_grid(potential, self.radius, self.n)

    def describe(self):
        return {
            "dim": self.dim,
            "R": self.radius,
            "N": self.n,
            "h": self.h,
            "tail_estimate": self.tail_estimate,
            "potential": self.potential.label,
            "boundary_stencil": "one-sided second order",
        }


class GridFunction:
    """Node values aligned to a grid layout tag. Values are read-only."""

    __slots__ = ("values", "tag", "name", "_dcache")

    def __init__(self, values, tag, name="f"):
        arr = np.array(values, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"grid function {name!r} has non-finite values")
        arr.setflags(write=False)
        self.values = arr
        self.tag = tag
        self.name = name
        self._dcache = {}

    def __repr__(self):
        return f"GridFunction({self.name!r}, shape={self.values.shape})"

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.tag != self.tag or other.values.shape != self.values.shape:
                raise GridMismatch(f"{self.name!r} and {other.name!r} live on different grids")
            return other.values
        return float(other)

    def renamed(self, name):
        return GridFunction(self.values, self.tag, name)

    def _new(self, values, name):
        return GridFunction(values, self.tag, name)

    def __add__(self, other):
        return self._new(self.values + self._coerce(other), f"({self.name}+{_nm(other)})")

    __radd__ = __add__

    def __sub__(self, other):
        return self._new(self.values - self._coerce(other), f"({self.name}-{_nm(other)})")

    def __rsub__(self, other):
        return self._new(self._coerce(other) - self.values, f"({_nm(other)}-{self.name})")

    def __mul__(self, other):
        return self._new(self.values * self._coerce(other), f"{_nm(other)}*{self.name}")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._new(self.values / self._coerce(other), f"{self.name}/{_nm(other)}")

    def __neg__(self):
        return self._new(-self.values, f"-{self.name}")

    def __abs__(self):
        return self._new(np.abs(self.values), f"|{self.name}|")


def _nm(other):
    return other.name if isinstance(other, GridFunction) else f"{other:g}"


def build_grid(U, R, N):
    """Grid measure for ``U`` on ``[-R, R]^dim`` with ``N`` nodes per axis.

    Node 0 sits at ``-R`` and the center node at the origin.
    """
    if not isinstance(N, (int, np.integer)) or N % 2 == 0 or N < 33:
        raise ValueError(f"N must be an odd integer >= 33, got {N!r}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R!r}")
    R = float(R)
    N = int(N)
    dim = U.dim
    axis = np.linspace(-R, R, N)
    axis[(N - 1) // 2] = 0.0
    h = 2.0 * R / (N - 1)
    coords = tuple(np.meshgrid(*([axis] * dim), indexing="ij"))
    uvals = potential_at(U, coords)
    if not np.all(np.isfinite(uvals)):
        raise ValueError("potential is not finite on the grid")
    umin = float(uvals.min())
    rho = np.exp(-(uvals - umin))
    s = float(rho.sum())
    weights = rho / s
    weights = weights / weights.sum()
    if np.any(weights <= 0):
        raise ValueError(
            "some grid weights underflow to zero; shrink R so the box holds only resolvable mass"
        )
    log_z = math.log(s) + dim * math.log(h) - umin
    tail = _tail_estimate(U, axis, coords, rho, s, h)
    if tail > TAIL_LIMIT:
        raise TailTooHeavy(tail, TAIL_LIMIT)
    for arr in (uvals, rho, weights):
        arr.setflags(write=False)
    return GridMeasure(
        potential=U,
        dim=dim,
        radius=R,
        n=N,
        h=h,
        axis=axis,
        coords=coords,
        potential_values=uvals,
        density=rho,
        weights=weights,
        log_z=log_z,
        tail_estimate=tail,
        tag=_layout_tag(dim, R, N),
    )


def _tail_estimate(U, axis, coords, rho, rho_sum, h):
    # Mass beyond each boundary face ~ rho / (outward slope of U), per unit
    # face area; normalized by the interior mass sum(rho) h^dim.
    d = base_derivatives_at(U, coords, 1)
    dim = U.dim
    total = 0.0
    for ax in range(dim):
        alpha = tuple(1 if i == ax else 0 for i in range(dim))
        grad = d[alpha]
        for end, sign in ((0, -1.0), (-1, 1.0)):
            sl = [slice(None)] * dim
            sl[ax] = end
            slope = sign * grad[tuple(sl)]
            face_rho = rho[tuple(sl)]
            if np.any(slope <= 0):
                return math.inf
            total += float(np.sum(face_rho / slope)) * h ** (dim - 1)
    return total / (rho_sum * h**dim)


def _check(gm, f):
    if f.tag != gm.tag or f.values.shape != gm.shape:
        raise GridMismatch(f"function {f.name!r} does not belong to this grid")


def integrate(gm, f):
    """``mu(f) = sum_i w_i f_i``."""
    _check(gm, f)
    return float(np.dot(gm.weights.ravel(), f.values.ravel()))


def derivative(gm, f, alpha):
    """``d^alpha f`` by repeated second-order central differences."""
    _check(gm, f)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != gm.dim or min(alpha) < 0:
        raise ValueError(f"bad multi-index {alpha} for dim={gm.dim}")
    if sum(alpha) > MAX_DERIVATIVE_ORDER:
        raise OrderUnsupported(f"finite-difference order {sum(alpha)} exceeds {MAX_DERIVATIVE_ORDER}")
    if sum(alpha) == 0:
        return f
    hit = f._dcache.get(alpha)
    if hit is not None:
        return hit
    # Build from the cached lower-order derivative so shared prefixes are reused.
    ax = max(i for i, a in enumerate(alpha) if a > 0)
    lower = list(alpha)
    lower[ax] -= 1
    base = derivative(gm, f, tuple(lower))
    vals = np.gradient(base.values, gm.h, axis=ax, edge_order=2)
    out = GridFunction(vals, f.tag, f"d{''.join(map(str, alpha))}[{f.name}]")
    f._dcache[alpha] = out
    return out


def _moment(gm, f, alpha, p):
    d = derivative(gm, f, alpha).values
    return float(np.dot(gm.weights.ravel(), np.abs(d.ravel()) ** p))


def grad_norm_k(gm, f, k, p):
    """``(sum_{|alpha|=k} mu |d^alpha f|^p)^{1/p}``; for ``k = 0`` the L_p norm."""
    if p < 1:
        raise ValueError("p must be >= 1")
    s = sum(_moment(gm, f, a, p) for a in multi_indices(gm.dim, k))
    return s ** (1.0 / p)


def grad_power_k(gm, f, k, p):
    """``mu |grad^k f|^p`` without the outer root."""
    return sum(_moment(gm, f, a, p) for a in multi_indices(gm.dim, k))


def lp_norm(gm, f, p):
    return grad_norm_k(gm, f, 0, p)


def sobolev_norm(gm, f, m, p):
    """``||f||_{m,p}``: all partials of order at most ``m``."""
    if m > MAX_DERIVATIVE_ORDER:
        raise OrderUnsupported(f"Sobolev order {m} exceeds {MAX_DERIVATIVE_ORDER}")
    s = sum(grad_power_k(gm, f, k, p) for k in range(m + 1))
    return s ** (1.0 / p)


def tilde_norm(gm, f, k, p):
    """``||f||_p + ||grad^k f||_p``."""
    return grad_norm_k(gm, f, 0, p) + grad_norm_k(gm, f, k, p)


def entropy(gm, f):
    """``mu(f^2 log(f^2 / mu(f^2)))`` with ``0 log 0 = 0``."""
    _check(gm, f)
    sq = f.values**2
    m = float(np.dot(gm.weights.ravel(), sq.ravel()))
    if m == 0.0:
        raise ZeroFunction(f"entropy of the zero function {f.name!r}")
    r = sq / m
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(r > 0, r * np.log(r), 0.0)
    return max(0.0, m * float(np.dot(gm.weights.ravel(), t.ravel())))


@dataclass
class TestBank:
    """Named test functions on one grid, deterministic in ``(layout, seed)``."""

    __test__ = False  # keep pytest from collecting this class

    members: list
    seed: int
    tag: str
    skipped: list = field(default_factory=list)
    size: int = 8
    n_spectral: int = 0

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    @property
    def names(self):
        return [f.name for f in self.members]

    def get(self, name):
        for f in self.members:
            if f.name == name:
                return f
        raise KeyError(name)

    def nonconstant(self):
        return [f for f in self.members if f.name != "const"]

    def rebuild(self, gm, spectral=None):
        """The bank with the same recipe on another grid (e.g. a refinement)."""
        return make_test_bank(gm, self.seed, self.size, spectral if self.n_spectral else None, self.n_spectral)


def _sigma(gm):
    # spread of mu along one axis; sets the scale of Hermite and bump members
    r2 = sum(x**2 for x in gm.coords)
    return math.sqrt(float(np.dot(gm.weights.ravel(), r2.ravel())) / gm.dim)


def _hermite(n, t):
    c = np.zeros(n + 1)
    c[n] = 1.0
    return hermite_e.hermeval(t, c)


BUMP_SHAPES = ((0.0, 0.25, 0), (0.0, 1.0, 0), (0.0, 0.5, 1), (1.0, 0.75, 2))


def make_test_bank(gm, seed=0, size=8, spectral=None, n_spectral=4):
    """Deterministic test functions for sampling the 'for all f' quantifiers.

    Fixed members: ``const``, monomials up to degree 6, Hermite polynomials
    ``He_n(x / sigma)`` for ``n = 2..6`` (``sigma^2`` is the per-axis second
    moment of mu), and polynomial-times-Gaussian bumps. ``size`` further
    members are seeded random smooth combinations. With ``spectral`` data
    ``n_spectral`` random combinations of low eigenfunctions are added.
    Members with a numerically vanishing gradient are dropped and recorded
    in ``skipped``.
    """
    if size < 8:
        raise ValueError("bank size must be at least 8")
    rng = np.random.default_rng(seed)
    sig = _sigma(gm)
    X = gm.coords
    cands = [("const", np.ones(gm.shape))]
    if gm.dim == 1:
        x = X[0]
        t = x / sig
        cands += [(f"x^{d}", x**d) for d in range(1, 7)]
        cands += [(f"He_{n}", _hermite(n, t)) for n in range(2, 7)]
        for c, s, j in BUMP_SHAPES:
            cands.append(
                (f"bump(c={c:g},s={s:g},j={j})", x**j * np.exp(-((x - c * sig) ** 2) / (2 * (s * sig) ** 2)))
            )
        for i in range(size):
            coef = rng.normal(size=6) / np.arange(1, 7)
            w = rng.uniform(0.3, 2.0)
            phase = rng.uniform(0.0, 2 * np.pi)
            vals = sum(c * _hermite(n + 1, t) for n, c in enumerate(coef))
            vals = vals / math.sqrt(sum(c * c * math.factorial(n + 1) for n, c in enumerate(coef)))
            vals = vals + rng.uniform(0.5, 1.5) * np.sin(w * t + phase)
            cands.append((f"rand_{i}", vals))
    else:
        x, y = X
        tx, ty = x / sig, y / sig
        for d in range(1, 7):
            for a in range(d, -1, -1):
                cands.append((f"x^{a}y^{d - a}", x**a * y ** (d - a)))
        for d in range(2, 5):
            for a in range(d, -1, -1):
                cands.append((f"He_{a}He_{d - a}", _hermite(a, tx) * _hermite(d - a, ty)))
        r2 = x**2 + y**2
        for c, s, j in BUMP_SHAPES:
            cands.append(
                (
                    f"bump(c={c:g},s={s:g},j={j})",
                    x**j * np.exp(-((x - c * sig) ** 2 + y**2) / (2 * (s * sig) ** 2)),
                )
            )
        cands.append(("radial_bump", r2 * np.exp(-r2 / (2 * sig**2))))
        for i in range(size):
            coef = rng.normal(size=(4, 4))
            vals = np.zeros(gm.shape)
            for a in range(4):
                for b in range(4 - a):
                    if a + b:
                        vals = vals + coef[a, b] * _hermite(a, tx) * _hermite(b, ty) / math.sqrt(
                            math.factorial(a) * math.factorial(b)
                        )
            w = rng.uniform(0.3, 1.5, size=2)
            phase = rng.uniform(0.0, 2 * np.pi)
            vals = vals + np.sin(w[0] * tx + w[1] * ty + phase)
            cands.append((f"rand_{i}", vals))
    if spectral is not None:
        if spectral.tag != gm.tag:
            raise GridMismatch("spectral data from another grid")
        m = min(8, spectral.count - 1)
        for i in range(n_spectral):
            coef = rng.normal(size=m) / np.arange(1, m + 1)
            vals = spectral.vectors[:, 1 : m + 1] @ coef
            cands.append((f"eig_{i}", vals.reshape(gm.shape)))
    members, skipped = [], []
    for name, vals in cands:
        f = GridFunction(vals, gm.tag, name)
        if name != "const" and grad_norm_k(gm, f, 1, 2) <= 1e-10:
            skipped.append(name)
            continue
        members.append(f)
    return TestBank(
        members=members,
        seed=seed,
        tag=gm.tag,
        skipped=skipped,
        size=size,
        n_spectral=n_spectral if spectral is not None else 0,
    )


def write_function_csv(gm, functions, path):
    """CSV with node coordinate columns followed by one column per function."""
    if isinstance(functions, GridFunction):
        functions = [functions]
    for f in functions:
        _check(gm, f)
    header = [f"x{i}" for i in range(gm.dim)] if gm.dim > 1 else ["x"]
    header += [f.name for f in functions]
    cols = [c.ravel() for c in gm.coords] + [f.values.ravel() for f in functions]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
    return path
