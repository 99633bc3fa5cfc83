"""Orlicz functions, Luxemburg norms, and iterated-logarithm inequalities.

An Orlicz function Phi is convex, even, nondecreasing on [0, inf) with
Phi(0) = 0. Its Luxemburg norm on a probability space is

    ||f||_Phi = inf{ lam > 0 : mu Phi(f / lam) <= 1 }.

All shipped variants are continuous and doubling (Phi(2t) <= K Phi(t)), so
the infimum is attained with ``mu Phi(f / lam) = 1``; the norm is found by
bracketing and root-finding in lam.

Iterated logarithms follow the usual conventions:

    e_0 = 1,  e_j = exp(e_{j-1})          (e_1 = e, e_2 = e^e ~ 15.15, e_3 ~ 3.8e6)
    log_1 = log,  log_{j+1} = log o log_j  (real-valued on [e_{j-1}, inf))
    log* t = max(1, log t),  log*_j = j-fold composition of log*

with ``log*(0) = 1``. e_4 overflows a double, which is why the lemma checks
stop at j = 3.

The shifted family ``Phi(t) = |t| prod_j log_j(gamma_j + |t|)^{p_j}`` uses
the gamma ladder gamma_1 = 1, gamma_{j+1} = max(e_j, p, gamma_j). It is
compared against ``Phi_{A,p}(t) = |t|^p prod_j (log*_j |t|)^{p_j}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .discretize import _check

__all__ = [
    "OrliczSpec",
    "LogLemmaReport",
    "power",
    "log_power_star",
    "gamma_shifted",
    "n_function",
    "iterated_exp",
    "iterated_log",
    "iterated_log_star",
    "gamma_ladder",
    "orlicz_eval",
    "phi_inverse",
    "delta2_constant",
    "convexity_defect",
    "luxemburg_norm",
    "luxemburg_norm_batch",
    "orlicz_modular",
    "verify_log_lemmas",
    "DEFAULT_T_GRID",
    "DEFAULT_X_GRID",
    "J_MAX",
]

J_MAX = 3
DEFAULT_T_GRID = np.logspace(-6, 12, 4001)
DEFAULT_X_GRID = np.logspace(-6, 8, 20001)


def iterated_exp(j):
    """``e_j``: ``e_0 = 1``, ``e_j = exp(e_{j-1})``; ``inf`` once it overflows."""
    v = 1.0
    for _ in range(j):
        try:
            v = math.exp(v)
        except OverflowError:
            return math.inf
    return v


def iterated_log(x, j):
    """``log_j x``; real for ``x >= e_{j-1}``, NaN below that."""
    v = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(j):
            v = np.log(v)
    return v


def iterated_log_star(x, j):
    """``log*_j x`` with ``log* t = max(1, log t)`` and ``log*(0) = 1``."""
    v = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        for _ in range(j):
            v = np.maximum(1.0, np.log(v))
    return v


def _iterated_log_derivative(x, j):
    # d/dx log_j x = 1 / (x log_1 x ... log_{j-1} x)
    x = np.asarray(x, dtype=float)
    den = x.copy()
    v = x
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(j - 1):
            v = np.log(v)
            den = den * v
        return 1.0 / den


def _iterated_log_star_derivative(x, j):
    x = np.asarray(x, dtype=float)
    d = np.ones_like(x)
    v = x
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(j):
            active = v > math.e
            d = np.where(active, d / np.where(active, v, 1.0), 0.0)
            v = np.maximum(1.0, np.log(v))
    return d


def gamma_ladder(p, n):
    """``gamma_1 = 1``, ``gamma_{j+1} = max(e_j, p, gamma_j)`` for ``j < n``."""
    g = [1.0]
    for j in range(1, n):
        g.append(max(iterated_exp(j), float(p), g[-1]))
    return tuple(g)


@dataclass(frozen=True)
class OrliczSpec:
    """One of the shipped Orlicz functions; see the module constructors."""

    variant: str
    p: float = 2.0
    exponents: tuple = ()
    gammas: tuple = ()

    @property
    def label(self):
        if self.variant == "power":
            return f"power(p={self.p:g})"
        if self.variant == "n_function":
            return "n_function"
        ex = ",".join(f"{e:g}" for e in self.exponents)
        if self.variant == "log_power_star":
            return f"log_power_star(p={self.p:g};[{ex}])"
        gs = ",".join(f"{g:.6g}" for g in self.gammas)
        return f"gamma_shifted(p={self.p:g};[{ex}];gamma=[{gs}])"

    def value(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        v = self.variant
        with np.errstate(over="ignore", invalid="ignore"):
            if v == "power":
                return a**self.p
            if v == "n_function":
                return a * a * np.log1p(a * a)
            if v == "log_power_star":
                out = a**self.p
                for j, e in enumerate(self.exponents, start=1):
                    if e:
                        out = out * iterated_log_star(a, j) ** e
                return out
            out = a.copy()
            for j, (e, g) in enumerate(zip(self.exponents, self.gammas), start=1):
                if e:
                    out = out * iterated_log(g + a, j) ** e
            return out

    def derivative(self, t):
        """Phi'(t), odd in t."""
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        s = np.sign(t)
        v = self.variant
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if v == "power":
                return s * self.p * a ** (self.p - 1)
            if v == "n_function":
                a2 = a * a
                return s * (2 * a * np.log1p(a2) + 2 * a * a2 / (1 + a2))
            if v == "log_power_star":
                factors = [a**self.p]
                dfactors = [self.p * a ** (self.p - 1)]
                for j, e in enumerate(self.exponents, start=1):
                    if e:
                        L = iterated_log_star(a, j)
                        factors.append(L**e)
                        dfactors.append(e * L ** (e - 1) * _iterated_log_star_derivative(a, j))
            else:
                factors = [a]
                dfactors = [np.ones_like(a)]
                for j, (e, g) in enumerate(zip(self.exponents, self.gammas), start=1):
                    if e:
                        L = iterated_log(g + a, j)
                        factors.append(L**e)
                        dfactors.append(e * L ** (e - 1) * _iterated_log_derivative(g + a, j))
            total = np.zeros_like(a)
            for i in range(len(factors)):
                term = dfactors[i]
                for k, fk in enumerate(factors):
                    if k != i:
                        term = term * fk
                total = total + np.nan_to_num(term, nan=0.0)
            return s * total

    def inverse(self, y):
        return phi_inverse(self, y)


def power(p):
    """``Phi(t) = |t|^p``."""
    if p < 1:
        raise ValueError("power(p) is an Orlicz function only for p >= 1")
    return OrliczSpec("power", float(p))


def n_function():
    """``N(t) = t^2 log(1 + t^2)``."""
    return OrliczSpec("n_function", 2.0)


def log_power_star(p, exponents):
    """``Phi_{A,p}(t) = |t|^p prod_j (log*_j |t|)^{p_j}``."""
    exponents = tuple(float(e) for e in exponents)
    if p < 1 or any(e < 0 for e in exponents):
        raise ValueError("log_power_star needs p >= 1 and nonnegative exponents")
    if len(exponents) > J_MAX:
        raise ValueError(f"at most {J_MAX} iterated-log factors (e_4 overflows)")
    return OrliczSpec("log_power_star", float(p), exponents)


def gamma_shifted(exponents, p, gammas=None):
    """``Phi(t) = |t| prod_j log_j(gamma_j + |t|)^{p_j}``.

    ``p`` enters through the gamma ladder only. Each ``gamma_j`` must be at
    least the ladder value, which in particular keeps ``log_j`` real.
    """
    exponents = tuple(float(e) for e in exponents)
    n = len(exponents)
    if n == 0 or n > J_MAX:
        raise ValueError(f"gamma_shifted takes 1..{J_MAX} exponents")
    if any(e < 0 for e in exponents):
        raise ValueError("exponents must be nonnegative")
    ladder = gamma_ladder(p, n)
    gammas = ladder if gammas is None else tuple(float(g) for g in gammas)
    if len(gammas) != n:
        raise ValueError("one gamma per exponent")
    for j, (g, gmin) in enumerate(zip(gammas, ladder), start=1):
        if g < gmin:
            raise ValueError(f"gamma_{j} = {g} is below the ladder minimum {gmin}")
    return OrliczSpec("gamma_shifted", float(p), exponents, gammas)


def on_ladder(phi):
    """True when a gamma_shifted spec uses exactly the ladder for its ``p``."""
    return phi.variant == "gamma_shifted" and np.allclose(
        phi.gammas, gamma_ladder(phi.p, len(phi.exponents)), rtol=1e-12, atol=0
    )


def phi_inverse(phi, y, rtol=1e-12):
    """``Phi^{-1}(y)`` for ``y >= 0`` by bisection with a doubling bracket."""
    y = float(y)
    if y < 0:
        raise ValueError("inverse needs y >= 0")
    if y == 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while float(phi.value(hi)) < y:
        lo, hi = hi, 2.0 * hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if float(phi.value(mid)) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def orlicz_eval(phi, t, mode="value"):
    """Evaluate Phi, Phi' or Phi^{-1} at ``t``."""
    if mode == "value":
        out = phi.value(t)
    elif mode == "derivative":
        out = phi.derivative(t)
    elif mode == "inverse":
        if np.ndim(t):
            return np.array([phi_inverse(phi, y) for y in np.ravel(t)]).reshape(np.shape(t))
        return phi_inverse(phi, t)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(out) if np.ndim(out) == 0 else out


def delta2_constant(phi, t_grid=None):
    """``sup Phi(2t) / Phi(t)`` over a log-spaced grid (default 1e-6..1e12)."""
    t = DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    return float(np.max(phi.value(2.0 * t) / phi.value(t)))


def convexity_defect(phi, t_grid=None):
    """Most negative normalized second difference of Phi on a log grid.

    Returns ``min (Phi(a) - 2 Phi(b) + Phi(c)) / Phi(c)`` over consecutive
    node triples after symmetrizing the grid around 0; a convex Phi gives
    a value no smaller than rounding noise.
    """
    t = DEFAULT_T_GRID[::8] if t_grid is None else np.asarray(t_grid, dtype=float)
    # uniform sub-grids around each node so the second difference is centered
    h = t * 1e-3
    v0, vm, vp = phi.value(t), phi.value(t - h), phi.value(t + h)
    return float(np.min((vm - 2 * v0 + vp) / np.maximum(vp, 1e-300)))


def orlicz_modular(gm, f, phi, lam=1.0):
    """``mu Phi(f / lam)``."""
    _check(gm, f)
    return float(np.dot(gm.weights.ravel(), phi.value(f.values.ravel() / lam)))


def _modular_raw(w, a, phi, lam):
    return float(np.dot(w, phi.value(a / lam)))


def luxemburg_norm(gm, f, phi, weights=None):
    """``inf{lam > 0 : mu Phi(f / lam) <= 1}``; zero for the zero function.

    ``weights`` overrides the measure (same nodes), used for perturbed
    measures. The returned lam satisfies ``|mu Phi(f/lam) - 1| < 1e-9``.
    """
    _check(gm, f)
    w = gm.weights.ravel() if weights is None else np.asarray(weights, dtype=float).ravel()
    return _luxemburg_values(w, f.values.ravel(), phi)


def _luxemburg_values(w, values, phi):
    a = np.abs(values)
    amax = float(a.max())
    if amax == 0.0:
        return 0.0
    # Phi(a / hi) <= Phi(Phi^{-1}(1)) = 1 pointwise, so mu Phi(f/hi) <= 1
    hi = amax / phi_inverse(phi, 1.0)
    lo = hi
    while _modular_raw(w, a, phi, lo) <= 1.0:
        lo *= 0.5
    g = lambda s: _modular_raw(w, a, phi, math.exp(s)) - 1.0
    # a constant |f| lands exactly on Phi(Phi^{-1}(1)) = 1 up to rounding
    while g(math.log(hi)) > 0.0:
        hi *= 1.0 + 1e-12
    if g(math.log(hi)) == 0.0:
        return hi
    s = brentq(g, math.log(lo), math.log(hi), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.exp(s)


def luxemburg_norm_batch(gm, values, phi, weights=None, rtol=1e-13):
    """Luxemburg norms of many functions at once (rows of ``values``).

    Vectorized bisection in log lam; used for dense parameter scans.
    """
    w = gm.weights.ravel() if weights is None else np.asarray(weights, dtype=float).ravel()
    A = np.abs(np.asarray(values, dtype=float).reshape(-1, w.size))
    amax = A.max(axis=1)
    out = np.zeros(A.shape[0])
    live = amax > 0
    if not np.any(live):
        return out
    A = A[live]
    hi = amax[live] / phi_inverse(phi, 1.0)
    lo = hi.copy()

    def mod(lam):
        return phi.value(A / lam[:, None]) @ w

    need = mod(lo) <= 1.0
    while np.any(need):
        lo = np.where(need, 0.5 * lo, lo)
        need = mod(lo) <= 1.0
    llo, lhi = np.log(lo), np.log(hi)
    while np.max(lhi - llo) > rtol:
        mid = 0.5 * (llo + lhi)
        big = mod(np.exp(mid)) > 1.0
        llo = np.where(big, mid, llo)
        lhi = np.where(big, lhi, mid)
    out[live] = np.exp(0.5 * (llo + lhi))
    return out


@dataclass
class LogLemmaReport:
    """Outcome of one pointwise iterated-log inequality scan."""

    lemma: str
    j: int
    p: float
    gammas: tuple
    empirical_constant: float
    paper_constant: float
    worst_point: float
    passed: bool
    n_points: int
    x_range: tuple
    note: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["gammas"] = list(self.gammas)
        d["x_range"] = list(self.x_range)
        return d


CAP_NOTE = f"j is capped at {J_MAX}: e_4 = exp(e_3) is not representable in double precision"


def _sup(ratio, x):
    ratio = np.where(np.isfinite(ratio), ratio, -np.inf)
    i = int(np.argmax(ratio))
    return float(ratio[i]), float(x[i])


def _minimal_gamma(p, j, C, x, start):
    # smallest gamma on a geometric ladder for which C log_j(g+x) >= log_j(g+x^p) on x
    g = start
    for _ in range(400):
        lhs = C * iterated_log(g + x, j)
        rhs = iterated_log(g + x**p, j)
        if np.all(lhs >= rhs * (1 - 1e-12)):
            return g
        g *= 1.05
    return math.inf


def verify_log_lemmas(p, j_max=3, x_grid=None, corollary_exponents=None):
    """Pointwise scans of the iterated-log inequalities on a log-spaced grid.

    Returns reports for, per ``j <= j_max``:

    * ``L1``: ``log_j(g_j + |x|^p) <= C_j log_j(g_j + |x|)`` with ``C_1 = p``,
      ``C_j = 2`` and the gamma ladder;
    * ``L2``: ``log_j(e|x|) <= 2 log*_j |x|`` for ``|x| >= e_{j-1}``;
    * ``L3``: the empirical ``D_j = sup log_j(g_j + |x|) / log*_j |x|``
      (finiteness is the claim) with the ratio at most 2 past ``g_j``;
    * ``Corollary``: ``Phi(|x|^p) / Phi_{A,p}(|x|)`` against
      ``prod_j (C_j D_j)^{p_j}`` for the first ``j`` factors.

    The fourth lemma needs a measure and lives in :mod:`coerce_lab.verify`.
    """
    if j_max > J_MAX:
        raise ValueError(CAP_NOTE)
    if p < 1:
        raise ValueError("p must be >= 1")
    x = DEFAULT_X_GRID if x_grid is None else np.abs(np.asarray(x_grid, dtype=float))
    xr = (float(x.min()), float(x.max()))
    gam = gamma_ladder(p, j_max)
    reports = []
    D = {}
    for j in range(1, j_max + 1):
        g = gam[j - 1]
        C = float(p) if j == 1 else 2.0
        with np.errstate(all="ignore"):
            ratio = iterated_log(g + x**p, j) / iterated_log(g + x, j)
        emp, worst = _sup(ratio, x)
        ok = emp <= C * (1 + 1e-12)
        extra = {}
        if not ok:
            extra["gamma_needed_on_grid"] = _minimal_gamma(p, j, C, x, g)
        reports.append(
            LogLemmaReport("L1", j, float(p), gam[:j], emp, C, worst, bool(ok), x.size, xr, CAP_NOTE, extra)
        )

        lo = iterated_exp(j - 1)
        sel = x >= lo
        with np.errstate(all="ignore"):
            ratio2 = iterated_log(math.e * x[sel], j) / iterated_log_star(x[sel], j)
        emp2, worst2 = _sup(ratio2, x[sel])
        reports.append(
            LogLemmaReport(
                "L2", j, float(p), gam[:j], emp2, 2.0, worst2, bool(emp2 <= 2.0 * (1 + 1e-12)),
                int(sel.sum()), (lo, xr[1]), CAP_NOTE,
            )
        )

        with np.errstate(all="ignore"):
            ratio3 = iterated_log(g + x, j) / iterated_log_star(x, j)
        emp3, worst3 = _sup(ratio3, x)
        far = x >= g
        tail = float(np.max(ratio3[far])) if np.any(far) else 0.0
        D[j] = emp3
        reports.append(
            LogLemmaReport(
                "L3", j, float(p), gam[:j], emp3, math.inf, worst3,
                bool(np.isfinite(emp3) and tail <= 2.0 * (1 + 1e-12)),
                x.size, xr, CAP_NOTE, {"sup_ratio_beyond_gamma": tail, "tail_bound": 2.0},
            )
        )

    for n in range(1, j_max + 1):
        ex = tuple(corollary_exponents[:n]) if corollary_exponents else (1.0,) * n
        phi = gamma_shifted(ex, p, gam[:n])
        phi_a = log_power_star(p, ex)
        with np.errstate(all="ignore"):
            ratio = phi.value(x**p) / phi_a.value(x)
        emp, worst = _sup(ratio, x)
        bound = 1.0
        for j in range(1, n + 1):
            Cj = float(p) if j == 1 else 2.0
            bound *= (Cj * D[j]) ** ex[j - 1]
        reports.append(
            LogLemmaReport(
                "Corollary", n, float(p), gam[:n], emp, bound, worst, bool(emp <= bound * (1 + 1e-12)),
                x.size, xr, CAP_NOTE, {"exponents": list(ex)},
            )
        )
    return reports
