"""Heat flow ``f_t = e^{-tL} f_0`` and decay of higher gradients.

L here is the nonnegative generator of :mod:`coerce_lab.dirichlet`, so the
Markov semigroup is ``e^{-tL}`` (conventions that write ``e^{tL}`` use the
opposite sign for the generator).

Two schemes are available. The spectral scheme is exact in the retained
eigenbasis, ``f_t = sum_i e^{-lambda_i t} <f_0, phi_i>_mu phi_i``. The
Crank-Nicolson scheme works in the symmetric form ``g = sqrt(w) f``, where
each step solves

    (I + dt/2 S) g_{n+1} = (I - dt/2 S) g_n

by conjugate gradients. Because ``S sqrt(w) = 0``, the mass
``mu(f) = <sqrt(w), g>`` is preserved up to the solver tolerance.

Decay rates come from a least-squares line through
``log mu|grad^k f_t|^2``. By default only the later half of the time
ladder is used, so fast transients do not enter the fit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import identity
from scipy.sparse.linalg import cg

from .dirichlet import ENERGY_TOL, DirichletOperator, SpectralData
from .discretize import GridFunction, grad_power_k
from .errors import BasisDeficit, GridMismatch, LinearSolveFailure, Underflow, WindowTooSmall

__all__ = [
    "DecayCurve",
    "evolve",
    "decay_curve",
    "fit_decay_rate",
    "write_curve_csv",
    "UNDERFLOW_FLOOR",
]

UNDERFLOW_FLOOR = 1e-13
CG_RTOL = 1e-10


def _spectral(sd, f0, t):
    c = sd.coefficients(f0)
    total = float(np.dot(sd.weights.ravel(), f0.values.ravel() ** 2))
    if total > 0 and float(np.dot(c, c)) < (1 - ENERGY_TOL) * total:
        raise BasisDeficit(f"retained modes miss energy of {f0.name!r}; raise n_eigs")
    lam = np.maximum(sd.eigenvalues, 0.0)
    vals = sd.vectors @ (np.exp(-lam * t) * c)
    return vals.reshape(sd.shape)


def _crank_nicolson(op, f0, t, dt):
    n_steps = max(1, math.ceil(t / dt - 1e-12))
    step = t / n_steps
    sw = np.sqrt(op.weights.ravel())
    g = sw * f0.values.ravel()
    eye = identity(op.size, format="csr")
    A = (eye + 0.5 * step * op.symmetric).tocsr()
    B = (eye - 0.5 * step * op.symmetric).tocsr()
    for n in range(n_steps):
        rhs = B @ g
        g_new, info = cg(A, rhs, x0=g, rtol=CG_RTOL, atol=0.0, maxiter=10 * op.size)
        if info != 0:
            raise LinearSolveFailure(f"CG failed at step {n} (info={info})")
        g = g_new
    return (g / sw).reshape(op.shape)


def evolve(source, f0, t, scheme=None, dt=1e-3):
    """``e^{-tL} f0`` from spectral data or an assembled operator.

    ``scheme`` defaults to ``"spectral"`` for SpectralData and
    ``"crank_nicolson"`` for a DirichletOperator.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if f0.tag != source.tag:
        raise GridMismatch("initial datum from another grid")
    if scheme is None:
        scheme = "spectral" if isinstance(source, SpectralData) else "crank_nicolson"
    if scheme == "spectral":
        if not isinstance(source, SpectralData):
            raise TypeError("the spectral scheme needs SpectralData")
        vals = _spectral(source, f0, t)
    elif scheme == "crank_nicolson":
        if not isinstance(source, DirichletOperator):
            raise TypeError("Crank-Nicolson needs the assembled DirichletOperator")
        if not dt > 0:
            raise ValueError("dt must be positive")
        vals = f0.values.copy() if t == 0 else _crank_nicolson(source, f0, t, dt)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return GridFunction(vals, f0.tag, f"P_{t:g}[{f0.name}]")


@dataclass
class DecayCurve:
    """``mu|grad^k f_t|^2`` along a time ladder."""

    times: np.ndarray
    values: np.ndarray
    k: int
    scheme: str
    name: str = "f"
    rate: float | None = None
    window: tuple | None = None
    fit_residual: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "k": self.k,
            "scheme": self.scheme,
            "times": [float(t) for t in self.times],
            "values": [float(v) for v in self.values],
            "rate": self.rate,
            "window": list(self.window) if self.window else None,
            "fit_residual": self.fit_residual,
        }


def decay_curve(gm, source, f0, k, times, scheme=None, dt=1e-3):
    """Evaluate ``mu|grad^k f_t|^2`` at every time of the ladder."""
    if k > 3:
        raise ValueError("decay curves are tracked for k <= 3")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("times must be increasing and nonnegative")
    if scheme is None:
        scheme = "spectral" if isinstance(source, SpectralData) else "crank_nicolson"
    vals = []
    if scheme == "crank_nicolson":
        # march forward from the previous time instead of restarting
        ft, t_prev = f0, 0.0
        for t in times:
            ft = evolve(source, ft, t - t_prev, scheme, dt)
            t_prev = t
            vals.append(grad_power_k(gm, ft, k, 2))
    else:
        for t in times:
            vals.append(grad_power_k(gm, evolve(source, f0, t, scheme, dt), k, 2))
    return DecayCurve(times, np.array(vals), k, scheme, f0.name)


def fit_decay_rate(curve, window=None):
    """Negated least-squares slope of ``log values`` over the window.

    The default window is the later half of the time ladder. The fit needs
    at least five points, each above 1e-13.
    """
    t, v = curve.times, curve.values
    if window is None:
        sel = np.arange(t.size) >= t.size // 2
        window = (float(t[sel][0]), float(t[-1])) if np.any(sel) else (math.nan, math.nan)
    else:
        sel = (t >= window[0]) & (t <= window[1])
    if int(sel.sum()) < 5:
        raise WindowTooSmall(f"only {int(sel.sum())} points in the fit window")
    if np.any(v[sel] <= UNDERFLOW_FLOOR):
        raise Underflow(f"curve {curve.name!r} drops below {UNDERFLOW_FLOOR:g} inside the window")
    coef, res, *_ = np.polyfit(t[sel], np.log(v[sel]), 1, full=True)
    rate = -float(coef[0])
    curve.rate = rate
    curve.window = (float(window[0]), float(window[1]))
    curve.fit_residual = float(math.sqrt(res[0] / sel.sum())) if res.size else 0.0
    return rate


def write_curve_csv(curve, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for t, v in zip(curve.times, curve.values):
            w.writerow([repr(float(t)), repr(float(v))])
    return path
