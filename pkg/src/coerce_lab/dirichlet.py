"""The Dirichlet operator ``L = -Laplacian + grad U . grad`` on a grid measure.

L is assembled in divergence (flux) form. Across the face between
neighbouring nodes i, j sits the geometric-mean density
``rho_ij = sqrt(rho_i rho_j)``, and

    (L f)_i = (1 / (rho_i h^2)) sum_{j ~ i} rho_ij (f_i - f_j).

Boundary faces carry no flux. Summation by parts is then exact:

    <f, L g>_mu = sum_{faces} sqrt(w_i w_j) (f_i - f_j)(g_i - g_j) / h^2,

so L is symmetric and nonnegative in the weighted inner product and kills
constants. Conjugating by ``M^{1/2}`` (with M = diag(w)) gives a symmetric
matrix with off-diagonal entries ``-1/h^2`` and diagonal entries
``sum_{j ~ i} exp((U_i - U_j)/2) / h^2``. In one dimension it is
tridiagonal and is diagonalized densely; in two dimensions the lowest
modes are extracted by shift-invert Lanczos.

Eigenvectors v of the symmetric form become mu-orthonormal eigenfunctions
``phi = v / sqrt(w)``. Fractional powers act through the spectral calculus,
``L^s f = sum_i lambda_i^s <f, phi_i>_mu phi_i``, with eigenvalues below
1e-10 treated as exactly zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .discretize import GridFunction, _check, grad_norm_k
from .errors import BasisDeficit, ConvergenceFailure, GridMismatch

__all__ = [
    "DirichletOperator",
    "SpectralData",
    "assemble_operator",
    "spectral_decomposition",
    "spectral_gap",
    "apply_fractional",
    "l_norm",
    "dirichlet_form",
    "write_eigenvalues_csv",
    "ZERO_EIGENVALUE",
    "DENSE_LIMIT",
]

ZERO_EIGENVALUE = 1e-10
DENSE_LIMIT = 4096
ENERGY_TOL = 1e-8


def _shift(a, axis, step):
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(step, None) if step > 0 else slice(None, step)
    return a[tuple(sl)]


@dataclass(frozen=True, eq=False)
class DirichletOperator:
    """Flux-form generator on one grid measure."""

    tag: str
    dim: int
    shape: tuple
    h: float
    weights: np.ndarray
    potential_values: np.ndarray
    symmetric: sps.csr_matrix
    physical: sps.csr_matrix

    def apply(self, f):
        """``L f`` in flux form (exactly zero on constants)."""
        if isinstance(f, GridFunction):
            if f.tag != self.tag:
                raise GridMismatch("function from another grid")
            vals, name = f.values, f.name
        else:
            vals, name = np.asarray(f, dtype=float).reshape(self.shape), "f"
        U = self.potential_values
        out = np.zeros(self.shape)
        for ax in range(self.dim):
            du = np.diff(vals, axis=ax)
            dU = np.diff(U, axis=ax)
            # rho_face / rho_i for the left node (i) and right node (i+1) of each face
            left = np.exp(-0.5 * dU) * du
            right = np.exp(0.5 * dU) * du
            lo = [slice(None)] * self.dim
            hi = [slice(None)] * self.dim
            lo[ax] = slice(None, -1)
            hi[ax] = slice(1, None)
            out[tuple(lo)] -= left
            out[tuple(hi)] += right
        out /= self.h**2
        return GridFunction(out, self.tag, f"L[{name}]")

    @property
    def size(self):
        return int(np.prod(self.shape))


def assemble_operator(gm):
    """Build the flux-form Dirichlet operator of ``gm``."""
    U = gm.potential_values - float(gm.potential_values.min())
    shape = gm.shape
    n = gm.size
    idx = np.arange(n).reshape(shape)
    inv_h2 = 1.0 / gm.h**2
    rows, cols, svals, pvals = [], [], [], []
    diag = np.zeros(n)
    for ax in range(gm.dim):
        i = _shift(idx, ax, -1).ravel()
        j = _shift(idx, ax, 1).ravel()
        dU = np.diff(U, axis=ax).ravel()  # U_j - U_i
        a_ij = np.exp(-0.5 * dU)  # rho_face / rho_i
        a_ji = np.exp(0.5 * dU)  # rho_face / rho_j
        np.add.at(diag, i, a_ij)
        np.add.at(diag, j, a_ji)
        rows += [i, j]
        cols += [j, i]
        svals += [np.full(i.size, -1.0), np.full(i.size, -1.0)]
        pvals += [-a_ij, -a_ji]
    rows = np.concatenate(rows + [idx.ravel()])
    cols = np.concatenate(cols + [idx.ravel()])
    S = sps.csr_matrix((np.concatenate(svals + [diag]) * inv_h2, (rows, cols)), shape=(n, n))
    P = sps.csr_matrix((np.concatenate(pvals + [diag]) * inv_h2, (rows, cols)), shape=(n, n))
    return DirichletOperator(
        tag=gm.tag,
        dim=gm.dim,
        shape=shape,
        h=gm.h,
        weights=gm.weights,
        potential_values=U,
        symmetric=S,
        physical=P,
    )


def dirichlet_form(gm, f, g=None):
    """``sum_faces sqrt(w_i w_j) (f_i - f_j)(g_i - g_j) / h^2`` (equals ``<f, L g>_mu``)."""
    _check(gm, f)
    g = f if g is None else g
    _check(gm, g)
    w = gm.weights
    total = 0.0
    for ax in range(gm.dim):
        face = np.sqrt(_shift(w, ax, -1) * _shift(w, ax, 1))
        total += float(np.sum(face * np.diff(f.values, axis=ax) * np.diff(g.values, axis=ax)))
    return total / gm.h**2


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Lowest eigenpairs of L, orthonormal in the mu inner product.

    ``vectors`` holds eigenfunctions as columns (flattened node order).
    """

    tag: str
    shape: tuple
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    weights: np.ndarray
    complete: bool
    method: str

    @property
    def count(self):
        return int(self.eigenvalues.size)

    def eigenfunction(self, i):
        return GridFunction(self.vectors[:, i].reshape(self.shape), self.tag, f"phi_{i}")

    def coefficients(self, f):
        if f.tag != self.tag:
            raise GridMismatch("function from another grid")
        return self.vectors.T @ (self.weights.ravel() * f.values.ravel())


def _normalize_signs(V):
    # rightmost "large" component positive, so output is reproducible
    for i in range(V.shape[1]):
        col = V[:, i]
        big = np.nonzero(np.abs(col) >= 0.5 * np.max(np.abs(col)))[0]
        if col[big[-1]] < 0:
            V[:, i] = -col
    return V


def spectral_decomposition(op, n_eigs=None):
    """Eigenpairs of L via its symmetric form.

    1D grids with at most 4096 nodes use a dense tridiagonal solver (all
    modes by default); otherwise the lowest ``n_eigs`` (default 40) come
    from shift-invert Lanczos around -1.
    """
    n = op.size
    if n_eigs is not None and not 2 <= n_eigs <= n:
        raise ValueError(f"n_eigs must lie in [2, {n}]")
    S = op.symmetric
    sw = np.sqrt(op.weights.ravel())
    if op.dim == 1 and n <= DENSE_LIMIT:
        d = S.diagonal()
        e = S.diagonal(1)
        if n_eigs is None or n_eigs == n:
            lam, V = eigh_tridiagonal(d, e)
        else:
            lam, V = eigh_tridiagonal(d, e, select="i", select_range=(0, n_eigs - 1))
        method = "dense tridiagonal"
    else:
        k = min(n_eigs or 40, n - 2)
        try:
            lam, V = eigsh(S.tocsc(), k=k, sigma=-1.0, which="LM", tol=1e-13, v0=sw.copy())
        except ArpackNoConvergence as exc:
            raise ConvergenceFailure(
                f"Lanczos extraction of {k} modes did not converge",
                residuals=getattr(exc, "eigenvalues", None),
            ) from exc
        order = np.argsort(lam)
        lam, V = lam[order], V[:, order]
        method = "shift-invert Lanczos"
    V = _normalize_signs(np.array(V))
    res = np.linalg.norm(S @ V - V * lam, axis=0)
    bad = res > 1e-8 * np.maximum(1.0, np.abs(lam))
    if np.any(bad):
        raise ConvergenceFailure(
            f"{int(bad.sum())} eigenpairs miss the residual tolerance", residuals=res
        )
    phi = V / sw[:, None]
    return SpectralData(
        tag=op.tag,
        shape=op.shape,
        eigenvalues=lam,
        vectors=phi,
        residuals=res,
        weights=op.weights,
        complete=lam.size == n,
        method=method,
    )


def spectral_gap(sd):
    """Smallest nonzero eigenvalue ``lambda_1``."""
    if sd.count < 2:
        raise ValueError("need at least two eigenvalues")
    return float(sd.eigenvalues[1])


def _powers(lam, s):
    lam = np.where(lam <= ZERO_EIGENVALUE, 0.0, lam)
    if s == 0:
        return np.ones_like(lam)
    return lam**s


def apply_fractional(sd, f, s):
    """``L^s f`` through the retained eigenbasis.

    Raises BasisDeficit when the basis captures less than ``1 - 1e-8`` of
    ``||f||_mu^2``.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    c = sd.coefficients(f)
    total = float(np.dot(sd.weights.ravel(), f.values.ravel() ** 2))
    captured = float(np.dot(c, c))
    if total > 0 and captured < (1 - ENERGY_TOL) * total:
        raise BasisDeficit(
            f"retained modes capture {captured / total:.10f} of the energy of {f.name!r}"
        )
    out = sd.vectors @ (_powers(sd.eigenvalues, s) * c)
    return GridFunction(out.reshape(sd.shape), sd.tag, f"L^{s:g}[{f.name}]")


def l_norm(gm, sd, f, k, p):
    """``||f||_p + ||L^{k/2} f||_p``."""
    if sd.tag != gm.tag:
        raise GridMismatch("spectral data from another grid")
    return grad_norm_k(gm, f, 0, p) + grad_norm_k(gm, apply_fractional(sd, f, k / 2.0), 0, p)


def write_eigenvalues_csv(sd, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "lambda", "residual"])
        for i, (lam, r) in enumerate(zip(sd.eigenvalues, sd.residuals)):
            w.writerow([i, repr(float(lam)), repr(float(r))])
    return path
