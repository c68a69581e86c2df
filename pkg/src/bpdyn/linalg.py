"""Dense weighted least-squares kernel.

The central routine is :func:`weighted_l2_min`, which returns the minimizer
of ``sum(x_i**2 / w_i)`` over the affine subspace ``{x : A x = b}`` together
with its optimal value.  Columns with zero weight are treated as hard
constraints ``x_i = 0`` and removed before the Gram matrix is formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InfeasibleOnSupport, NonFiniteInput

# singular values below RCOND * sigma_max are treated as zero
RCOND = 1e-12
# weight spread that triggers the eigen-based pseudoinverse
WEIGHT_SPREAD = 1e-12
FEAS_TOL = 1e-8


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteInput("input contains NaN or Inf")


@dataclass(frozen=True, eq=False)
class WeightedGram:
    """Factorized symmetric matrix ``L = A diag(w) A^T``.

    ``kind`` is ``"cholesky"`` or ``"eigen"``; in the latter case ``factor``
    holds the retained eigenpairs and solves apply the Moore-Penrose
    pseudoinverse.
    """

    L: np.ndarray
    kind: str
    factor: tuple
    rank: int
    tolerance_used: float

    @property
    def m(self):
        return self.L.shape[0]


def factorize(L, *, force_eigen=False):
    """Factorize a symmetric positive semidefinite matrix.

    Cholesky is attempted first; if it fails (or ``force_eigen`` is set) a
    symmetric eigendecomposition is used and eigenvalues below
    ``RCOND * max|lambda|`` are discarded.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("L must be square")
    _finite(L)
    L = 0.5 * (L + L.T)
    m = L.shape[0]
    if m == 0:
        return WeightedGram(L, "eigen", (np.zeros(0), np.zeros((0, 0))), 0, 0.0)
    if not force_eigen:
        try:
            cho = scipy.linalg.cho_factor(L, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            pass
        else:
            d = np.abs(np.diag(cho[0]))
            if d.min() > np.sqrt(RCOND) * d.max():
                return WeightedGram(L, "cholesky", cho, m, 0.0)
    lam, V = np.linalg.eigh(L)
    top = np.abs(lam).max()
    tol = RCOND * top if top > 0 else 0.0
    keep = np.abs(lam) > tol
    return WeightedGram(L, "eigen", (lam[keep], V[:, keep]), int(keep.sum()), tol)


def weighted_gram(A, w):
    """Return the factorized ``A diag(w) A^T``.

    Zero-weight columns contribute nothing and are dropped; the eigen route is
    forced when the positive weights span more than ``1/WEIGHT_SPREAD``.
    """
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=float)
    _finite(A, w)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    keep = w > 0
    As, ws = A[:, keep], w[keep]
    L = (As * ws) @ As.T
    spread = ws.size and ws.min() < WEIGHT_SPREAD * ws.max()
    return factorize(L, force_eigen=bool(spread))


def pseudo_solve(L, c):
    """Return ``L^+ c``; the exact solution when ``L`` has full rank."""
    if not isinstance(L, WeightedGram):
        L = factorize(L)
    c = np.asarray(c, dtype=float)
    _finite(c)
    if L.kind == "cholesky":
        return scipy.linalg.cho_solve(L.factor, c, check_finite=False)
    lam, V = L.factor
    return V @ ((V.T @ c) / lam)


def bilinear_form(L, u, v):
    """``u^T L^+ v``."""
    u = np.asarray(u, dtype=float)
    _finite(u)
    return float(u @ pseudo_solve(L, v))


def _stable_min_norm(As, ws, b):
    # min ||u|| s.t. (As D) u = b with D = diag(sqrt(w)); x = D u
    d = np.sqrt(ws)
    u, *_ = np.linalg.lstsq(As * d, b, rcond=None)
    return d * u, float(u @ u)


def weighted_l2_min(A, b, w):
    """Minimize ``sum(x_i**2 / w_i)`` subject to ``A x = b``.

    Parameters
    ----------
    A : (m, n) array
    b : (m,) array
    w : (n,) array
        Nonnegative weights; ``w_i = 0`` pins ``x_i = 0``.

    Returns
    -------
    q : (n,) array
        The minimizer ``W A^T (A W A^T)^+ b`` (zero off the support of ``w``).
    energy : float
        ``b^T L^+ b``, which equals ``sum(q_i**2 / w_i)`` over the support.

    Raises
    ------
    InfeasibleOnSupport
        If ``b`` cannot be written with the positive-weight columns only.
    NonFiniteInput
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    _finite(A, b, w)
    m, n = A.shape
    if b.shape != (m,) or w.shape != (n,):
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}, w {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    keep = w > 0
    q = np.zeros(n)
    if not keep.any():
        if np.any(b != 0):
            raise InfeasibleOnSupport("all weights are zero but b != 0")
        return q, 0.0
    As, ws = A[:, keep], w[keep]
    gram = weighted_gram(As, ws)
    z = pseudo_solve(gram, b)
    qs = ws * (As.T @ z)
    energy = float(b @ z)
    tol = FEAS_TOL * (1.0 + np.abs(b).max())
    if np.abs(As @ qs - b).max() > tol:
        # normal equations lost accuracy or b is outside the range
        qs, energy = _stable_min_norm(As, ws, b)
        if np.abs(As @ qs - b).max() > tol:
            raise InfeasibleOnSupport(
                f"b is not in the image of the {int(keep.sum())} supported columns"
            )
    q[keep] = qs
    return q, energy
