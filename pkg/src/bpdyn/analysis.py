"""Potentials and per-step inequality checks for the damped dynamics.

Quantities tracked along a run, for weights ``w``, the weighted l2 minimizer
``q`` and an l1 optimum ``x*``:

* energy  ``E = sum(q_i**2 / w_i)``
* barrier ``B = sum(|x*_i| * log(w_i))``
* ratio   ``max_i |q_i| / w_i``
* ``J(y, w) = sum(y_i**2 / w_i) + sum(w_i)``

The ``*_margins`` functions are vectorized over consecutive rows of a trace;
a margin is the slack of an inequality (negative means violated).  The
``check_*`` functions wrap them for a single pair of reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .errors import (
    NonPositiveWeight,
    StepSizeHypothesisViolated,
    TooLargeForExactAlpha,
    ZeroWeightNonzeroFlow,
)

ALPHA_BUDGET = 10**7

# pass thresholds on margins
NORM_DROP_TOL = 1e-9
BARRIER_TOL = 1e-9
RATIO_TOL = 1e-6
SANDWICH_TOL = 1e-9


@dataclass
class PotentialReport:
    k: int
    l1_w: float
    l1_y: float
    energy_E: float
    barrier_B: float
    max_ratio: float
    j_value: float
    # bT L^+ b from the kernel, and ||A y - b||_inf; JSON only
    energy_gram: float = float("nan")
    residual: float = float("nan")

    CSV_FIELDS = ("k", "l1_w", "l1_y", "energy_E", "barrier_B", "max_ratio", "j_value")


def energy(q, w):
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    on = q != 0
    if np.any(w[on] <= 0):
        raise ZeroWeightNonzeroFlow("nonzero q_i on a zero weight")
    return float(np.sum(q[on] ** 2 / w[on]))


def barrier(x_star, w):
    """``sum(|x*_i| log w_i)``.

    Taking ``|x*|`` is the same as flipping the columns of ``A`` where ``x*``
    is negative, which changes neither ``w`` nor the dynamics.
    """
    x = np.abs(np.asarray(x_star, dtype=float))
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise NonPositiveWeight("barrier needs strictly positive weights")
    return float(x @ np.log(w))


def j_value(y, w):
    """``J(y, w)`` with ``0/0 = 0`` and ``y_i**2/0 = inf`` for ``y_i != 0``."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    zero = w == 0
    if np.any(y[zero] != 0):
        return float("inf")
    pos = ~zero
    return float(np.sum(y[pos] ** 2 / w[pos]) + np.sum(w))


def max_ratio(q, w):
    """``max |q_i| / w_i`` over the positive weights."""
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    pos = w > 0
    if not pos.any():
        return 0.0
    return float(np.max(np.abs(q[pos]) / w[pos]))


def smoothed_l1(x, eta):
    return float(np.sum(np.sqrt(np.asarray(x, dtype=float) ** 2 + eta**2)))


def log_bracket(x):
    """Slacks of ``x - x**2 <= log(1+x) <= x``; both nonnegative on |x| <= 1/2."""
    x = np.asarray(x, dtype=float)
    ln = np.log1p(x)
    return ln - (x - x * x), x - ln


# -- alpha -------------------------------------------------------------------


def _det_int(rows):
    """Exact determinant of a small integer matrix (Bareiss elimination)."""
    M = [list(r) for r in rows]
    k = len(M)
    sign, prev = 1, 1
    for i in range(k - 1):
        if M[i][i] == 0:
            for r in range(i + 1, k):
                if M[r][i] != 0:
                    M[i], M[r] = M[r], M[i]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                M[r][c] = (M[r][c] * M[i][i] - M[r][i] * M[i][c]) // prev
        prev = M[i][i]
    return sign * M[k - 1][k - 1]


def alpha_determinant(A, budget=ALPHA_BUDGET):
    """Largest absolute subdeterminant of an integer matrix, exactly."""
    A = np.asarray(A, dtype=float)
    if not np.all(A == np.round(A)):
        raise ValueError("alpha_determinant needs integer entries")
    m, n = A.shape
    total = sum(comb(m, k) * comb(n, k) for k in range(1, min(m, n) + 1))
    if total > budget:
        raise TooLargeForExactAlpha(f"{total} square submatrices exceed budget {budget}")
    M = [[int(v) for v in row] for row in A]
    best = max(abs(v) for row in M for v in row)
    for k in range(2, min(m, n) + 1):
        for rows in combinations(range(m), k):
            sub = [M[r] for r in rows]
            for cols in combinations(range(n), k):
                d = abs(_det_int([[row[c] for c in cols] for row in sub]))
                if d > best:
                    best = d
    return best


def alpha_inverse_bound(A, budget=ALPHA_BUDGET):
    """``max |(A_B^{-1} A)_{ij}|`` over nonsingular m-column bases ``B``.

    For any positive ``w``, ``W A^T (A W A^T)^{-1} A`` is a convex combination
    of the matrices ``A_B^{-1} A`` (rows placed at ``B``), so this bounds
    ``w_i |a_i^T L^{-1} a_j|``.  For integer ``A`` it never exceeds the
    largest subdeterminant.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if comb(n, m) > budget:
        raise TooLargeForExactAlpha(f"C({n}, {m}) bases exceed budget {budget}")
    subsets = np.array(list(combinations(range(n), m)), dtype=np.intp)
    blocks = np.transpose(A[:, subsets], (1, 0, 2))
    sv = np.linalg.svd(blocks, compute_uv=False)
    ok = sv[:, -1] > sv[:, 0] * 1e-12
    if not ok.any():
        raise ValueError("A has no nonsingular basis")
    sols = np.linalg.solve(blocks[ok], np.broadcast_to(A, (int(ok.sum()), m, n)))
    return float(np.abs(sols).max())


def compute_alpha(A, budget=ALPHA_BUDGET):
    """Constant bounding ``w_i |a_i^T L^{-1} a_j|`` for every ``w > 0``.

    Integer matrices get the exact maximum absolute subdeterminant; any other
    matrix gets :func:`alpha_inverse_bound`.
    """
    A = np.asarray(A, dtype=float)
    if np.all(A == np.round(A)):
        return float(alpha_determinant(A, budget))
    return alpha_inverse_bound(A, budget)


def theorem_bound_terms(A, w):
    """``w_i |a_i^T L^{-1} a_j|`` as an n x n matrix, for checking alpha."""
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=float)
    L = (A * w) @ A.T
    G = A.T @ np.linalg.solve(L, A)
    return np.abs(G) * w[:, None]


# -- checks ------------------------------------------------------------------


@dataclass
class CheckResult:
    """Outcome of one inequality over a range of steps.

    ``margin`` is the worst slack seen (``nan`` when nothing was checked) and
    ``k_worst`` the step where it occurred.
    """

    name: str
    passed: bool = True
    margin: float = float("nan")
    k_worst: int = -1
    n_checked: int = 0
    n_failed: int = 0
    skipped: bool = False
    note: str = ""
    extra: dict = field(default_factory=dict)

    def absorb(self, margins, ks, tol):
        """Fold a batch of margins (NaN = clause inactive) into this result."""
        margins = np.asarray(margins, dtype=float)
        active = ~np.isnan(margins)
        if not active.any():
            return self
        mv = margins[active]
        kv = np.asarray(ks)[active]
        i = int(np.argmin(mv))
        if np.isnan(self.margin) or mv[i] < self.margin:
            self.margin = float(mv[i])
            self.k_worst = int(kv[i])
        bad = int(np.sum(mv < -tol))
        self.n_checked += int(mv.size)
        self.n_failed += bad
        self.passed = self.passed and bad == 0
        return self

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "margin": self.margin,
            "k_worst": self.k_worst,
            "n_checked": self.n_checked,
            "n_failed": self.n_failed,
            "skipped": self.skipped,
            "note": self.note,
            **({"extra": self.extra} if self.extra else {}),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(**d)


def norm_drop_margins(l1_w, l1_w_next, energy_k, h, eps):
    """Slacks of ``||w'|| <= ||w||`` and, when ``||w|| > (1+eps/3) E``,
    of ``||w'|| <= (1 - h eps/8) ||w||`` (NaN where that clause is off)."""
    l1_w = np.asarray(l1_w, dtype=float)
    l1_w_next = np.asarray(l1_w_next, dtype=float)
    monotone = l1_w - l1_w_next
    active = l1_w > (1.0 + eps / 3.0) * np.asarray(energy_k, dtype=float)
    drop = np.where(active, (1.0 - h * eps / 8.0) * l1_w - l1_w_next, np.nan)
    return monotone, drop


def barrier_margins(B, B_next, energy_k, h, eps, xstar_l1):
    """Slack of ``B(k+1) >= B(k) + h (E(k) - (1 + eps/10) ||x*||_1)``."""
    B = np.asarray(B, dtype=float)
    return np.asarray(B_next, dtype=float) - B - h * (
        np.asarray(energy_k, dtype=float) - (1.0 + eps / 10.0) * xstar_l1
    )


def ratio_margins(ratio, n, alpha):
    return n * alpha + RATIO_TOL - np.asarray(ratio, dtype=float)


def energy_identity_margins(gram, energy_k):
    e = np.asarray(energy_k, dtype=float)
    return 1e-8 * (1.0 + e) - np.abs(np.asarray(gram, dtype=float) - e)


def sandwich_margins(l1_y, l1_w, xstar_l1):
    """Worst of the slacks ``||y|| - ||x*||`` and ``||w|| - ||y||``."""
    l1_y = np.asarray(l1_y, dtype=float)
    return np.minimum(l1_y - xstar_l1, np.asarray(l1_w, dtype=float) - l1_y)


def step_size_bound(n, alpha, eps):
    return eps / (40.0 * n * n * alpha * alpha)


def check_lemma_norm_drop(report_k, report_k1, h, eps):
    """Both clauses of the l1 norm-drop lemma for one step."""
    mono, drop = norm_drop_margins(report_k.l1_w, report_k1.l1_w, report_k.energy_E, h, eps)
    res = CheckResult("norm_drop")
    res.absorb([mono], [report_k.k], NORM_DROP_TOL)
    res.absorb([drop], [report_k.k], NORM_DROP_TOL)
    res.extra = {"monotone": float(mono), "drop": float(drop)}
    return res


def check_lemma_barrier(report_k, report_k1, h, eps, x_star, alpha=None):
    """Barrier increase inequality for one step.

    Raises :class:`StepSizeHypothesisViolated` when ``alpha`` is given and
    ``h`` exceeds ``eps / (40 n^2 alpha^2)``.
    """
    x = np.asarray(x_star, dtype=float)
    if alpha is not None:
        bound = step_size_bound(x.size, alpha, eps)
        if h > bound * (1 + 1e-12):
            raise StepSizeHypothesisViolated(f"h = {h:g} exceeds {bound:g}")
    margin = barrier_margins(
        report_k.barrier_B, report_k1.barrier_B, report_k.energy_E, h, eps, float(np.abs(x).sum())
    )
    return CheckResult("barrier").absorb([margin], [report_k.k], BARRIER_TOL)

