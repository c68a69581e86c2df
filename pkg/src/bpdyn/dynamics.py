"""Steppers on pairs ``(y, w)`` and the run driver.

Every variant first computes the weighted l2 minimizer ``q`` for the current
weights and then moves the pair:

* ``unified``           ``(y, w) + h * (q - y, |q| - w)``
* ``physarum``          ``w' = h|q| + (1-h) w``, ``y' = (1-h) y + h q``, 0 < h < 1
* ``irls``              ``(y', w') = (q, |q|)`` with weights ``|y|``; entries that
                        reach zero are frozen there for good
* ``regularized_irls``  weights ``sqrt(y**2 + eta**2)``, ``y' = q``
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import analysis
from .analysis import CheckResult, PotentialReport
from .errors import BadEpsilon, BPError, InfeasibleOnSupport
from .linalg import weighted_l2_min
from .trace import Trace

VARIANTS = ("unified", "irls", "physarum", "regularized_irls")
ZERO_CLAMP = 1e-14
FEAS_TOL = 1e-7
CHUNK = 1 << 16


@dataclass(frozen=True)
class StepConfig:
    h: float = 1.0
    variant: str = "unified"
    eta: float | None = None
    zero_clamp: float = ZERO_CLAMP

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 < self.h <= 1.0:
            raise ValueError(f"h must lie in (0, 1], got {self.h}")
        if self.variant == "irls" and self.h != 1.0:
            raise ValueError("irls runs with h = 1")
        if self.variant == "physarum" and self.h >= 1.0:
            raise ValueError("physarum needs h < 1")
        if self.variant == "regularized_irls":
            if self.eta is None or not self.eta > 0:
                raise ValueError("regularized_irls needs eta > 0")
        elif self.eta is not None:
            raise ValueError("eta only applies to regularized_irls")


@dataclass(frozen=True, eq=False)
class State:
    y: np.ndarray
    w: np.ndarray
    k: int = 0

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if self.y.shape != self.w.shape:
            raise ValueError("y and w must have the same length")

    @property
    def support(self):
        return self.w > 0


@dataclass(frozen=True)
class StoppingRule:
    max_iter: int
    target_l1: float | None = None
    stationary_tol: float | None = None

    @classmethod
    def gap(cls, max_iter, optimum, eps):
        """Stop once ``||w||_1 <= (1 + eps) * optimum``."""
        return cls(max_iter, target_l1=(1.0 + eps) * optimum)


def feasibility_residual(inst, y):
    return float(np.abs(inst.A @ y - inst.b).max())


def _clamp(y, zero_clamp):
    y = np.array(y, dtype=float)
    y[np.abs(y) <= zero_clamp] = 0.0
    return y


# -- starting points ---------------------------------------------------------


def irls_state(y0, zero_clamp=ZERO_CLAMP, k=0):
    y = _clamp(y0, zero_clamp)
    return State(y, np.abs(y), k)


def start_state(inst, cfg, y0=None):
    """Starting pair for ``cfg.variant`` from a feasible ``y0``.

    ``y0`` defaults to the least-squares solution.  Damped variants start at
    ``w = |y0| + 1``, which lies in P and has every weight at least one.
    """
    y0 = inst.least_squares_point() if y0 is None else np.asarray(y0, dtype=float)
    if y0.shape != (inst.n,):
        raise ValueError(f"start vector has length {y0.size}, expected {inst.n}")
    if cfg.variant == "irls":
        return irls_state(y0, cfg.zero_clamp)
    if cfg.variant == "regularized_irls":
        return State(y0, np.sqrt(y0**2 + cfg.eta**2))
    return State(y0, np.abs(y0) + 1.0)


# -- single steps --------------------------------------------------------------


def _weights(st, cfg):
    if cfg.variant == "regularized_irls":
        return np.sqrt(st.y**2 + cfg.eta**2)
    return st.w


def _move(st, q, weights, cfg):
    k = st.k + 1
    if cfg.variant == "irls":
        return irls_state(q, cfg.zero_clamp, k)
    if cfg.variant == "regularized_irls":
        return State(q, weights, k)
    if cfg.variant == "physarum":
        h = cfg.h
        w = h * np.abs(q) + (1.0 - h) * st.w
        if not np.all(w > 0):
            raise BPError("physarum weights left the positive orthant")
        return State((1.0 - h) * st.y + h * q, w, k)
    h = cfg.h
    return State(st.y + h * (q - st.y), st.w + h * (np.abs(q) - st.w), k)


def unified_step(inst, st, cfg):
    """One step of ``(y, w) <- (y, w) + h F(y, w)`` with ``F = (q - y, |q| - w)``."""
    q, _ = weighted_l2_min(inst.A, inst.b, st.w)
    h = cfg.h
    return State(st.y + h * (q - st.y), st.w + h * (np.abs(q) - st.w), st.k + 1)


def irls_step(inst, st, zero_clamp=ZERO_CLAMP):
    """One IRLS step from ``st.y`` (weights ``|y|``; zeros are hard constraints).

    Entries of the result with magnitude at most ``zero_clamp`` are set to 0
    and, since their weight is then zero, stay 0 afterwards.
    """
    cur = irls_state(st.y, zero_clamp, st.k)
    q, _ = weighted_l2_min(inst.A, inst.b, cur.w)
    return irls_state(q, zero_clamp, st.k + 1)


def physarum_step(inst, st, h):
    if not 0.0 < h < 1.0:
        raise ValueError(f"physarum needs 0 < h < 1, got {h}")
    if not np.all(st.w > 0):
        raise ValueError("physarum needs strictly positive weights")
    return _move(st, weighted_l2_min(inst.A, inst.b, st.w)[0], st.w, StepConfig(h, "physarum"))


def regularized_irls_step(inst, st, eta):
    cfg = StepConfig(1.0, "regularized_irls", eta=eta)
    weights = _weights(st, cfg)
    q, _ = weighted_l2_min(inst.A, inst.b, weights)
    return State(q, weights, st.k + 1)


def theorem_step_size(inst, eps, alpha):
    """Largest step ``eps / (40 n^2 alpha^2)`` covered by the convergence bound."""
    if not 0.0 < eps < 0.5:
        raise BadEpsilon(f"eps must lie in (0, 1/2), got {eps}")
    return analysis.step_size_bound(inst.n, alpha, eps)


def iteration_budget(h, eps, w0_l1, x_star_l1, constant=64.0):
    """``constant * (ln M + ln ||x*||_1) / (h eps^2)`` with ``M = ||w0||_1 / ||x*||_1``."""
    M = w0_l1 / x_star_l1
    return constant * (math.log(M) + math.log(x_star_l1)) / (h * eps * eps)


# -- runs ----------------------------------------------------------------------

# row columns (shared with _kernels.physarum_rows, which omits the last):
# l1_w, l1_y, energy_E, energy_gram, barrier_B, max_ratio, j_value,
# residual, smoothed


class _Recorder:
    """Thins rows into a Trace and folds every consecutive pair into checks."""

    def __init__(self, trace, inst, cfg, *, stride, x_star, eps, alpha, w0_l1):
        self.trace = trace
        self.stride = stride
        self.cfg = cfg
        self.n = inst.n
        self.eps = eps
        self.alpha = alpha
        self.xs = None if x_star is None else float(np.abs(x_star).sum())
        self.w0_l1 = w0_l1
        self.prev = None
        self.last = None
        self.feas_tol = FEAS_TOL * (1.0 + float(np.abs(inst.b).max()))
        damped = cfg.variant in ("physarum", "unified") and cfg.h < 1.0
        self.damped = damped
        names = ["feasibility", "energy_identity"]
        if damped:
            names += ["norm_drop", "sandwich"]
            if alpha is not None:
                names.append("ratio_bound")
            if self.xs is not None and eps is not None:
                names.append("barrier")
            if self.xs is not None:
                names.append("barrier_upper")
        elif cfg.variant == "irls":
            names += ["alt_min_identity", "l1_y_monotone"]
        elif cfg.variant == "regularized_irls":
            names += ["smoothed_monotone", "smoothed_bracket"]
        self.checks = {nm: CheckResult(nm) for nm in names}
        if "barrier" in self.checks:
            c = self.checks["barrier"]
            if alpha is None:
                c.note = "step-size hypothesis not verified (alpha unknown)"
            else:
                bound = analysis.step_size_bound(self.n, alpha, eps)
                if cfg.h > bound * (1 + 1e-12):
                    c.skipped = True
                    c.note = f"StepSizeHypothesisViolated: h = {cfg.h:g} > {bound:g}"
        trace.checks = self.checks

    def feed(self, ks, cols):
        if len(ks) == 0:
            return
        ks = np.asarray(ks)
        cols = np.asarray(cols, dtype=float)
        self._single(ks, cols)
        if self.prev is not None:
            pk = np.concatenate(([self.prev[0]], ks))
            pc = np.vstack((self.prev[1][None, :], cols))
        else:
            pk, pc = ks, cols
        if len(pk) > 1:
            self._pairs(pk[:-1], pc[:-1], pc[1:])
        self.prev = (int(ks[-1]), cols[-1].copy())
        keep = np.nonzero(ks % self.stride == 0)[0]
        for i in keep:
            self.trace.rows.append(self._report(ks[i], cols[i]))
        self.last = (int(ks[-1]), cols[-1].copy())

    def finish(self):
        if self.last is not None and (not self.trace.rows or self.trace.rows[-1].k != self.last[0]):
            self.trace.rows.append(self._report(*self.last))

    @staticmethod
    def _report(k, c):
        c = [float(v) for v in c]
        return PotentialReport(int(k), c[0], c[1], c[2], c[4], c[5], c[6], c[3], c[7])

    def _single(self, ks, c):
        ch = self.checks
        ch["feasibility"].absorb(self.feas_tol - c[:, 7], ks, 0.0)
        ch["energy_identity"].absorb(analysis.energy_identity_margins(c[:, 3], c[:, 2]), ks, 0.0)
        if self.damped:
            lower = self.xs if self.xs is not None else -np.inf
            ch["sandwich"].absorb(analysis.sandwich_margins(c[:, 1], c[:, 0], lower), ks,
                                  analysis.SANDWICH_TOL)
            if "ratio_bound" in ch:
                ch["ratio_bound"].absorb(analysis.ratio_margins(c[:, 5], self.n, self.alpha), ks, 0.0)
            if "barrier_upper" in ch:
                cap = self.xs * math.log(self.w0_l1) + 1e-6
                ch["barrier_upper"].absorb(cap - c[:, 4], ks, 0.0)
        elif self.cfg.variant == "irls":
            ch["alt_min_identity"].absorb(1e-9 - np.abs(c[:, 6] - 2.0 * c[:, 1]), ks, 0.0)
        elif self.cfg.variant == "regularized_irls":
            lo = c[:, 8] - c[:, 1]
            hi = c[:, 1] + self.n * self.cfg.eta - c[:, 8]
            ch["smoothed_bracket"].absorb(np.minimum(lo, hi), ks, 1e-12)

    def _pairs(self, ks, a, b):
        ch = self.checks
        if self.damped:
            mono, drop = analysis.norm_drop_margins(
                a[:, 0], b[:, 0], a[:, 2], self.cfg.h, self.eps if self.eps is not None else 0.0)
            ch["norm_drop"].absorb(mono, ks, analysis.NORM_DROP_TOL)
            if self.eps is not None:
                ch["norm_drop"].absorb(drop, ks, analysis.NORM_DROP_TOL)
            if "barrier" in ch and not ch["barrier"].skipped:
                m = analysis.barrier_margins(a[:, 4], b[:, 4], a[:, 2], self.cfg.h, self.eps, self.xs)
                ch["barrier"].absorb(m, ks, analysis.BARRIER_TOL)
        elif self.cfg.variant == "irls":
            sel = ks >= 1
            ch["l1_y_monotone"].absorb((a[:, 1] - b[:, 1])[sel], ks[sel], 1e-9)
        elif self.cfg.variant == "regularized_irls":
            ch["smoothed_monotone"].absorb(a[:, 8] - b[:, 8], ks, 1e-9)


def _row(inst, st, cfg, x_star, weights, q, gram):
    """Diagnostics of state ``st`` (q-dependent entries NaN when ``q`` is None)."""
    nan = float("nan")
    if x_star is None:
        B = nan
    else:
        xa = np.abs(x_star)
        on = xa > 0
        with np.errstate(divide="ignore"):
            B = float(xa[on] @ np.log(st.w[on]))
    if q is None:
        E = ratio = nan
        gram = nan
    else:
        E = analysis.energy(q, weights)
        ratio = analysis.max_ratio(q, weights)
    smoothed = analysis.smoothed_l1(st.y, cfg.eta) if cfg.eta is not None else nan
    return (float(st.w.sum()), float(np.abs(st.y).sum()), E, gram, B, ratio,
            analysis.j_value(st.y, st.w), feasibility_residual(inst, st.y), smoothed)


def run(inst, cfg, stop, *, start=None, x_star=None, eps=None, alpha=None,
        record_every=1, keep_iterates=0, fast=True, instance_id=""):
    """Iterate ``cfg.variant`` from ``start`` and record a :class:`Trace`.

    Parameters
    ----------
    start : State, optional
        Defaults to :func:`start_state` at the least-squares point.
    x_star : array, optional
        An l1 optimum; enables the barrier and sandwich checks.
    eps, alpha : float, optional
        Enable the norm-drop clause, the barrier inequality and the ratio bound.
    record_every : int
        Keep every ``record_every``-th row (the last row is always kept).
        Checks always see every step.
    keep_iterates : int
        Store ``(y, w)`` for ``k <= keep_iterates`` and for the final state.
    fast : bool
        Use the compiled loop for ``physarum`` runs once past ``keep_iterates``.
    """
    st = start_state(inst, cfg) if start is None else start
    config = asdict(cfg)
    config.update(max_iter=stop.max_iter, target_l1=stop.target_l1,
                  stationary_tol=stop.stationary_tol, eps=eps, alpha=alpha)
    trace = Trace(instance_id=instance_id, config=config,
                  column_names=inst.column_names, stride=max(1, int(record_every)))
    rec = _Recorder(trace, inst, cfg, stride=trace.stride, x_star=x_star, eps=eps,
                    alpha=alpha, w0_l1=float(st.w.sum()))
    target = -np.inf if stop.target_l1 is None else stop.target_l1

    ks, rows = [], []

    def flush():
        if ks:
            rec.feed(np.array(ks), np.array(rows))
            ks.clear()
            rows.clear()

    status = None
    pending_stationary = False
    while status is None:
        if (fast and cfg.variant == "physarum" and st.k > keep_iterates
                and not pending_stationary and np.all(st.w > 0)):
            flush()
            st, status = _fast_physarum(inst, st, cfg, stop, target, x_star, rec)
            if status is not None:
                trace.iterates[st.k] = (st.y.copy(), st.w.copy())
                break
        if st.k <= keep_iterates:
            trace.iterates[st.k] = (st.y.copy(), st.w.copy())
        weights = _weights(st, cfg)
        try:
            q, gram = weighted_l2_min(inst.A, inst.b, weights)
        except InfeasibleOnSupport as exc:
            ks.append(st.k)
            rows.append(_row(inst, st, cfg, x_star, weights, None, None))
            status, trace.message = "support_collapse", str(exc)
            break
        except (BPError, np.linalg.LinAlgError) as exc:
            ks.append(st.k)
            rows.append(_row(inst, st, cfg, x_star, weights, None, None))
            status, trace.message = "kernel_error", str(exc)
            break
        ks.append(st.k)
        rows.append(_row(inst, st, cfg, x_star, weights, q, gram))
        if len(ks) >= 4096:
            flush()
        if rows[-1][0] <= target:
            status = "target_reached"
        elif pending_stationary:
            status = "stationary"
        elif st.k >= stop.max_iter:
            status = "max_iter"
        else:
            try:
                nxt = _move(st, q, weights, cfg)
            except BPError as exc:
                status, trace.message = "kernel_error", str(exc)
                break
            tol = stop.stationary_tol
            if tol is not None and np.abs(nxt.y - st.y).max() <= tol and np.abs(nxt.w - st.w).max() <= tol:
                pending_stationary = True
            st = nxt
    flush()
    rec.finish()
    trace.iterates[st.k] = (st.y.copy(), st.w.copy())
    trace.terminal_status = status
    return trace


def _fast_physarum(inst, st, cfg, stop, target, x_star, rec):
    """Advance with the compiled loop; returns ``(state, status or None)``.

    ``None`` means the loop handed control back (a reference-only branch is
    needed) with ``state`` not yet recorded.
    """
    from ._kernels import BAIL, TARGET, physarum_rows

    A = np.ascontiguousarray(inst.A)
    b = np.ascontiguousarray(inst.b)
    xabs = np.zeros(inst.n) if x_star is None else np.abs(np.asarray(x_star, dtype=float))
    y = st.y.copy()
    w = st.w.copy()
    k = st.k
    out = np.empty((CHUNK, 8))
    while True:
        remaining = stop.max_iter - k + 1
        nrows = min(CHUNK, remaining)
        advance_last = nrows < remaining
        r, code = physarum_rows(A, b, y, w, cfg.h, xabs, target, nrows, advance_last, out)
        if r:
            cols = np.empty((r, 9))
            cols[:, :8] = out[:r]
            cols[:, 8] = np.nan
            if x_star is None:
                cols[:, 4] = np.nan
            rec.feed(np.arange(k, k + r), cols)
        if code == TARGET:
            return State(y, w, k + r - 1), "target_reached"
        if code == BAIL:
            return State(y, w, k + r), None
        if not advance_last:
            return State(y, w, k + r - 1), "max_iter"
        k += r
