"""Desk-scale convergence experiments shared by the scripts and the test suite."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import analysis, dynamics, model, oracle

# runs must finish in seconds, so instances whose theorem step is tiny are skipped
MAX_INV_H = 2e6


@dataclass
class ConvergenceConfig:
    eps: float = 0.1
    count: int = 20
    seed: int = 2024
    max_m: int = 6
    max_n: int = 12
    budget_constant: float = 64.0
    max_inv_h: float = MAX_INV_H


@dataclass
class ConvergenceResult:
    label: str
    n: int
    alpha: float
    h: float
    optimum: float
    budget: float
    iterations: int
    status: str
    seconds: float
    trace: object = field(repr=False, default=None)

    @property
    def within_budget(self):
        return self.status == "target_reached" and self.iterations <= self.budget

    @property
    def within_relaxed(self):
        return self.status == "target_reached" and self.iterations <= 10 * self.budget


def candidate_instances(cfg: ConvergenceConfig):
    """Yield ``(label, instance)`` alternating integer and Gaussian draws.

    Draws whose theorem step ``eps / (40 n^2 alpha^2)`` would need more than
    ``cfg.max_inv_h`` steps per unit of time are rejected.
    """
    rng = np.random.default_rng(cfg.seed)
    accepted = 0
    draw = 0
    while accepted < cfg.count:
        draw += 1
        integer = draw % 2 == 1
        if integer:
            m = int(rng.integers(2, min(cfg.max_m, 4) + 1))
            n = int(rng.integers(m + 2, min(cfg.max_n, 2 * m + 2) + 1))
        else:
            # Gaussian alpha grows fast with the shape; keep these small
            m = int(rng.integers(1, min(cfg.max_m, 3) + 1))
            n = int(rng.integers(m + 1, min(cfg.max_n, m + 3) + 1))
        s = int(rng.integers(1, m + 1))
        seed = int(rng.integers(2**31))
        if integer:
            inst, _ = model.random_integer_instance(m, n, s, seed)
        else:
            inst, _ = model.random_instance(m, n, s, seed)
        alpha = analysis.compute_alpha(inst.A)
        if 40.0 * n * n * alpha * alpha / cfg.eps > cfg.max_inv_h:
            continue
        accepted += 1
        kind = "int" if integer else "gauss"
        yield f"{kind}(m={m},n={n},s={s},seed={seed})", inst


def convergence_run(label, inst, cfg: ConvergenceConfig, *, y0=None, alpha=None, record_every=1000):
    """Physarum at the theorem step from ``w0 = |y0| + 1`` until ``(1+eps)``-optimal.

    The iteration cap is ten times the budget so that a miss of the nominal
    constant is still measured.
    """
    orc = oracle.solve_l1_exact(inst)
    alpha = analysis.compute_alpha(inst.A) if alpha is None else alpha
    h = dynamics.theorem_step_size(inst, cfg.eps, alpha)
    step = dynamics.StepConfig(h, "physarum")
    start = dynamics.start_state(inst, step, y0)
    budget = dynamics.iteration_budget(h, cfg.eps, float(start.w.sum()), orc.optimal_value,
                                       cfg.budget_constant)
    stop = dynamics.StoppingRule.gap(int(np.ceil(10 * budget)), orc.optimal_value, cfg.eps)
    t0 = time.perf_counter()
    tr = dynamics.run(inst, step, stop, start=start, x_star=orc.optimizer, eps=cfg.eps,
                      alpha=alpha, record_every=record_every, instance_id=label)
    tr.oracle = orc
    return ConvergenceResult(label, inst.n, alpha, h, orc.optimal_value, budget,
                             tr.iterations, tr.terminal_status, time.perf_counter() - t0, tr)


def appendix_a_convergence(cfg: ConvergenceConfig, record_every=1000):
    inst, y0 = model.appendix_a_state()
    return convergence_run("appendix_a", inst, cfg, y0=y0, record_every=record_every)
