"""Acceptance suite: one test per criterion, summarized at the end of the run."""

import time

import numpy as np
import pytest

from bpdyn import analysis, dynamics, model, oracle
from bpdyn.dynamics import State, StepConfig, StoppingRule
from bpdyn.experiments import (
    ConvergenceConfig,
    appendix_a_convergence,
    candidate_instances,
    convergence_run,
)

EPS = 0.1


def _random_feasible(inst, rng, scale=1.0):
    """Least-squares point plus a random null-space component."""
    x0 = inst.least_squares_point()
    _, s, vt = np.linalg.svd(inst.A)
    null = vt[inst.m:]
    return x0 + scale * rng.standard_normal(null.shape[0]) @ null


@pytest.mark.criterion(1, "IRLS stalls at 4 on the counterexample graph; optimum is 3")
def test_irls_counterexample():
    t0 = time.perf_counter()
    inst, y0 = model.appendix_a_state()
    orc = oracle.solve_l1_exact(inst)
    tr = dynamics.run(inst, StepConfig(1.0, "irls"), StoppingRule(100, stationary_tol=1e-13),
                      start=dynamics.irls_state(y0), keep_iterates=100)
    elapsed = time.perf_counter() - t0

    j = inst.column("u3-u4")
    assert abs(tr.y_at(1)[j]) <= 1e-12
    assert tr.terminal_status == "stationary"
    assert abs(np.abs(tr.final_y).sum() - 4.0) <= 1e-6
    assert orc.optimal_value == pytest.approx(3.0, abs=1e-9)
    assert orc.unique
    assert elapsed < 1.0


@pytest.fixture(scope="module")
def convergence_runs():
    cfg = ConvergenceConfig(eps=EPS)
    runs = [appendix_a_convergence(cfg)]
    runs += [convergence_run(label, inst, cfg) for label, inst in candidate_instances(cfg)]
    return runs


@pytest.mark.slow
@pytest.mark.criterion(2, "Physarum at the theorem step reaches (1+eps)-optimality within budget")
def test_physarum_convergence(convergence_runs):
    assert len(convergence_runs) == 21
    assert sum(r.label.startswith("gauss") for r in convergence_runs) >= 5
    for r in convergence_runs:
        assert r.seconds < 60.0, r
        assert r.within_budget, r
        assert r.trace.final.l1_w <= (1 + EPS) * r.optimum


LEMMA_CHECKS = ("norm_drop", "barrier", "ratio_bound", "energy_identity", "sandwich")


@pytest.mark.slow
@pytest.mark.criterion(3, "lemma suite holds at every step of every convergence run")
def test_lemma_suite(convergence_runs):
    for r in convergence_runs:
        checks = r.trace.checks
        for name in LEMMA_CHECKS:
            c = checks[name]
            assert not c.skipped, (r.label, c)
            assert c.passed, (r.label, c)
            assert c.n_checked >= r.iterations, (r.label, c)
        # the multiplicative-drop clause must actually have been exercised
        assert checks["norm_drop"].n_checked > r.iterations


def _equivalence_pairs(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        m = int(rng.integers(2, 5))
        n = int(rng.integers(m + 2, 2 * m + 3))
        maker = model.random_integer_instance if len(out) % 2 else model.random_instance
        inst, _ = maker(m, n, int(rng.integers(1, m + 1)), int(rng.integers(2**31)))
        y0 = _random_feasible(inst, rng)
        if np.abs(y0).min() < 1e-3:
            continue
        out.append((inst, y0))
    return out


@pytest.mark.criterion(4, "IRLS and Physarum are the unified system at h = 1 and h = 0.3")
def test_unified_equivalence():
    for inst, y0 in _equivalence_pairs(50, 7):
        a = dynamics.irls_state(y0)
        u = State(y0, np.abs(y0))
        cfg1 = StepConfig(1.0, "unified")
        for _ in range(10):
            a = dynamics.irls_step(inst, a)
            u = dynamics.unified_step(inst, u, cfg1)
            assert np.abs(a.y - u.y).max() <= 1e-10

        p = State(y0, np.abs(y0) + 1.0)
        u = State(y0, np.abs(y0) + 1.0)
        cfg = StepConfig(0.3, "unified")
        for _ in range(50):
            p = dynamics.physarum_step(inst, p, 0.3)
            u = dynamics.unified_step(inst, u, cfg)
            assert np.abs(p.w - u.w).max() <= 1e-12


@pytest.mark.criterion(5, "alternate-minimization identity and monotone l1 along IRLS")
def test_alternate_minimization():
    rng = np.random.default_rng(11)
    runs = 0
    while runs < 20:
        m = int(rng.integers(2, 6))
        n = int(rng.integers(m + 2, 2 * m + 3))
        inst, _ = model.random_instance(m, n, int(rng.integers(1, m + 1)), int(rng.integers(2**31)))
        y0 = _random_feasible(inst, rng)
        if np.abs(y0).min() < 1e-3:
            continue
        runs += 1
        tr = dynamics.run(inst, StepConfig(1.0, "irls"), StoppingRule(30),
                          start=dynamics.irls_state(y0), keep_iterates=30)
        assert tr.checks["alt_min_identity"].passed
        assert tr.checks["l1_y_monotone"].passed
        l1 = []
        for k in sorted(tr.iterates):
            y, w = tr.iterates[k]
            np.testing.assert_array_equal(w, np.abs(y))
            assert abs(analysis.j_value(y, w) - 2 * np.abs(y).sum()) <= 1e-9
            l1.append(np.abs(y).sum())
        assert np.all(np.diff(l1[1:]) <= 1e-9)


def _random_graph(rng):
    while True:
        v = int(rng.integers(3, 8))
        e = int(rng.integers(v - 1, min(12, v * (v - 1) // 2) + 1))
        edges = [tuple(sorted(rng.choice(v, 2, replace=False))) for _ in range(e)]
        g = model.GraphSpec(v, tuple((int(a), int(b)) for a, b in edges), 0, v - 1)
        if model.reachable(g, 0, v - 1):
            return g


@pytest.mark.criterion(6, "oracle agrees with BFS and beats every feasible probe")
def test_oracle_cross_validation():
    rng = np.random.default_rng(3)
    graphs = [model.appendix_a_graph(),
              model.GraphSpec(3, ((0, 1), (1, 2)), 0, 2)]
    graphs += [_random_graph(rng) for _ in range(40)]
    unique_seen = 0
    for g in graphs:
        dist, count = oracle.shortest_path_length(g)
        if count != 1:
            continue
        unique_seen += 1
        res = oracle.solve_l1_exact(model.build_graph_instance(g))
        assert res.optimal_value == dist
    assert unique_seen >= 10

    for seed in range(20):
        inst, _ = model.random_instance(3, 7, 2, seed)
        res = oracle.solve_l1_exact(inst)
        for scale in (1e-3, 1e-1, 10.0):
            for _ in range(50):
                z = _random_feasible(inst, rng, scale)
                probe = res.optimizer + (z - inst.least_squares_point())
                assert np.abs(probe).sum() >= res.optimal_value - 1e-9


@pytest.mark.criterion(7, "regularized IRLS keeps u3-u4 alive and descends the smoothed objective")
def test_regularized_irls():
    eta = 0.01
    inst, y0 = model.appendix_a_state()
    cfg = StepConfig(1.0, "regularized_irls", eta=eta)
    tr = dynamics.run(inst, cfg, StoppingRule(100), start=dynamics.start_state(inst, cfg, y0),
                      keep_iterates=100)
    assert tr.iterations == 100
    j = inst.column("u3-u4")
    ys = [tr.iterates[k][0] for k in range(101)]
    assert all(abs(y[j]) > 0 for y in ys)
    s = np.array([analysis.smoothed_l1(y, eta) for y in ys])
    assert np.all(np.diff(s) <= 1e-9)
    for y, sv in zip(ys, s):
        l1 = np.abs(y).sum()
        assert l1 <= sv <= l1 + inst.n * eta
    assert tr.checks["smoothed_monotone"].passed
    assert tr.checks["smoothed_bracket"].passed


@pytest.mark.criterion(8, "alpha bounds w_i |a_i^T L^-1 a_j|")
def test_alpha_oracle():
    assert analysis.compute_alpha(np.eye(2)) == 1
    inst, _ = model.appendix_a_state()
    assert analysis.compute_alpha(inst.A) == 1

    rng = np.random.default_rng(8)
    done = 0
    while done < 10:
        m = int(rng.integers(2, 4))
        n = int(rng.integers(m + 1, m + 4))
        A = rng.integers(-2, 3, size=(m, n)).astype(float)
        if np.linalg.matrix_rank(A) < m:
            continue
        done += 1
        alpha = analysis.compute_alpha(A)
        worst = 0.0
        for _ in range(200):
            w = np.exp(rng.uniform(-7, 7, n))
            worst = max(worst, analysis.theorem_bound_terms(A, w).max())
        assert alpha - worst >= -1e-9
