"""Physarum at the theorem step on the counterexample graph plus random instances.

Prints one line per instance: alpha, step size, iterations used against the
budget, wall time and any failed per-step check.

    python3 scripts/physarum_convergence.py [--count 20] [--eps 0.1] [--seed 2024]
"""

import argparse

from bpdyn.experiments import (
    ConvergenceConfig,
    appendix_a_convergence,
    candidate_instances,
    convergence_run,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    cfg = ConvergenceConfig(eps=args.eps, count=args.count, seed=args.seed)

    runs = [appendix_a_convergence(cfg)]
    print(f"{'instance':44s} {'alpha':>7s} {'1/h':>9s} {'iters':>9s} {'budget':>10s} {'sec':>6s}  checks")
    for label, inst in [(None, None)] + list(candidate_instances(cfg)):
        r = runs[0] if label is None else convergence_run(label, inst, cfg)
        if label is not None:
            runs.append(r)
        failed = [c.name for c in r.trace.checks.values() if not c.skipped and not c.passed]
        print(f"{r.label:44s} {r.alpha:7.3g} {1 / r.h:9.0f} {r.iterations:9d} {r.budget:10.3g} "
              f"{r.seconds:6.2f}  {','.join(failed) or 'ok'}", flush=True)
    worst = max(r.iterations / r.budget for r in runs)
    hit = sum(r.within_budget for r in runs)
    print(f"{hit}/{len(runs)} within budget; largest iterations/budget = {worst:.2e}")


if __name__ == "__main__":
    main()
