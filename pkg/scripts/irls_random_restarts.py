"""Exploratory: how often does IRLS miss the optimum on the counterexample graph?

Draws random feasible positive flows (convex combinations of the three s-t
paths) as starting points and records the terminal l1 norm of IRLS.
"""

import argparse
from collections import Counter

import numpy as np

from bpdyn import dynamics, model, oracle
from bpdyn.dynamics import StepConfig, StoppingRule


def path_flows(inst):
    """Indicator flows of the three s-t paths, in column order."""
    names = inst.column_names
    paths = [
        ["u0-u1", "u1-u2", "u2-u3", "u3-u7"],
        ["u0-u4", "u4-u5", "u5-u6", "u6-u7"],
        ["u0-u1", "u1-u2", "u2-u3", "u3-u4", "u4-u5", "u5-u6", "u6-u7"],
    ]
    out = np.zeros((4, inst.n))
    for i, p in enumerate(paths):
        out[i, [names.index(e) for e in p]] = 1.0
    out[3, [names.index(e) for e in ("u0-u4", "u3-u4", "u3-u7")]] = (1, -1, 1)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--starts", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--without-optimal", action="store_true",
                    help="mix only the three non-optimal paths")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    inst, _ = model.appendix_a_state()
    opt = oracle.solve_l1_exact(inst).optimal_value
    flows = path_flows(inst)
    if args.without_optimal:
        flows = flows[:3]
    outcomes = Counter()
    for _ in range(args.starts):
        y0 = rng.dirichlet(np.ones(len(flows))) @ flows
        tr = dynamics.run(inst, StepConfig(1.0, "irls"), StoppingRule(500, stationary_tol=1e-13),
                          start=dynamics.irls_state(y0))
        outcomes[round(tr.final.l1_y, 6)] += 1
    print(f"optimum {opt:g}")
    for value, count in sorted(outcomes.items()):
        print(f"terminal ||y||_1 = {value:g}: {count} starts")


if __name__ == "__main__":
    main()
