"""IRLS versus Physarum on the eight-vertex counterexample graph.

Writes traces to ``out/`` and prints the terminal values of both runs.

    python3 scripts/reproduce_appendix_a.py [--eps 0.1]
"""

import argparse
from pathlib import Path

from bpdyn import dynamics, model, oracle
from bpdyn.dynamics import StepConfig, StoppingRule
from bpdyn.experiments import ConvergenceConfig, appendix_a_convergence
from bpdyn.trace import write_csv, write_json


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(exist_ok=True)

    inst, y0 = model.appendix_a_state()
    orc = oracle.solve_l1_exact(inst)
    irls = dynamics.run(inst, StepConfig(1.0, "irls"), StoppingRule(100, stationary_tol=1e-13),
                        start=dynamics.irls_state(y0), x_star=orc.optimizer, keep_iterates=100,
                        instance_id="appendix_a")
    irls.oracle = orc
    write_json(irls, out / "irls.json")
    write_csv(irls, out / "irls.csv")
    print(f"oracle: optimum {orc.optimal_value:g}, unique={orc.unique}")
    print(f"irls: y[u3-u4] after one step = {irls.y_at(1)[inst.column('u3-u4')]:g}, "
          f"{irls.terminal_status} at k={irls.iterations} with ||y||_1 = {irls.final.l1_y:.12g}")

    res = appendix_a_convergence(ConvergenceConfig(eps=args.eps))
    write_json(res.trace, out / "physarum.json")
    write_csv(res.trace, out / "physarum.csv")
    print(f"physarum: h = {res.h:.6g}, ||w||_1 = {res.trace.final.l1_w:.6g} after {res.iterations} "
          f"steps (budget {res.budget:.3g}), {res.seconds:.2f} s, "
          f"checks {'ok' if res.trace.all_checks_passed() else 'FAILED'}")


if __name__ == "__main__":
    main()
