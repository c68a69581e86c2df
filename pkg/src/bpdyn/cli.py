"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 numeric or diagnostic failure
(support collapse, kernel error, failed lemma check).
"""

from __future__ import annotations

import argparse
import sys
from math import comb

import numpy as np

from . import analysis, dynamics, model, oracle
from .errors import BPError, FormatError, TooLargeForExactAlpha
from .trace import write_csv, write_json

VARIANT_NAMES = {"irls": "irls", "physarum": "physarum", "unified": "unified",
                 "reg-irls": "regularized_irls"}


class UsageError(Exception):
    pass


def _add_source(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--instance", metavar="PATH", help=".bpinst instance file")
    g.add_argument("--graph", metavar="PATH", help=".bpgraph s-t path instance")
    g.add_argument("--random", metavar="M,N,S", help="Gaussian instance with an S-sparse planted solution")
    g.add_argument("--random-int", metavar="M,N,S", help="like --random with entries in {-1,0,1}")
    p.add_argument("--seed", type=int, default=0)


def _load(args):
    try:
        if args.instance:
            return model.read_instance(args.instance)
        if args.graph:
            return model.build_graph_instance(model.read_graph(args.graph))
        spec = args.random or args.random_int
        m, n, s = (int(v) for v in spec.split(","))
        gen = model.random_instance if args.random else model.random_integer_instance
        return gen(m, n, s, args.seed)[0]
    except (OSError, FormatError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _oracle_or_none(inst):
    if comb(2 * inst.n, inst.m) > oracle.BUDGET:
        return None
    return oracle.solve_l1_exact(inst)


def _alpha(inst, args):
    if args.alpha is not None:
        return args.alpha
    try:
        return analysis.compute_alpha(inst.A)
    except TooLargeForExactAlpha as exc:
        raise UsageError(f"{exc}; pass --alpha") from exc


def _start(inst, spec):
    if spec in (None, "least-squares"):
        return None
    if spec == "figure2":
        ref, y0 = model.appendix_a_state()
        if inst.column_names != ref.column_names or not np.array_equal(inst.A, ref.A):
            raise UsageError("--start figure2 needs the counterexample graph (data/appendix_a.bpgraph)")
        return y0
    if spec.startswith("file:"):
        try:
            y0 = np.loadtxt(spec[5:], dtype=float).reshape(-1)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read start vector: {exc}") from exc
        if y0.size != inst.n:
            raise UsageError(f"start vector has {y0.size} entries, expected {inst.n}")
        if dynamics.feasibility_residual(inst, y0) > 1e-7 * (1 + np.abs(inst.b).max()):
            raise UsageError("start vector does not satisfy A y = b")
        return y0
    raise UsageError(f"unknown --start {spec!r}")


def _config(inst, args):
    variant = VARIANT_NAMES[args.variant]
    if args.eta is not None and variant != "regularized_irls":
        raise UsageError("--eta only applies to --variant reg-irls")
    if variant == "regularized_irls" and args.eta is None:
        raise UsageError("--variant reg-irls needs --eta")
    alpha = None
    if args.theorem_h:
        if variant in ("irls", "regularized_irls"):
            raise UsageError("--theorem-h applies to physarum/unified only")
        if args.h is not None:
            raise UsageError("--theorem-h and --h are exclusive")
        if args.eps is None:
            raise UsageError("--theorem-h needs --eps")
        alpha = _alpha(inst, args)
        try:
            h = dynamics.theorem_step_size(inst, args.eps, alpha)
        except BPError as exc:
            raise UsageError(str(exc)) from exc
    elif variant in ("irls", "regularized_irls"):
        if args.h not in (None, 1.0):
            raise UsageError(f"--variant {args.variant} runs with h = 1")
        h = 1.0
    else:
        if args.h is None:
            raise UsageError(f"--variant {args.variant} needs --h or --theorem-h")
        h = args.h
    if alpha is None and args.alpha is not None:
        alpha = args.alpha
    try:
        return dynamics.StepConfig(h, variant, eta=args.eta), alpha
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _report_checks(trace, out):
    ok = True
    for c in trace.checks.values():
        if c.skipped:
            print(f"check {c.name}: skipped ({c.note})", file=out)
            continue
        ok = ok and c.passed
        word = "pass" if c.passed else "FAIL"
        print(f"check {c.name}: {word} (worst margin {c.margin:.3g} at k={c.k_worst}, "
              f"{c.n_checked} checked)", file=out)
    return ok


def cmd_solve(args, out):
    inst = _load(args)
    cfg, alpha = _config(inst, args)
    orc = _oracle_or_none(inst)
    if alpha is None and cfg.variant in ("physarum", "unified"):
        try:
            alpha = analysis.compute_alpha(inst.A)
        except TooLargeForExactAlpha:
            alpha = None
    y0 = _start(inst, args.start)
    start = dynamics.start_state(inst, cfg, y0)
    target = None
    if args.eps is not None and orc is not None and cfg.variant in ("physarum", "unified"):
        target = (1.0 + args.eps) * orc.optimal_value
    stationary = 1e-13 if cfg.variant in ("irls", "regularized_irls") else None
    stop = dynamics.StoppingRule(args.max_iter, target_l1=target, stationary_tol=stationary)
    trace = dynamics.run(
        inst, cfg, stop, start=start,
        x_star=None if orc is None else orc.optimizer,
        eps=args.eps, alpha=alpha,
        record_every=args.record_every, keep_iterates=args.keep_iterates,
        instance_id=inst.provenance,
    )
    trace.oracle = orc
    if args.out:
        write_json(trace, args.out)
    if args.csv:
        write_csv(trace, args.csv)
    last = trace.final
    print(f"variant {args.variant}, h = {cfg.h:.6g}", file=out)
    print(f"status {trace.terminal_status} after {last.k} iterations"
          + (f": {trace.message}" if trace.message else ""), file=out)
    print(f"||y||_1 = {last.l1_y:.12g}", file=out)
    print(f"||w||_1 = {last.l1_w:.12g}", file=out)
    if orc is not None:
        print(f"optimal {orc.optimal_value:.12g}", file=out)
    ok = _report_checks(trace, out)
    if trace.terminal_status in ("support_collapse", "kernel_error") or not ok:
        return 3
    return 0


def _vec(x, names):
    if names is None:
        return "[" + ", ".join(f"{v:.12g}" for v in x) + "]"
    return ", ".join(f"{nm}={v:.12g}" for nm, v in zip(names, x) if v != 0) or "0"


def cmd_oracle(args, out):
    inst = _load(args)
    try:
        res = oracle.solve_l1_exact(inst)
    except BPError as exc:
        raise UsageError(str(exc)) from exc
    print(f"optimal {res.optimal_value:g}, {'unique' if res.unique else 'non-unique'}", file=out)
    print(f"x* = {_vec(res.optimizer + 0.0, inst.column_names)}", file=out)
    print(f"bases examined {res.bases_examined}", file=out)
    return 0


def cmd_alpha(args, out):
    inst = _load(args)
    a = _alpha(inst, args)
    print(f"{int(a)}" if inst.is_integer else f"{a!r}", file=out)
    return 0


def cmd_appendix_a(args, out):
    inst, y0 = model.appendix_a_state()
    orc = oracle.solve_l1_exact(inst)
    cfg = dynamics.StepConfig(1.0, "irls")
    trace = dynamics.run(inst, cfg, dynamics.StoppingRule(args.max_iter, stationary_tol=1e-13),
                         start=dynamics.irls_state(y0), x_star=orc.optimizer,
                         keep_iterates=args.max_iter, instance_id="appendix_a")
    trace.oracle = orc
    j = inst.column("u3-u4")
    y1 = trace.y_at(1)
    print(f"IRLS step 1 from the stalling start: y[u3-u4] = {y1[j]:g}", file=out)
    print(f"IRLS {trace.terminal_status} at k = {trace.iterations}: ||y||_1 = {trace.final.l1_y:.12g}",
          file=out)
    print(f"oracle optimal {orc.optimal_value:g} ({'unique' if orc.unique else 'non-unique'}): "
          f"{_vec(orc.optimizer + 0.0, inst.column_names)}", file=out)
    if args.out:
        write_json(trace, args.out)
    if args.csv:
        write_csv(trace, args.csv)
    return 0


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args, out):
    inst = _load(args)
    orc = _oracle_or_none(inst)
    if orc is None:
        raise UsageError("sweep needs an instance small enough for the oracle")
    hs = [h for spec in args.h for h in _floats(spec)]
    epss = [e for spec in args.eps for e in _floats(spec)]
    lines = ["h,eps,iterations,final_l1_w"]
    for h in hs:
        for eps in epss:
            cfg = dynamics.StepConfig(h, "physarum")
            stop = dynamics.StoppingRule.gap(args.max_iter, orc.optimal_value, eps)
            tr = dynamics.run(inst, cfg, stop, x_star=orc.optimizer,
                              record_every=max(1, args.max_iter))
            it = str(tr.iterations) if tr.terminal_status == "target_reached" else "timeout"
            lines.append(f"{h!r},{eps!r},{it},{tr.final.l1_w!r}")
    text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="bpdyn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one variant and record a trace")
    _add_source(s)
    s.add_argument("--variant", choices=sorted(VARIANT_NAMES), default="physarum")
    s.add_argument("--h", type=float)
    s.add_argument("--eps", type=float)
    s.add_argument("--eta", type=float)
    s.add_argument("--theorem-h", action="store_true", help="h = eps / (40 n^2 alpha^2)")
    s.add_argument("--alpha", type=float, help="override the computed alpha")
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--out", metavar="PATH.json")
    s.add_argument("--csv", metavar="PATH.csv")
    s.add_argument("--start", default="least-squares",
                   help="least-squares | figure2 | file:<path>")
    s.add_argument("--record-every", type=int, default=1)
    s.add_argument("--keep-iterates", type=int, default=1000,
                   help="store (y, w) for k up to this value")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exact l1 optimum by basis enumeration")
    _add_source(o)
    o.set_defaults(func=cmd_oracle)

    a = sub.add_parser("alpha", help="the constant alpha of A")
    _add_source(a)
    a.add_argument("--alpha", type=float, help=argparse.SUPPRESS)
    a.set_defaults(func=cmd_alpha)

    ap = sub.add_parser("appendix-a", help="reproduce the IRLS non-convergence example")
    ap.add_argument("--max-iter", type=int, default=100)
    ap.add_argument("--out", metavar="PATH.json")
    ap.add_argument("--csv", metavar="PATH.csv")
    ap.set_defaults(func=cmd_appendix_a)

    sw = sub.add_parser("sweep", help="iterations to (1+eps)-optimality over an (h, eps) grid")
    _add_source(sw)
    sw.add_argument("--h", action="append", required=True, help="comma-separated step sizes")
    sw.add_argument("--eps", action="append", required=True, help="comma-separated tolerances")
    sw.add_argument("--max-iter", type=int, default=100000)
    sw.add_argument("--csv", metavar="PATH.csv")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"bpdyn: error: {exc}", file=sys.stderr)
        return 2
    except BPError as exc:
        print(f"bpdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
