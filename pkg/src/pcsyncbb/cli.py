"""Command-line front end: ``pcsyncbb {gen,solve,bench,audit,circuit-info}``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from pcsyncbb.audit import audit_events, audit_run, parse_coalition
from pcsyncbb.baseline import brute_force, plaintext_syncbb
from pcsyncbb.bench import ALGOS, BenchConfig, default_cost_model, parse_range, run_bench, write_outputs
from pcsyncbb.compare.circuit import build_circuit
from pcsyncbb.dcop import public_params
from pcsyncbb.engine import CutoffExceeded, PcSyncBB, RunConfig
from pcsyncbb.generators import generate
from pcsyncbb.instance_io import InstanceFormatError, load_instance, save_instance
from pcsyncbb.simnet import CostModel, parse_trace, simulated_time

SEED_ENV = "PCSBB_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {SEED_ENV} must be an integer, got {raw!r}")


def _add_instance_flags(p, ranges=False):
    p.add_argument("--family", choices=["random", "coloring", "scalefree"], default="random")
    p.add_argument("--n", default="7" if ranges else "5",
                   help="agent count" + (" (a, a,b,c or start:stop:step)" if ranges else ""))
    p.add_argument("--p1", default="0.5", help="constraint density")
    p.add_argument("--domain", default="3", help="domain size (colours for coloring)")
    p.add_argument("--q", type=int, default=100, help="maximum single-constraint cost")
    p.add_argument("--attach", type=int, default=2, help="edges per new node (scalefree)")
    p.add_argument("--seed", type=int, default=None, help=f"base seed (fallback ${SEED_ENV}, else 0)")


def _add_solver_flags(p):
    p.add_argument("--backend", choices=["ideal", "mpc"], default="ideal")
    p.add_argument("--keybits", type=int, default=2048)
    p.add_argument("--cutoff-secs", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcsyncbb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write generated instances to files")
    _add_instance_flags(g)
    g.add_argument("--reps", type=int, default=1, help="number of instances (seeds seed..seed+reps-1)")
    g.add_argument("--out", required=True, help="output file, or directory when --reps > 1")

    s = sub.add_parser("solve", help="solve one instance")
    _add_instance_flags(s)
    s.add_argument("--instance", help="instance file (otherwise generated from the flags)")
    s.add_argument("--algo", choices=ALGOS, default="pc-syncbb")
    _add_solver_flags(s)
    s.add_argument("--trace", help="write the message trace here")
    s.add_argument("--cost-model", help="key=value cost model file")

    b = sub.add_parser("bench", help="benchmark sweep to CSV and SVG")
    _add_instance_flags(b, ranges=True)
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--algo", default=",".join(ALGOS), help="comma-separated algorithms")
    _add_solver_flags(b)
    b.add_argument("--cost-model", help="key=value cost model file")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", default="bench", help="output prefix for .csv and .svg files")

    a = sub.add_parser("audit", help="leakage audit of a transcript")
    _add_instance_flags(a)
    a.add_argument("--trace", help="trace file to audit (otherwise a fresh run is audited)")
    a.add_argument("--coalition", help="comma-separated agent indices (default: everyone)")
    a.add_argument("--instance", help="instance file for a fresh run")
    _add_solver_flags(a)

    for name in ("circuit-info", "circuit_info"):
        c = sub.add_parser(name, help="comparison circuit statistics")
        c.add_argument("--n", default="5:19:2")
        c.add_argument("--q", type=int, default=100)
        c.add_argument("--ell", type=int, default=None, help="fix the bit length instead of deriving it")
        c.add_argument("--dump", help="write the gate list of the first circuit here")
    return parser


def _instance_from(args):
    if getattr(args, "instance", None):
        return load_instance(args.instance)
    return generate(args.family, n=int(args.n), p1=float(args.p1), domain=int(args.domain),
                    q=args.q, seed=args.seed, attach=args.attach)


def cmd_gen(args) -> int:
    out = Path(args.out)
    if args.reps == 1:
        inst = _instance_from(args)
        save_instance(inst, out)
        print(out)
        return 0
    out.mkdir(parents=True, exist_ok=True)
    for r in range(args.reps):
        seed = args.seed + r
        inst = generate(args.family, n=int(args.n), p1=float(args.p1), domain=int(args.domain),
                        q=args.q, seed=seed, attach=args.attach)
        path = out / f"{args.family}_n{args.n}_s{seed}.dcop"
        save_instance(inst, path)
        print(path)
    return 0


def cmd_solve(args) -> int:
    inst = _instance_from(args)
    if args.algo == "brute":
        res = brute_force(inst)
        _print_result(res.cost, res.assignment)
        return 0
    if args.algo == "syncbb":
        res = plaintext_syncbb(inst)
        _print_result(res.cost, res.assignment)
        print(f"comparisons {res.stats.comparisons}")
        print(f"messages {res.stats.messages}")
        return 0
    engine = PcSyncBB(inst, RunConfig(backend=args.backend, keybits=args.keybits, seed=args.seed,
                                      cutoff_secs=args.cutoff_secs))
    out = engine.run()
    _print_result(out.result.cost, out.result.assignment)
    model = CostModel.load(args.cost_model) if args.cost_model else default_cost_model(inst.n)
    m = out.metrics
    for key, value in m.as_row().items():
        print(f"{key} {value:.6g}" if isinstance(value, float) else f"{key} {value}")
    print(f"sim_time_ms {simulated_time(out.trace, m, model):.6g}")
    print(f"trace_digest {out.trace.digest()}")
    if args.backend == "mpc":
        st = engine.backend.online
        print(f"mpc_and_gates_per_compare {engine.backend.circuit.and_count}")
        print(f"mpc_rounds_per_compare {engine.backend.circuit.and_depth}")
        print(f"mpc_bits_broadcast {st.bits_broadcast}")
    if args.trace:
        out.trace.save(args.trace)
    return 0


def _print_result(cost, assignment):
    print(f"cost {cost}")
    print("assignment " + " ".join(f"{k}={v}" for k, v in sorted(assignment.items())))


def cmd_bench(args) -> int:
    cfg = BenchConfig(
        family=args.family,
        n=parse_range(args.n, int),
        p1=parse_range(args.p1, float),
        domain=parse_range(args.domain, int),
        q=args.q,
        reps=args.reps,
        seed=args.seed,
        algos=[a.strip() for a in args.algo.split(",") if a.strip()],
        backend=args.backend,
        keybits=args.keybits,
        cutoff_secs=args.cutoff_secs,
        cost_model=CostModel.load(args.cost_model) if args.cost_model else None,
        jobs=args.jobs,
        attach=args.attach,
    )
    rows = run_bench(cfg)
    for path in write_outputs(rows, cfg, args.out):
        print(path)
    return 0


def cmd_audit(args) -> int:
    coalition = parse_coalition(args.coalition) if args.coalition else None
    if args.trace:
        events = parse_trace(Path(args.trace).read_text(encoding="utf-8"))
        n = 1 + max((max(ev.sender, ev.receiver) for ev in events), default=0)
        report = audit_events(events, coalition)
    else:
        inst = _instance_from(args)
        engine = PcSyncBB(inst, RunConfig(backend=args.backend, keybits=args.keybits, seed=args.seed))
        engine.run()
        n = inst.n
        report = audit_run(engine, coalition)
    if coalition is not None and len(coalition) * 2 >= n:
        print("warning: coalition is not a minority; the honest-majority guarantee does not apply",
              file=sys.stderr)
    print(report.summary())
    for v in report.violations:
        print(f"  {v}")
    return 0 if report.ok else 1


def cmd_circuit_info(args) -> int:
    ns = parse_range(args.n, int)
    print("n,ell,gates,and_gates,depth")
    for i, n in enumerate(ns):
        ell = args.ell if args.ell is not None else public_params(n, args.q).ell
        c = build_circuit(n, ell)
        row = c.stats_row()
        print(",".join(str(row[k]) for k in ("n", "ell", "gates", "and_gates", "depth")))
        if i == 0 and args.dump:
            Path(args.dump).write_text(c.dump(), encoding="utf-8")
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "audit": cmd_audit,
    "circuit-info": cmd_circuit_info,
    "circuit_info": cmd_circuit_info,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", "absent") is None:
        args.seed = _default_seed()
    try:
        return COMMANDS[args.command](args)
    except (ValueError, InstanceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CutoffExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
