"""Command-line entry point."""
from __future__ import annotations

import argparse
import json
import sys

from . import engine
from .errors import IrregularStrengthError
from .exact import SearchBudget, exact_strength
from .graph import dump_edge_list, load_edge_list
from .params import OVERRIDDEN, PAPER, derive_params
from .weighting import dump_weighting, load_weighting, lower_bound, verify_irregular

MODES = {"paper": PAPER, "override": OVERRIDDEN}


def _read_graph(path):
    if path is None or path == "-":
        return load_edge_list(sys.stdin)
    with open(path) as fh:
        return load_edge_list(fh)


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _overrides(args):
    if getattr(args, "override_json", None):
        with open(args.override_json) as fh:
            return json.load(fh)
    return None


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--mode", choices=sorted(MODES), default="paper")
    p.add_argument("--override-json", help="JSON object of parameter overrides")


def cmd_generate(args):
    if args.family == "regular":
        g = engine.make_graph({"family": "regular", "n": args.n, "d": args.d}, args.seed)
    else:
        g = engine.make_graph({"family": "min_degree", "n": args.n, "delta": args.d,
                               "density": args.density}, args.seed)
    _write(args.output, dump_edge_list(g))
    return 0


def cmd_solve(args):
    g = _read_graph(args.input)
    cfg = engine.SolveConfig(seed=args.seed, max_retries=args.max_retries, mode=MODES[args.mode],
                             overrides=_overrides(args), fallback_enabled=not args.no_fallback,
                             epsilon=args.epsilon, alpha=args.alpha)
    state = engine.PipelineState()
    w, rep = engine.solve(g, cfg, state=state)
    if args.dump_state:
        dump = {"report": rep.as_dict()}
        if state.partition is not None:
            dump["partition"] = state.partition.summary()
        if state.layout is not None:
            dump["benchmarks"] = [int(b) for b in state.layout.benchmarks]
        if state.step_c is not None:
            dump["anchors"] = state.step_c.anchors.as_dict()
            dump["goals"] = state.step_c.goals.as_dict()
        with open(args.dump_state, "w") as fh:
            json.dump(dump, fh, sort_keys=True, default=engine._jsonable)
    if args.output:
        _write(args.output, dump_weighting(g, w))
    if args.format == "csv":
        row = {"n": g.n, "delta": g.min_degree(), "m": g.m, "method": rep.method,
               "k_achieved": rep.k_achieved, "lower_bound": rep.as_dict()["lower_bound"],
               "kkp_benchmark": rep.kkp_benchmark, "ratio": rep.ratio, "retries": rep.retries_used,
               "ms": round(sum(rep.timings.values()), 1), "seed": rep.seed, "valid": rep.valid}
        _write(None, engine.rows_to_csv([row]))
    else:
        _write(None, rep.to_json())
    return 0 if rep.valid else 1


def cmd_exact(args):
    g = _read_graph(args.input)
    s = exact_strength(g, SearchBudget(args.max_k, args.node_limit))
    out = {"n": g.n, "m": g.m, "lower_bound": lower_bound(g),
           "strength": "inf" if s == float("inf") else s}
    if isinstance(out["lower_bound"], float):
        out["lower_bound"] = "inf"
    _write(args.output, json.dumps(out, sort_keys=True))
    return 0 if s is not None else 2


def cmd_verify(args):
    g = _read_graph(args.input)
    with open(args.weights) as fh:
        w = load_weighting(fh.read())
    res = verify_irregular(g, w)
    out = {"valid": res.valid, "reason": res.reason,
           "edge": list(res.edge) if res.edge else None,
           "vertices": list(res.vertices) if res.vertices else None}
    _write(args.output, json.dumps(out, sort_keys=True))
    return 0 if res.valid else 1


def cmd_params(args):
    ov = _overrides(args)
    if MODES[args.mode] == OVERRIDDEN and ov is None:
        ov = engine.desk_overrides(args.n, args.delta)
    p = derive_params(args.n, args.delta, args.epsilon, args.alpha, ov if MODES[args.mode] == OVERRIDDEN else None)
    out = json.loads(p.to_json())
    out["diagnostics"] = p.diagnostics()
    out["pipeline_blockers"] = engine.pipeline_blockers(p)
    _write(args.output, json.dumps(out, sort_keys=True))
    return 0


def cmd_experiment(args):
    with open(args.spec) as fh:
        raw = json.load(fh)
    mode = MODES.get(raw.get("mode", args.mode), raw.get("mode", args.mode))
    spec = engine.ExperimentSpec(families=raw.get("families", []), seeds=raw.get("seeds", [args.seed]),
                                 mode=mode, overrides=raw.get("overrides", _overrides(args)),
                                 max_retries=raw.get("max_retries", args.max_retries),
                                 fallback_enabled=raw.get("fallback_enabled", True),
                                 workers=args.workers)
    rows = engine.run_experiment(spec)
    if args.format == "json":
        _write(args.output, json.dumps(rows, sort_keys=True))
    else:
        _write(args.output, engine.rows_to_csv(rows))
    return 0 if all(r["valid"] for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="irregular-strength",
                                 description="Edge weightings with pairwise distinct weighted degrees.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random graph as an edge list")
    p.add_argument("--family", choices=["regular", "min_degree"], default="regular")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True, help="degree (regular) or minimum degree")
    p.add_argument("--density", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="find an irregular weighting")
    p.add_argument("--input")
    _add_common(p)
    p.add_argument("--max-retries", type=int, default=5)
    p.add_argument("--no-fallback", action="store_true")
    p.add_argument("--dump-state", help="write intermediate pipeline state as JSON")
    p.add_argument("--output", help="write the weighting here")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="exact strength of a small graph")
    p.add_argument("--input")
    p.add_argument("--max-k", type=int, default=12)
    p.add_argument("--node-limit", type=int, default=2_000_000)
    p.add_argument("--output")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("verify", help="check a weighting file against a graph")
    p.add_argument("--input")
    p.add_argument("--weights", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("params", help="show derived constants")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=int, required=True)
    _add_common(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("experiment", help="run a batch described by a JSON spec")
    p.add_argument("--spec", required=True)
    _add_common(p)
    p.add_argument("--max-retries", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output")
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IrregularStrengthError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
