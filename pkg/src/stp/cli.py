"""Command-line front end.

Subcommands: run, validate, abduce, glue, consensus, spectrum. Exit codes:
0 success, 1 validation failure, 2 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .abduction import DEFAULT_MAX_LEN, MODES, DiscrepancyQuery, abduce
from .errors import NoExplanationWithinBound, ScenarioInvalid, StpError
from .intervals import Interval
from .scenario import Scenario, load_scenario, validate_scenario
from .simulator import run, serialize_trace
from .spectral import DiffusionConfig, diffuse, load_sheaf_file, spectrum


def _load_validated(path: str) -> Scenario:
    sc = load_scenario(path)
    problems = validate_scenario(sc)
    if problems:
        raise ScenarioInvalid(problems)
    return sc


def _cmd_validate(args) -> int:
    try:
        sc = load_scenario(args.scenario)
        problems = validate_scenario(sc)
    except ScenarioInvalid as exc:
        problems = exc.diagnostics
    for p in problems:
        print(p)
    if problems:
        return 1
    print("ok")
    return 0


def _cmd_run(args) -> int:
    sc = _load_validated(args.scenario)
    if args.seed is not None:
        sc = dataclasses.replace(sc, seed=args.seed)
        if sc.consensus is not None:
            cfg = dataclasses.replace(sc.consensus.config, seed=args.seed)
            sc = dataclasses.replace(
                sc, consensus=dataclasses.replace(sc.consensus, config=cfg)
            )
    trace = run(sc, workers=args.workers)
    text = serialize_trace(trace)
    if args.trace:
        Path(args.trace).write_text(text, encoding="utf-8")
        print(f"{len(trace)} events -> {args.trace}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def _derive_query(sc: Scenario, max_len: int) -> DiscrepancyQuery:
    """Blind-interval query of the first interrupted agent.

    Memory is the world stalk at the interruption tick (the agent observed
    through it), the observation is the world stalk at the resume tick.
    """
    spec = next((a for a in sc.agents if a.interruption is not None), None)
    if spec is None:
        raise ScenarioInvalid(["abduce: scenario has no interrupted agent to query"])
    from .actions import holds_at

    tick, resume = spec.interruption
    mem = {f: holds_at(sc.world, f, tick) for f in sc.vocabulary.fluents}
    obs = {f: holds_at(sc.world, f, resume) for f in sc.vocabulary.fluents}
    return DiscrepancyQuery(mem, obs, Interval(tick, resume), max_len=max_len)


def _cmd_abduce(args) -> int:
    sc = _load_validated(args.scenario)
    query = _derive_query(sc, args.max_len)
    record = {
        "event": "abduce",
        "window": query.window.to_json(),
        "memState": query.mem_state,
        "obsState": query.obs_state,
        "mode": args.mode,
    }
    try:
        result = abduce(query, sc.vocabulary, args.mode)
        record.update(result.to_json())
        record["found"] = True
    except NoExplanationWithinBound as exc:
        record.update({"explanations": [], "exhaustiveUpTo": exc.bound, "found": False})
    print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_glue(args) -> int:
    sc = _load_validated(args.scenario)
    trace = run(sc)
    merges = [e for e in trace if e.kind == "Merge"]
    for e in merges:
        print(json.dumps(e.payload, sort_keys=True))
    if not merges:
        print("no meetings in scenario", file=sys.stderr)
    return 0


def _cmd_consensus(args) -> int:
    sheaf, x0, cfg = load_sheaf_file(args.sheaf)
    if x0 is None:
        raise ScenarioInvalid([f"{args.sheaf}: missing 'x0' block"])
    if cfg is None:
        cfg = DiffusionConfig(alpha=0.1)
    updates = {}
    if args.alpha is not None:
        updates["alpha"] = args.alpha
    if args.delay is not None:
        updates["delay_bound"] = args.delay
    if args.seed is not None:
        updates["seed"] = args.seed
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    state, rep = diffuse(sheaf, x0, cfg, allow_unstable=args.allow_unstable)
    from . import report

    header = ["iteration", "dirichlet_energy"]
    rows = list(enumerate(rep.dirichlet_trace))
    sys.stdout.write(report.format_columns(header, rows))
    print(
        f"converged={rep.converged} iterations={rep.iterations} residual={rep.residual:.3e}",
        file=sys.stderr,
    )
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_columns(out / "consensus_trace.csv", header, rows)
        report.write_columns(
            out / "consensus_state.csv",
            ["vertex", "component", "value"],
            [
                (v, i, val)
                for v, block in state.to_mapping(sheaf).items()
                for i, val in enumerate(block)
            ],
        )
        report.energy_figure(rep.dirichlet_trace, out / "consensus_energy.png")
        print(f"reports -> {out}", file=sys.stderr)
    return 0


def _cmd_spectrum(args) -> int:
    sheaf, _, _ = load_sheaf_file(args.sheaf)
    rep = spectrum(sheaf)
    from . import report

    header = ["index", "eigenvalue"]
    rows = list(enumerate(rep.eigenvalues))
    sys.stdout.write(report.format_columns(header, rows))
    print(
        f"zeroMultiplicity={rep.zero_multiplicity} h0={rep.h0_dim} h1={rep.h1_dim}",
        file=sys.stderr,
    )
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_columns(out / "spectrum.csv", header, rows)
        report.spectrum_figure(rep.eigenvalues, out / "spectrum.png")
        print(f"reports -> {out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stp",
        description="interval-history agents: simulate, abduce, glue, and diffuse",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and emit its trace")
    p.add_argument("scenario")
    p.add_argument("--trace", help="write newline-delimited events here instead of stdout")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="report scenario diagnostics")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("abduce", help="explain the first agent's blind interval")
    p.add_argument("scenario")
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--mode", choices=MODES, default="all-minimal")
    p.set_defaults(func=_cmd_abduce)

    p = sub.add_parser("glue", help="run the scenario's meetings and emit merge records")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_glue)

    p = sub.add_parser("consensus", help="diffuse a sheaf file to agreement")
    p.add_argument("sheaf")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--delay", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--allow-unstable", action="store_true")
    p.add_argument("--out-dir", help="write CSV and figure reports here")
    p.set_defaults(func=_cmd_consensus)

    p = sub.add_parser("spectrum", help="eigenvalues and cohomology of a sheaf file")
    p.add_argument("sheaf")
    p.add_argument("--out-dir", help="write CSV and figure reports here")
    p.set_defaults(func=_cmd_spectrum)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioInvalid as exc:
        for p in exc.diagnostics:
            print(p, file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(exc, file=sys.stderr)
        return 1
    except StpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
