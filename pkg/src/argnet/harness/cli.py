"""Command-line interface.

Exit codes: 0 success, 1 runtime/model error (or any failed sweep run),
2 invalid flags or missing input files.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from ..bayesnet import PRESETS, NetworkError, load_network, preset
from ..bayesnet.model import ROW_TOLERANCE
from ..engine import SimConfig, SimulationError, default_backend, run, setup
from ..telemetry import write_csv, write_outputs
from .casestudies import CASE_STUDIES, case_study
from .classify import RULES, classify_runs
from .experiment import ExperimentSpec, SpecError, read_aggregate, run_sweep

log = logging.getLogger("argnet")


class _UsageError(Exception):
    pass


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is not in [0, 1]")
    return value


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"{value} is negative")
    return value


def _positive(text: str) -> int:
    value = _non_negative(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    d = SimConfig()
    g = p.add_argument_group("world")
    g.add_argument("--causal-structure", default=d.causal_structure,
                   help="preset name (%s) or path to a .bif/.json network" % ", ".join(PRESETS))
    g.add_argument("--hypothesis-node", help="custom hypothesis node (requires --evidence-nodes)")
    g.add_argument("--evidence-nodes", help="comma-separated custom evidence nodes")
    g.add_argument("--hypothesis-probability", type=_probability, default=d.hypothesis_probability)
    g.add_argument("--joint-sampling", action="store_true",
                   help="draw evidence jointly instead of from independent marginals")
    g.add_argument("--row-tolerance", type=float, default=ROW_TOLERANCE, help="CPT row-sum tolerance on load")
    g = p.add_argument_group("population")
    g.add_argument("--number-of-agents", type=_positive, default=d.number_of_agents)
    g.add_argument("--social-network", choices=["null", "complete", "wheel", "small-world"], default=d.social_network)
    g.add_argument("--k", type=_positive, default=d.k, help="small-world neighbours per side")
    g.add_argument("--rewiring-probability", type=_probability, default=d.rewiring_probability)
    g = p.add_argument_group("dispositions")
    g.add_argument("--share", choices=["random", "impact", "recent"], default=d.share)
    g.add_argument("--chattiness", type=_probability, default=d.chattiness)
    g.add_argument("--curiosity", type=_probability, default=d.curiosity)
    g.add_argument("--conviction-threshold", type=_probability, default=d.conviction_threshold)
    g.add_argument("--initial-draws", type=_non_negative, default=d.initial_draws)
    g.add_argument("--max-draws", type=_non_negative, default=d.max_draws)
    g.add_argument("--recency-top-probability", type=_probability, default=d.recency_top_probability)
    g = p.add_argument_group("schedule")
    g.add_argument("--max-ticks", type=_non_negative, default=d.max_ticks)
    g.add_argument("--stop-at-max-ticks", action=argparse.BooleanOptionalAction, default=d.stop_at_max_ticks)
    g.add_argument("--stop-at-full-information", action=argparse.BooleanOptionalAction,
                   default=d.stop_at_full_information)
    g.add_argument("--tick-cap", type=_non_negative, default=d.tick_cap)
    g.add_argument("--shuffle", action="store_true", help="seeded random agent order each tick")
    g.add_argument("--seed", type=_non_negative, default=d.seed)
    p.add_argument("--out", default="argnet-run", help="output directory")
    p.add_argument("--backend", choices=["compiled", "python"], help="tick implementation (default: %s)" % default_backend())
    p.add_argument("--verbose", action="store_true", help="log every tick")


def _check_network_source(source: str) -> None:
    if source not in PRESETS and not Path(source).is_file():
        raise _UsageError(f"network {source!r} is neither a preset ({', '.join(PRESETS)}) nor an existing file")


def config_from_args(args: argparse.Namespace) -> SimConfig:
    _check_network_source(args.causal_structure)
    evidence = None
    if args.evidence_nodes:
        evidence = tuple(e.strip() for e in args.evidence_nodes.split(",") if e.strip())
    try:
        return SimConfig(
            causal_structure=args.causal_structure,
            hypothesis_node=args.hypothesis_node,
            evidence_nodes=evidence,
            hypothesis_probability=args.hypothesis_probability,
            number_of_agents=args.number_of_agents,
            social_network=args.social_network,
            k=args.k,
            rewiring_probability=args.rewiring_probability,
            share=args.share,
            chattiness=args.chattiness,
            curiosity=args.curiosity,
            conviction_threshold=args.conviction_threshold,
            initial_draws=args.initial_draws,
            max_draws=args.max_draws,
            recency_top_probability=args.recency_top_probability,
            max_ticks=args.max_ticks,
            stop_at_max_ticks=args.stop_at_max_ticks,
            stop_at_full_information=args.stop_at_full_information,
            tick_cap=args.tick_cap,
            seed=args.seed,
            evidence_sampling="joint" if args.joint_sampling else "marginal",
            schedule="shuffle" if args.shuffle else "ascending",
            row_tolerance=args.row_tolerance,
            verbose=args.verbose,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def cmd_run(args) -> int:
    config = config_from_args(args)
    sim = setup(config, backend=args.backend)
    result = run(sim)
    write_outputs(result, args.out)
    print(f"{result.run_id}: {result.stop_reason} after {sim.tick} ticks; "
          f"mean belief {result.ticks[-1].mean:.6f}; outputs in {args.out}")
    return 0


def _report_sweep(result, out) -> int:
    failed = len(result.failures)
    print(f"{len(result.outcomes)} runs, {failed} failed, {result.uniqueness_violations} uniqueness violations; "
          f"aggregate in {out}")
    for o in result.failures[:5]:
        print(f"  {o.run_id}: {o.error}", file=sys.stderr)
    return 1 if failed else 0


def _progress(done: int, total: int) -> None:
    if done == total or done % max(1, total // 20) == 0:
        log.info("%d/%d runs done", done, total)


def cmd_sweep(args) -> int:
    if not Path(args.spec).is_file():
        raise _UsageError(f"spec file {args.spec!r} does not exist")
    try:
        spec = ExperimentSpec.load(args.spec)
    except SpecError as exc:
        raise _UsageError(str(exc)) from None
    if args.parallelism:
        spec.parallelism = args.parallelism
    out = args.out or spec.output or "argnet-sweep"
    for config in spec.cell_configs():
        _check_network_source(config.causal_structure)
    return _report_sweep(run_sweep(spec, out, _progress), out)


def cmd_case_study(args) -> int:
    if args.network is not None:
        _check_network_source(args.network)
    try:
        spec = case_study(args.name, args.network, args.parallelism)
    except (ValueError, SpecError) as exc:
        raise _UsageError(str(exc)) from None
    if args.repetitions:
        spec.repetitions = args.repetitions
    spec.run_outputs = args.run_outputs
    out = args.out or args.name
    return _report_sweep(run_sweep(spec, out, _progress), out)


def cmd_validate_net(args) -> int:
    if not Path(args.file).is_file():
        raise _UsageError(f"network file {args.file!r} does not exist")
    net = load_network(args.file, args.row_tolerance)
    print(f"{net.name}: {len(net.nodes)} nodes, {len(net.arcs)} arcs")
    if net.roles is not None:
        r = net.roles
        print(f"hypothesis {r.hypothesis}={r.hypothesis_true_state}; evidence "
              + ", ".join(f"{e.node}={e.true_state}" for e in r.evidence))
    return 0


def cmd_presets(args) -> int:
    for name in PRESETS:
        net = preset(name)
        print(f"{name}: {len(net.nodes)} nodes, {len(net.arcs)} arcs, hypothesis {net.roles.hypothesis}, "
              f"evidence {', '.join(net.roles.evidence_nodes)}")
    for name, cs in CASE_STUDIES.items():
        print(f"case study {name}: {cs.description}" + (f" (needs --network {cs.needs_file} file)" if cs.needs_file else ""))
    return 0


def cmd_classify(args) -> int:
    if not Path(args.aggregate).is_file():
        raise _UsageError(f"aggregate file {args.aggregate!r} does not exist")
    rows = classify_runs(read_aggregate(args.aggregate), args.rule)
    if not rows:
        print("no runs labeled")
        return 0
    header = list(rows[0])
    write_csv(Path(args.out), header, ([r[h] for h in header] for r in rows))
    labels = {r["run_id"]: r["label"] for r in rows}
    counts = dict(sorted(Counter(labels.values()).items()))
    print(f"labeled {len(labels)} runs: {counts}; written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="argnet", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one simulation run")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter grid from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out")
    p.add_argument("--parallelism", type=_positive)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("case-study", help="run a built-in case-study experiment")
    p.add_argument("name", choices=sorted(CASE_STUDIES))
    p.add_argument("--network", help="network file for file-based case studies (asia, vole)")
    p.add_argument("--out")
    p.add_argument("--parallelism", type=_positive, default=1)
    p.add_argument("--repetitions", type=_positive, help="override the repetition count")
    p.add_argument("--run-outputs", action="store_true", help="also write per-run telemetry files")
    p.set_defaults(func=cmd_case_study)

    p = sub.add_parser("validate-net", help="parse and validate a .bif/.json network")
    p.add_argument("file")
    p.add_argument("--row-tolerance", type=float, default=ROW_TOLERANCE)
    p.set_defaults(func=cmd_validate_net)

    p = sub.add_parser("presets", help="list built-in networks and case studies")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("classify", help="label aggregate runs as for/against")
    p.add_argument("aggregate")
    p.add_argument("--rule", choices=RULES, default="initial-lean")
    p.add_argument("--out", default="classified.csv")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"argnet: error: {exc}", file=sys.stderr)
        return 2
    except (NetworkError, SimulationError, OSError, ValueError) as exc:
        print(f"argnet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
