"""Command-line pipeline: ingest -> build-graph -> select -> simulate -> report.

Each subcommand is independently runnable from its declared input files and
writes its artifact plus a `<command>_manifest.json` recording the resolved
parameters, input digests, and tool version. Manifests carry no timestamps,
so identical inputs and seed reproduce every output file byte for byte.
Exit codes: 0 success, 1 data error (one-line diagnostic), 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .activity import DEFAULT_WINDOW_DAYS, ScoringWindow, build_activity_profiles
from .ingest import DATA_FILES, Corpus, LoadError, load_corpus, write_corpus
from .metrics import compare_report, compute_funnel, format_report_text, write_outcomes, write_report
from .selector import (
    DEFAULT_THRESHOLD,
    baseline_select,
    read_candidates,
    read_plan,
    score_candidate,
    select_batch,
    write_candidates,
    write_plan,
)
from .simulator import SimulationConfig, generate_candidates, generate_corpus, load_scenario, simulate_responses
from .trends import DEFAULT_MIN_SUPPORT, build_transition_graph, read_graph, write_graph

DEFAULT_BUDGET_FRACTION = 0.3


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _data_digests(data_dir: Path) -> dict[str, str]:
    return {name: _digest(data_dir / name) for name in DATA_FILES if (data_dir / name).exists()}


def _write_manifest(out_dir: Path, command: str, parameters: dict, inputs: dict[str, str]) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "parameters": parameters,
        "inputs": inputs,
    }
    path = out_dir / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolve_today(args, config: SimulationConfig | None = None) -> date:
    if args.today is not None:
        return date.fromisoformat(args.today)
    if config is not None:
        return config.today
    return date.today()


def _load_corpus_arg(args, today: date) -> Corpus:
    return load_corpus(Path(args.data), reference_date=today)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args) -> int:
    today = _resolve_today(args)
    data_dir = Path(args.data)
    corpus = load_corpus(data_dir, reference_date=today)
    out = _out_dir(args)
    write_corpus(corpus, out)
    report = corpus.report.as_dict()
    (out / "ingest_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(out, "ingest", {"data": str(data_dir), "today": today.isoformat()}, _data_digests(data_dir))
    for key, value in report.items():
        print(f"{key}: {value}")
    return 0


def cmd_build_graph(args) -> int:
    today = _resolve_today(args)
    data_dir = Path(args.data)
    corpus = load_corpus(data_dir, reference_date=today)
    graph = build_transition_graph(corpus, min_support=args.min_support)
    out = _out_dir(args)
    write_graph(graph, out / "graph.csv")
    _write_manifest(
        out,
        "build-graph",
        {"data": str(data_dir), "today": today.isoformat(), "min_support": args.min_support},
        _data_digests(data_dir),
    )
    print(f"graph: {len(graph.edges)} edges over {len(corpus.categories)} categories -> {out / 'graph.csv'}")
    return 0


def cmd_select(args) -> int:
    today = _resolve_today(args)
    data_dir = Path(args.data)
    corpus = load_corpus(data_dir, reference_date=today)
    window = ScoringWindow.ending(today, args.window_days)
    graph = read_graph(args.graph, corpus.categories)
    candidates = read_candidates(args.candidates, corpus)
    profiles = {p.user_id: p for p in build_activity_profiles(corpus)}
    scored = [s for c in candidates if (s := score_candidate(c, profiles, graph, window)) is not None]
    plan = select_batch(scored, budget=args.budget, threshold=args.threshold, window_id=today)
    out = _out_dir(args)
    write_plan(plan, out / "plan.csv")
    inputs = _data_digests(data_dir)
    inputs["graph.csv"] = _digest(Path(args.graph))
    inputs["candidates.csv"] = _digest(Path(args.candidates))
    _write_manifest(
        out,
        "select",
        {
            "data": str(data_dir),
            "graph": str(args.graph),
            "candidates": str(args.candidates),
            "today": today.isoformat(),
            "window_days": args.window_days,
            "budget": args.budget,
            "threshold": args.threshold,
        },
        inputs,
    )
    print(f"plan: {len(plan.selections)} of {len(scored)} scored candidates selected -> {out / 'plan.csv'}")
    return 0


def cmd_simulate(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = _reseed(config, args.seed)
    inputs = {"scenario": _digest(Path(args.scenario))}
    out = _out_dir(args)

    if args.generate:
        corpus = generate_corpus(config)
        write_corpus(corpus, out)
        candidates = generate_candidates(corpus, config)
        write_candidates(candidates, out / "candidates.csv")
        _write_manifest(out, "simulate", {"mode": "generate", "scenario": str(args.scenario), "seed": config.seed}, inputs)
        print(f"generated corpus: {corpus.report.as_dict()} -> {out}")
        return 0

    if not args.data or not args.plan:
        print("simulate: --data and --plan are required unless --generate is given", file=sys.stderr)
        return 2
    today = _resolve_today(args, config)
    window_days = args.window_days if args.window_days is not None else config.window_days
    window = ScoringWindow.ending(today, window_days)
    corpus = load_corpus(Path(args.data), reference_date=today)
    plan = read_plan(args.plan, corpus, fallback_window_id=today)
    outcomes = simulate_responses(plan, corpus, config.ground_truth, config.seed, window)
    write_outcomes(outcomes, out / "outcomes.csv")
    inputs.update(_data_digests(Path(args.data)))
    inputs["plan.csv"] = _digest(Path(args.plan))
    _write_manifest(
        out,
        "simulate",
        {
            "mode": "replay",
            "scenario": str(args.scenario),
            "data": str(args.data),
            "plan": str(args.plan),
            "seed": config.seed,
            "today": today.isoformat(),
            "window_days": window_days,
        },
        inputs,
    )
    metrics = compute_funnel(outcomes)
    print(f"outcomes: sent={metrics.sent} opens={metrics.opens} clicks={metrics.clicks} apps={metrics.apps}")
    return 0


def cmd_report(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = _reseed(config, args.seed)
    today = _resolve_today(args, config)
    window_days = args.window_days if args.window_days is not None else config.window_days
    window = ScoringWindow.ending(today, window_days)
    inputs = {"scenario": _digest(Path(args.scenario))}

    if args.data:
        corpus = load_corpus(Path(args.data), reference_date=today)
        inputs.update(_data_digests(Path(args.data)))
    else:
        corpus = generate_corpus(config)
    if args.candidates:
        candidates = read_candidates(args.candidates, corpus)
        inputs["candidates.csv"] = _digest(Path(args.candidates))
    else:
        candidates = generate_candidates(corpus, config)

    baseline = baseline_select(corpus, window_id=today, items_per_email=config.items_per_email)
    budget = args.budget if args.budget is not None else round(args.budget_fraction * len(baseline.selections))

    graph = build_transition_graph(corpus, min_support=args.min_support)
    profiles = {p.user_id: p for p in build_activity_profiles(corpus)}
    scored = [s for c in candidates if (s := score_candidate(c, profiles, graph, window)) is not None]
    proposed = select_batch(scored, budget=budget, threshold=args.threshold, window_id=today)

    control_outcomes = simulate_responses(baseline, corpus, config.ground_truth, config.seed, window)
    proposed_outcomes = simulate_responses(proposed, corpus, config.ground_truth, config.seed, window)
    report = compare_report(compute_funnel(control_outcomes), compute_funnel(proposed_outcomes))

    out = _out_dir(args)
    write_plan(baseline, out / "baseline_plan.csv")
    write_plan(proposed, out / "proposed_plan.csv")
    write_outcomes(control_outcomes, out / "baseline_outcomes.csv")
    write_outcomes(proposed_outcomes, out / "proposed_outcomes.csv")
    write_report(report, out / "report.csv")
    text = format_report_text(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    _write_manifest(
        out,
        "report",
        {
            "scenario": str(args.scenario),
            "data": str(args.data) if args.data else None,
            "candidates": str(args.candidates) if args.candidates else None,
            "seed": config.seed,
            "today": today.isoformat(),
            "window_days": window_days,
            "budget": budget,
            "budget_fraction": None if args.budget is not None else args.budget_fraction,
            "threshold": args.threshold,
            "min_support": args.min_support,
        },
        inputs,
    )
    print(text, end="")
    return 0


def _reseed(config: SimulationConfig, seed: int) -> SimulationConfig:
    fields = {name: getattr(config, name) for name in config.__dataclass_fields__}
    fields["seed"] = seed
    return SimulationConfig(**fields)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mailtarget",
        description="Batch targeting engine for recommendation emails.",
    )
    parser.add_argument("--version", action="version", version=f"mailtarget {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--today", metavar="YYYY-MM-DD", help="run reference date (default: scenario date or current date)")
    shared.add_argument("--out", required=True, help="output directory for artifacts and the run manifest")

    p = sub.add_parser("ingest", parents=[shared], help="validate and normalize the input datasets")
    p.add_argument("--data", required=True, help="directory with the five input CSV files")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-graph", parents=[shared], help="build and export the category transition graph")
    p.add_argument("--data", required=True, help="directory with the five input CSV files")
    p.add_argument("--min-support", type=int, default=DEFAULT_MIN_SUPPORT, help="minimum seen pairs per edge (default: %(default)s)")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("select", parents=[shared], help="score candidates and select the send batch")
    p.add_argument("--data", required=True, help="directory with the five input CSV files")
    p.add_argument("--graph", required=True, help="exported graph.csv from build-graph")
    p.add_argument("--candidates", required=True, help="candidates.csv (user_id,item_ids)")
    p.add_argument("--window-days", type=int, default=DEFAULT_WINDOW_DAYS, help="activity window length (default: %(default)s)")
    p.add_argument("--budget", type=int, required=True, help="maximum emails to send this window")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="minimum combined score (default: %(default)s)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", parents=[shared], help="generate a synthetic corpus or replay a plan's responses")
    p.add_argument("--scenario", required=True, help="scenario file (flat TOML key/value)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--generate", action="store_true", help="write a synthetic corpus plus candidates instead of replaying")
    p.add_argument("--data", help="corpus directory (replay mode)")
    p.add_argument("--plan", help="plan.csv to replay (replay mode)")
    p.add_argument("--window-days", type=int, help="activity window length (default: scenario value)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[shared], help="run baseline and proposed policies end to end and compare")
    p.add_argument("--scenario", required=True, help="scenario file (flat TOML key/value)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--data", help="corpus directory (default: generate from the scenario)")
    p.add_argument("--candidates", help="candidates.csv (default: generate from the scenario)")
    p.add_argument("--window-days", type=int, help="activity window length (default: scenario value)")
    p.add_argument("--budget", type=int, help="absolute proposed-send budget (overrides --budget-fraction)")
    p.add_argument(
        "--budget-fraction",
        type=float,
        default=DEFAULT_BUDGET_FRACTION,
        help="proposed budget as a fraction of baseline sends (default: %(default)s)",
    )
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="minimum combined score (default: %(default)s)")
    p.add_argument("--min-support", type=int, default=DEFAULT_MIN_SUPPORT, help="minimum seen pairs per edge (default: %(default)s)")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LoadError, ValueError, KeyError, OSError) as exc:
        print(f"mailtarget {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
