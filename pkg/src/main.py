import argparse
import asyncio
import json
import logging
import os
import sys
import time
from typing import List, Optional

from src.config import Config
from src.constructions import SelectionSpec, materialize
from src.core import InputError, king_report
from src.database import Database, RunLedger
from src.documents import (
    DocumentError, certificate_document, dumps, load_json, parse_space, parse_tournament,
    report_document, sine_document, to_dot, tournament_document, trace_csv, trace_document,
    verification_document,
)
from src.experiments import (
    exhaustive_verify, gap_escape_experiment, graded_escape_experiment,
    interior_gap_escape_experiment, random_sweep, sine_king_experiment,
)
from src.runner import run_plan
from src.sampled_spaces import continuity_falsify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


def _emit(text: str, out: Optional[str]):
    if out:
        directory = os.path.dirname(os.path.abspath(out))
        os.makedirs(directory, exist_ok=True)
        with open(out, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _load_spec(raw: str) -> SelectionSpec:
    if raw.lstrip().startswith("{"):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise InputError(f"spec: invalid JSON ({e})") from e
    else:
        data = load_json(raw)
    return SelectionSpec.from_dict(data)


def cmd_gen(args) -> int:
    spec = _load_spec(args.spec)
    sel = materialize(spec)
    _emit(dumps(tournament_document(sel, spec.to_dict())), args.out)
    return EXIT_OK


def cmd_kings(args) -> int:
    doc = load_json(args.input)
    sel = parse_tournament(doc)
    started = time.perf_counter()
    report = king_report(sel, args.method)
    spec = doc.get("spec")
    metadata = {
        "method": args.method,
        "spec": spec,
        "seed": spec.get("seed") if isinstance(spec, dict) else None,
        "elapsed_seconds": time.perf_counter() - started,
    }
    _emit(dumps(report_document(sel, report, args.witnesses, metadata)), args.out)
    return EXIT_OK if report.kings else EXIT_NEGATIVE


def cmd_verify(args) -> int:
    report = exhaustive_verify(args.n_max)
    print(report.summary())
    passed = report.passed
    if args.random:
        sweep = random_sweep(args.sizes, args.random, args.seed)
        print(f"random: {sweep.summary()}")
        passed = passed and sweep.passed
    for failure in report.failures[:20]:
        logger.error(failure)
    if args.out:
        _emit(dumps(verification_document(report)), args.out)
    return EXIT_OK if passed else EXIT_NEGATIVE


def cmd_escape(args) -> int:
    if args.mode == "gap":
        trace = gap_escape_experiment(args.levels, args.include_endpoint, args.side)
    elif args.mode == "interior":
        trace = interior_gap_escape_experiment(args.levels, args.gap)
    else:
        trace = graded_escape_experiment(args.block_sizes, args.levels, args.seed)
    text = trace_csv(trace) if args.format == "csv" else dumps(trace_document(trace))
    _emit(text, args.out)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    sel = parse_tournament(load_json(args.input))
    report = king_report(sel)
    _emit(to_dot(sel, report.kings), args.output)
    return EXIT_OK


def cmd_continuity(args) -> int:
    space = parse_space(load_json(args.space))
    sel = parse_tournament(load_json(args.tournament))
    cert = continuity_falsify(space, sel, args.delta, args.epsilon, args.max_witnesses)
    _emit(dumps(certificate_document(cert)), args.out)
    return EXIT_OK if cert.passed else EXIT_NEGATIVE


def cmd_sine(args) -> int:
    report = sine_king_experiment(args.points)
    _emit(dumps(sine_document(report)), args.out)
    return EXIT_OK if report.passed else EXIT_NEGATIVE


async def _run_plan(args) -> int:
    jobs = Config.load_plan(args.plan)
    if not jobs:
        logger.error("No jobs to run")
        return EXIT_USAGE
    db = Database(args.db)
    await db.init_db()
    try:
        results = await run_plan(jobs, RunLedger(db), args.force)
    finally:
        await db.dispose()
    failed = [name for name, ok in results.items() if not ok]
    print(f"{len(results)} jobs, {len(failed)} failed")
    return EXIT_OK if not failed else EXIT_NEGATIVE


def cmd_run_plan(args) -> int:
    return asyncio.run(_run_plan(args))


async def _list_runs(args) -> int:
    db = Database(args.db)
    await db.init_db()
    try:
        runs = await RunLedger(db).list_runs()
    finally:
        await db.dispose()
    for run in runs:
        status = "passed" if run.passed else "FAILED"
        print(f"{run.id}\t{run.job_name}\t{run.kind}\t{status}\t{run.created_at:%Y-%m-%d %H:%M:%S}")
    return EXIT_OK


def cmd_runs(args) -> int:
    return asyncio.run(_list_runs(args))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kings", description="Kings of finite weak selections.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="materialize a selection spec into a tournament document")
    p.add_argument("--spec", required=True, help="inline JSON object or path to a JSON file")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("kings", help="king set, K-sets and witnesses of a tournament document")
    p.add_argument("input")
    p.add_argument("--witnesses", action="store_true")
    p.add_argument("--method", choices=("direct", "composition"), default="direct")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_kings)

    p = sub.add_parser("verify", help="exhaustive king checks over all small tournaments")
    p.add_argument("--n-max", type=int, default=Config.ENUMERATION_LIMIT)
    p.add_argument("--random", type=int, default=0, metavar="COUNT",
                   help="also check COUNT random tournaments per size")
    p.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 256])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("escape", help="king locations across nested refinements")
    p.add_argument("--mode", choices=("gap", "graded", "interior"), required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block-sizes", type=int, nargs="+", default=[1])
    p.add_argument("--include-endpoint", action="store_true")
    p.add_argument("--side", choices=("right", "left"), default="right")
    p.add_argument("--gap", type=float, default=0.5)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_escape)

    p = sub.add_parser("export-dot", help="write a tournament as a DOT digraph")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(handler=cmd_export_dot)

    p = sub.add_parser("continuity", help="search for continuity violations at a fixed resolution")
    p.add_argument("space")
    p.add_argument("tournament")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--max-witnesses", type=int, default=Config.MAX_WITNESSES)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_continuity)

    p = sub.add_parser("sine", help="sigma_min / sigma_max kings on the sampled sine graph")
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_sine)

    p = sub.add_parser("run-plan", help="run the YAML job plan and record results")
    p.add_argument("--plan", default=None)
    p.add_argument("--db", default=None)
    p.add_argument("--force", action="store_true", help="re-run jobs already recorded")
    p.set_defaults(handler=cmd_run_plan)

    p = sub.add_parser("runs", help="list recorded runs")
    p.add_argument("--db", default=None)
    p.set_defaults(handler=cmd_runs)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.handler(args)
    except DocumentError as e:
        logger.error(f"Malformed document: {e}")
        return EXIT_USAGE
    except InputError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected error in '{args.command}': {e}", exc_info=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
