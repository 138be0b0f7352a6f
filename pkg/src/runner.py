import asyncio
import logging
from typing import Any, Dict, List, Optional, Tuple

from src.config import Job
from src.database import RunLedger
from src.documents import sine_document, trace_document, verification_document
from src.experiments import (
    EscapeTrace, exhaustive_verify, gap_escape_experiment, graded_escape_experiment,
    interior_gap_escape_experiment, random_sweep, sine_king_experiment,
)

logger = logging.getLogger(__name__)

_STOP = object()


def gap_trace_ok(trace: EscapeTrace, include_endpoint: bool) -> bool:
    expected = [0.0 if include_endpoint else 2.0 ** -rec.level for rec in trace.levels]
    return trace.metrics == expected


def graded_trace_ok(trace: EscapeTrace) -> bool:
    return all(rec.metric == rec.level - 1 for rec in trace.levels)


def interior_trace_ok(trace: EscapeTrace) -> bool:
    distances = trace.metrics
    return all(d > 0 for d in distances) and all(b <= a for a, b in zip(distances, distances[1:]))


def execute_job(job: Job) -> Tuple[bool, Dict[str, Any]]:
    p = job.params
    if job.kind == "verify":
        report = exhaustive_verify(int(p.get("n_max", 6)))
        return report.passed, verification_document(report)
    if job.kind == "random_sweep":
        report = random_sweep(list(p.get("sizes", [16, 64, 256])), int(p.get("count", 100)), int(p.get("seed", 0)))
        return report.passed, verification_document(report)
    if job.kind == "gap_escape":
        include = bool(p.get("include_endpoint", False))
        trace = gap_escape_experiment(int(p.get("levels", 10)), include, str(p.get("side", "right")))
        return gap_trace_ok(trace, include), trace_document(trace)
    if job.kind == "interior_gap_escape":
        trace = interior_gap_escape_experiment(int(p.get("levels", 10)), float(p.get("gap", 0.5)))
        return interior_trace_ok(trace), trace_document(trace)
    if job.kind == "graded_escape":
        trace = graded_escape_experiment(list(p.get("block_sizes", [1])), int(p.get("levels", 5)), int(p.get("seed", 0)))
        return graded_trace_ok(trace), trace_document(trace)
    if job.kind == "sine_kings":
        report = sine_king_experiment(int(p.get("points", 16)))
        return report.passed, sine_document(report)
    raise ValueError(f"unknown job kind {job.kind!r}")


async def plan_worker(queue: asyncio.Queue, ledger: Optional[RunLedger], results: Dict[str, bool],
                      force: bool = False):
    logger.info("Plan worker started")
    while True:
        job = await queue.get()
        try:
            if job is _STOP:
                break
            recorded = await ledger.get_run(job) if ledger else None
            if recorded is not None and not force:
                logger.info(f"Skipping '{job.name}': already recorded "
                            f"({'passed' if recorded.passed else 'FAILED'})")
                results[job.name] = bool(recorded.passed)
                continue

            try:
                passed, result = await asyncio.to_thread(execute_job, job)
            except Exception as e:
                logger.error(f"Job '{job.name}' failed: {e}", exc_info=True)
                passed, result = False, {"error": str(e)}

            results[job.name] = passed
            logger.info(f"Job '{job.name}' ({job.kind}): {'passed' if passed else 'FAILED'}")
            if ledger and recorded is None:
                await ledger.add_run(job, passed, result)
            elif ledger:
                await ledger.replace_run(job, passed, result)
        finally:
            queue.task_done()


async def run_plan(jobs: List[Job], ledger: Optional[RunLedger] = None, force: bool = False) -> Dict[str, bool]:
    """Run jobs in order through a single worker; returns pass/fail per job name."""
    names = [job.name for job in jobs]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise ValueError(f"job names must be unique, repeated: {duplicates}")
    queue: asyncio.Queue = asyncio.Queue()
    results: Dict[str, bool] = {}
    worker_task = asyncio.create_task(plan_worker(queue, ledger, results, force))
    for job in jobs:
        await queue.put(job)
    await queue.put(_STOP)
    try:
        await queue.join()
    finally:
        if not worker_task.done():
            worker_task.cancel()
        try:
            await worker_task
        except asyncio.CancelledError:
            pass
    return results
