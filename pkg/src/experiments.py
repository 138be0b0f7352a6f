import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import Config
from src.constructions import (
    clopen_sum, derive_seed, graded_partition, graph_selection, order_selection,
    param_label, random_tournament, threshold_selection,
)
from src.core import (
    InputError, enumerate_tournaments, k_set_via_composition, king_report, landau_king,
)
from src.sampled_spaces import (
    ContinuityCertificate, Violation, continuity_falsify, sample_graph, sine_curve_f, uniform_grid,
)

logger = logging.getLogger(__name__)


@dataclass
class EscapeLevel:
    level: int
    resolution: int
    sample_size: int
    kings: Tuple[int, ...]
    king_coordinates: Tuple[float, ...]
    metric: float


@dataclass
class EscapeTrace:
    mode: str
    metric_name: str
    levels: List[EscapeLevel] = field(default_factory=list)

    def add(self, record: EscapeLevel):
        if self.levels and record.sample_size <= self.levels[-1].sample_size:
            raise ValueError("trace levels must have strictly increasing sample sizes")
        if not record.kings:
            raise ValueError(f"level {record.level} recorded an empty king set")
        self.levels.append(record)

    @property
    def metrics(self) -> List[float]:
        return [rec.metric for rec in self.levels]


def _check_levels(n_levels: int):
    if isinstance(n_levels, bool) or not isinstance(n_levels, int) or n_levels < 1:
        raise InputError(f"n_levels must be a positive integer, got {n_levels!r}")


def gap_escape_experiment(n_levels: int, include_right_endpoint: bool = False,
                          side: str = "right") -> EscapeTrace:
    """
    Dyadic samples of [0, 1) (side='right', min-selection) or of (0, 1]
    (side='left', max-selection). The unique king is the sample point next
    to the missing endpoint, at distance 2**-k. Including the endpoint gives
    the compact control with distance 0.
    """
    _check_levels(n_levels)
    if side not in ("right", "left"):
        raise InputError(f"side must be 'right' or 'left', got {side!r}")
    trace = EscapeTrace(mode=f"gap-{side}", metric_name="distance_to_gap")
    for k in range(1, n_levels + 1):
        resolution = 2 ** k
        if side == "right":
            xs = uniform_grid(resolution, include_right_endpoint)
            sel = order_selection(xs, "min")
            gap = 1.0
        else:
            xs = uniform_grid(resolution, True)
            if not include_right_endpoint:
                xs = xs[1:]
            sel = order_selection(xs, "max")
            gap = 0.0
        kings = tuple(sorted(king_report(sel).kings))
        coords = tuple(xs[z] for z in kings)
        distance = max(abs(gap - x) for x in coords)
        trace.add(EscapeLevel(k, resolution, len(xs), kings, coords, distance))
        logger.debug(f"gap escape level {k}: king at {coords}, distance {distance}")
    return trace


def interior_gap_escape_experiment(n_levels: int, gap: float = 0.5) -> EscapeTrace:
    """
    Dyadic samples of [0, 1] minus an interior point. The rays below and above
    the gap are clopen; the lower ray carries the min-selection and dominates.
    Kings stay in the lower ray and approach the gap from below.
    """
    _check_levels(n_levels)
    if not 0.0 < gap < 1.0:
        raise InputError(f"gap must lie strictly inside (0, 1), got {gap}")
    trace = EscapeTrace(mode="gap-interior", metric_name="distance_to_gap")
    for k in range(1, n_levels + 1):
        resolution = 2 ** k
        xs = [x for x in uniform_grid(resolution, True) if x != gap]
        lower = [x for x in xs if x < gap]
        upper = [x for x in xs if x > gap]
        xi = order_selection(lower, "min", players=[param_label(x) for x in lower])
        psi = order_selection(upper, "min", players=[param_label(x) for x in upper]) if upper else None
        sel = clopen_sum(xi, psi)
        ordered = lower + upper
        kings = tuple(sorted(king_report(sel).kings))
        coords = tuple(ordered[z] for z in kings)
        distance = max(gap - x for x in coords)
        trace.add(EscapeLevel(k, resolution, len(ordered), kings, coords, distance))
    return trace


def graded_escape_experiment(block_sizes: Sequence[int], n_levels: int, seed: int) -> EscapeTrace:
    """
    Level N stacks blocks U_0..U_{N-1}; block m has size
    block_sizes[m % len(block_sizes)] and a random inner tournament seeded
    from (seed, N, m). All kings sit in block N-1.
    """
    _check_levels(n_levels)
    if not block_sizes or any(int(s) < 1 for s in block_sizes):
        raise InputError("block sizes must be a non-empty list of positive counts")
    trace = EscapeTrace(mode="graded", metric_name="king_block_index")
    for level in range(1, n_levels + 1):
        blocks, within, block_of = [], [], []
        start = 0
        for m in range(level):
            size = int(block_sizes[m % len(block_sizes)])
            blocks.append(list(range(start, start + size)))
            within.append(random_tournament(size, derive_seed(seed, level, m)))
            block_of.extend([m] * size)
            start += size
        sel = graded_partition(blocks, within)
        kings = tuple(sorted(king_report(sel).kings))
        king_blocks = tuple(float(block_of[z]) for z in kings)
        trace.add(EscapeLevel(level, level, sel.n, kings, king_blocks, max(king_blocks)))
    return trace


@dataclass
class SineKingReport:
    n_points: int
    delta: float
    epsilon: float
    min_kings: Tuple[float, ...]
    max_kings: Tuple[float, ...]
    min_certificate: ContinuityCertificate
    max_certificate: ContinuityCertificate
    control_points: int
    control_certificate: ContinuityCertificate
    control_straddles: bool

    @property
    def min_king_ok(self) -> bool:
        return self.min_kings == (1.0,)

    @property
    def max_king_ok(self) -> bool:
        return self.max_kings == (0.0,)

    @property
    def passed(self) -> bool:
        return (self.min_king_ok and self.max_king_ok
                and self.min_certificate.passed and self.max_certificate.passed)


CONTROL_DELTA = 0.25
CONTROL_EPSILON = 0.5


def _straddles(violation: Violation, params: Sequence[float], threshold: float) -> bool:
    def crosses(p: int, q: int) -> bool:
        return (params[p] <= threshold) != (params[q] <= threshold)
    return crosses(violation.a, violation.a2) or crosses(violation.b, violation.b2)


def sine_king_experiment(n_points: int, control_points: int = 17) -> SineKingReport:
    """
    Sample the graph of |sin(1/t)| at n_points evenly spaced parameters,
    locate the sigma_min and sigma_max kings and probe both selections with
    the continuity falsifier at half the parameter gap. The threshold control
    is scanned on at most control_points of the same parameters.
    """
    if n_points < 2:
        raise InputError(f"n_points must be at least 2, got {n_points}")
    s_values = uniform_grid(n_points - 1, True)
    space = sample_graph(sine_curve_f, s_values)
    delta = 1.0 / (2 * (n_points - 1))
    epsilon = 4 * delta

    kings = {}
    certificates = {}
    for mode in ("min", "max"):
        sel = graph_selection(s_values, mode)
        kings[mode] = tuple(s_values[z] for z in sorted(king_report(sel, "composition").kings))
        certificates[mode] = continuity_falsify(space, sel, delta, epsilon)

    idx = np.unique(np.linspace(0, n_points - 1, min(n_points, control_points)).round().astype(int))
    control_s = [s_values[i] for i in idx.tolist()]
    control_space = sample_graph(sine_curve_f, control_s)
    control = threshold_selection(control_s, 0.5)
    control_certificate = continuity_falsify(control_space, control, CONTROL_DELTA, CONTROL_EPSILON)
    straddles = any(_straddles(v, control_s, 0.5) for v in control_certificate.violations)

    report = SineKingReport(
        n_points=n_points, delta=delta, epsilon=epsilon,
        min_kings=kings["min"], max_kings=kings["max"],
        min_certificate=certificates["min"], max_certificate=certificates["max"],
        control_points=len(control_s), control_certificate=control_certificate,
        control_straddles=straddles,
    )
    logger.info(f"sine kings at {n_points} points: sigma_min {report.min_kings}, "
                f"sigma_max {report.max_kings}, control {control_certificate.verdict}")
    return report


@dataclass
class VerificationReport:
    n_max: int
    counts: Dict[int, int] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        return f"{self.total} tournaments, {len(self.failures)} failures"


def _check_instance(sel, label: str, failures: List[str], agreement: bool = True):
    report = king_report(sel)
    if not report.kings:
        failures.append(f"{label}: empty king set")
        return
    z = landau_king(sel)
    if z not in report.kings:
        failures.append(f"{label}: landau king {z} not in {sorted(report.kings)}")
    if agreement:
        k_sets = report.k_sets
        for x in range(sel.n):
            if k_set_via_composition(sel, x) != k_sets[x]:
                failures.append(f"{label}: K-sets disagree at target {x}")


def exhaustive_verify(n_max: int) -> VerificationReport:
    limit = Config.ENUMERATION_LIMIT
    if isinstance(n_max, bool) or not isinstance(n_max, int) or not 1 <= n_max <= limit:
        raise InputError(f"n_max must be between 1 and {limit}, got {n_max!r}")
    report = VerificationReport(n_max=n_max)
    started = time.perf_counter()
    for n in range(1, n_max + 1):
        count = 0
        for sel in enumerate_tournaments(n):
            _check_instance(sel, f"n={n} code={sel.code}", report.failures)
            count += 1
        report.counts[n] = count
        logger.debug(f"verified {count} tournaments on {n} players")
    report.elapsed = time.perf_counter() - started
    logger.info(f"exhaustive verification up to n={n_max}: {report.summary()} in {report.elapsed:.2f}s")
    return report


def random_sweep(sizes: Sequence[int], count: int, seed: int,
                 agreement_limit: Optional[int] = 128) -> VerificationReport:
    """Landau membership and K-set agreement on seeded random tournaments."""
    if count < 0:
        raise InputError(f"count must be non-negative, got {count}")
    report = VerificationReport(n_max=max(sizes) if sizes else 0)
    started = time.perf_counter()
    for n in sizes:
        if n < 1:
            raise InputError(f"sizes must be positive, got {n}")
        agreement = agreement_limit is None or n <= agreement_limit
        for i in range(count):
            sel = random_tournament(n, derive_seed(seed, n, i))
            _check_instance(sel, f"n={n} sample={i}", report.failures, agreement)
        report.counts[n] = count
    report.elapsed = time.perf_counter() - started
    logger.info(f"random sweep over sizes {list(sizes)}: {report.summary()} in {report.elapsed:.2f}s")
    return report
