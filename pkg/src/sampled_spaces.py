import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core import InputError, WeakSelection

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SampledSpace:
    """Finite point sample of the unit square with the Euclidean metric."""
    points: np.ndarray = field(repr=False)
    labels: Optional[Tuple[str, ...]] = None
    params: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InputError(f"points must have shape (n, 2), got {pts.shape}")
        if not np.all((pts >= 0.0) & (pts <= 1.0)):
            bad = int(np.flatnonzero(~np.all((pts >= 0.0) & (pts <= 1.0), axis=1))[0])
            raise InputError(f"point {bad} = {tuple(pts[bad])} lies outside [0, 1]^2")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise InputError("points must be pairwise distinct")
        n = len(pts)
        if self.labels is not None and len(self.labels) != n:
            raise InputError(f"expected {n} labels, got {len(self.labels)}")
        if self.params is not None and len(self.params) != n:
            raise InputError(f"expected {n} parameters, got {len(self.params)}")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def on_line(cls, xs: Sequence[float], labels: Optional[Sequence[str]] = None) -> "SampledSpace":
        xs = [float(x) for x in xs]
        pts = np.column_stack([xs, np.zeros(len(xs))]) if xs else np.empty((0, 2))
        return cls(pts, tuple(labels) if labels is not None else None, tuple(xs))

    def distance(self, a: int, b: int) -> float:
        return float(np.hypot(*(self.points[a] - self.points[b])))


@dataclass
class Violation:
    a: int
    b: int
    a2: int
    b2: int
    explanation: str


@dataclass
class ContinuityCertificate:
    delta: float
    epsilon: float
    verdict: str
    violations: List[Violation] = field(default_factory=list)
    violation_count: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def sine_curve_f(t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise InputError(f"t = {t} outside [0, 1]")
    if t == 0.0:
        return 0.0
    return abs(math.sin(1.0 / t))


def identity_f(t: float) -> float:
    return t


def sample_graph(f: Callable[[float], float], s_values: Sequence[float]) -> SampledSpace:
    """Points (s, f(s)) of the graph of f, tagged with s."""
    s_values = [float(s) for s in s_values]
    if len(set(s_values)) != len(s_values):
        raise InputError("s_values must be distinct")
    points = []
    for s in s_values:
        if not 0.0 <= s <= 1.0:
            raise InputError(f"s = {s} outside [0, 1]")
        y = f(s)
        if not 0.0 <= y <= 1.0:
            raise InputError(f"f({s}) = {y} outside [0, 1]")
        points.append((s, y))
    pts = np.array(points, dtype=np.float64) if points else np.empty((0, 2))
    return SampledSpace(pts, tuple(repr(s) for s in s_values), tuple(s_values))


def uniform_grid(n: int, include_right_endpoint: bool = True) -> List[float]:
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    top = n + 1 if include_right_endpoint else n
    return [k / n for k in range(top)]


def _neighbour_pairs(points: np.ndarray, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    """All ordered (p, q) with d(p, q) < delta, including p == q, via delta-cell hashing."""
    cells: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    keys = np.floor(points / delta).astype(np.int64)
    for idx, (cx, cy) in enumerate(keys.tolist()):
        cells[(cx, cy)].append(idx)
    first, second = [], []
    for idx, (cx, cy) in enumerate(keys.tolist()):
        candidates = [
            j for dx in (-1, 0, 1) for dy in (-1, 0, 1) for j in cells.get((cx + dx, cy + dy), ())
        ]
        cand = np.array(candidates, dtype=np.intp)
        d = np.hypot(*(points[cand] - points[idx]).T)
        for j in cand[d < delta]:
            first.append(idx)
            second.append(int(j))
    return np.array(first, dtype=np.intp), np.array(second, dtype=np.intp)


def continuity_falsify(space: SampledSpace, sel: WeakSelection, delta: float, epsilon: float,
                       max_witnesses: int = 64) -> ContinuityCertificate:
    """
    Search pairs (a, b) and perturbations (a', b') with d(a, a') < delta,
    d(b, b') < delta and both pairs epsilon-separated, such that the selection
    keeps the first member of {a, b} but the second member of {a', b'}.
    A pass only means nothing was found at this resolution.
    """
    if len(space) != sel.n:
        raise InputError(f"space has {len(space)} points but the selection has {sel.n} players")
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    if not epsilon > delta:
        raise InputError(f"epsilon ({epsilon}) must exceed delta ({delta})")

    points = space.points
    # keeps_first[a, b]: the selection picks a from {a, b}
    keeps_first = sel.matrix.T
    src, dst = _neighbour_pairs(points, delta)
    logger.debug(f"continuity scan: {len(points)} points, {len(src)} neighbour pairs")

    violations: List[Violation] = []
    count = 0
    for a, a2 in zip(src.tolist(), dst.tolist()):
        # b ranges over src, b' over its neighbour dst
        far = (np.hypot(*(points[src] - points[a]).T) > epsilon) & \
              (np.hypot(*(points[dst] - points[a2]).T) > epsilon)
        hits = far & keeps_first[a, src] & ~keeps_first[a2, dst]
        found = np.flatnonzero(hits)
        if found.size == 0:
            continue
        count += int(found.size)
        for k in found[: max(0, max_witnesses - len(violations))].tolist():
            b, b2 = int(src[k]), int(dst[k])
            violations.append(Violation(
                a=a, b=b, a2=a2, b2=b2,
                explanation=(f"picks {a} from {{{a}, {b}}} but {b2} from {{{a2}, {b2}}}"),
            ))

    verdict = "violation" if count else "pass"
    return ContinuityCertificate(delta=delta, epsilon=epsilon, verdict=verdict,
                                 violations=violations, violation_count=count)


def replay_violation(sel: WeakSelection, violation: Violation) -> bool:
    """True when the recorded side mismatch still holds for sel."""
    v = violation
    return sel.choice(v.a, v.b) == v.a and sel.choice(v.a2, v.b2) == v.b2
