import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.core import InputError, WeakSelection, pair_count

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

KINDS = (
    "order_min", "order_max", "clopen_sum", "graded_partition",
    "graph_min", "graph_max", "random", "threshold",
)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64
    z = z.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def derive_seed(master: int, *path: int) -> int:
    seed = master & MASK64
    for key in path:
        seed = mix64((seed ^ (key & MASK64)) + GAMMA)
    return seed


def _check_mode(mode: str) -> str:
    if mode not in ("min", "max"):
        raise InputError(f"mode must be 'min' or 'max', got {mode!r}")
    return mode


def _default_players(n: int, players: Optional[Sequence[str]]) -> List[str]:
    if players is None:
        return [str(k) for k in range(n)]
    if len(players) != n:
        raise InputError(f"expected {n} player identifiers, got {len(players)}")
    return list(players)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, (bool, np.bool_))


def _key_error(keys: Sequence[Any], numeric: bool = False) -> Optional[str]:
    """Why keys cannot be ranked, or None: non-empty, distinct, all numbers or all strings."""
    if not keys:
        return "keys must be non-empty"
    if all(_is_number(k) for k in keys):
        if any(k != k for k in keys):
            return "keys must not be NaN"
    elif numeric:
        return "keys must be numbers"
    elif not all(isinstance(k, str) for k in keys):
        return "keys must be all numbers or all strings"
    if len(set(keys)) != len(keys):
        return "keys must be distinct"
    return None


def _ranks(keys: Sequence[Any], numeric: bool = False) -> np.ndarray:
    n = len(keys)
    problem = _key_error(keys, numeric)
    if problem:
        raise InputError(problem)
    order = sorted(range(n), key=keys.__getitem__)
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(n)
    return ranks


def order_selection(keys: Sequence[Any], mode: str = "min",
                    players: Optional[Sequence[str]] = None) -> WeakSelection:
    """
    Choose the smaller (mode='min') or larger (mode='max') key of every pair.
    Under 'min' the maximum key dominates everybody and is the unique king.
    """
    _check_mode(mode)
    keys = list(keys)
    ranks = _ranks(keys)
    iu, ju = np.triu_indices(len(keys), 1)
    # bit set means j is chosen
    bits = ranks[ju] < ranks[iu] if mode == "min" else ranks[ju] > ranks[iu]
    return WeakSelection(tuple(_default_players(len(keys), players)), bits)


def threshold_selection(keys: Sequence[float], threshold: float = 0.5,
                        players: Optional[Sequence[str]] = None) -> WeakSelection:
    """Min of the pair when both keys are <= threshold, max otherwise. Discontinuous at threshold."""
    keys = list(keys)
    _ranks(keys, numeric=True)
    if not _is_number(threshold):
        raise InputError(f"threshold must be a number, got {threshold!r}")
    values = np.asarray(keys, dtype=float)
    iu, ju = np.triu_indices(len(keys), 1)
    low = (values[iu] <= threshold) & (values[ju] <= threshold)
    bits = np.where(low, values[ju] < values[iu], values[ju] > values[iu])
    return WeakSelection(tuple(_default_players(len(keys), players)), bits)


def clopen_sum(xi: WeakSelection, psi: Optional[WeakSelection] = None) -> WeakSelection:
    """
    Glue xi on U and psi on V, U-players dominating every V-player.
    U occupies indices 0..len(xi)-1 of the result.
    """
    if xi.n == 0:
        raise InputError("the dominant part U must be non-empty")
    if psi is None or psi.n == 0:
        return xi
    overlap = set(xi.players) & set(psi.players)
    if overlap:
        raise InputError(f"ground sets overlap on players {sorted(overlap)}")
    nu, nv = xi.n, psi.n
    m = np.zeros((nu + nv, nu + nv), dtype=bool)
    m[:nu, :nu] = xi.matrix
    m[nu:, nu:] = psi.matrix
    m[:nu, nu:] = True
    return WeakSelection.from_matrix(m, xi.players + psi.players)


def graded_partition(blocks: Sequence[Sequence[int]], within: Sequence[WeakSelection],
                     players: Optional[Sequence[str]] = None) -> WeakSelection:
    """
    Blocks U_0..U_{N-1} partition range(n); higher blocks dominate lower ones.
    Inside block m, position k of blocks[m] is player k of within[m].
    """
    if not blocks:
        raise InputError("at least one block is required")
    if len(within) != len(blocks):
        raise InputError(f"expected {len(blocks)} inner selections, got {len(within)}")
    for m, block in enumerate(blocks):
        if not block:
            raise InputError(f"block {m} is empty")
        if not all(isinstance(a, (int, np.integer)) and not isinstance(a, (bool, np.bool_)) for a in block):
            raise InputError(f"block {m} must list integer player indices")
    members = [int(a) for block in blocks for a in block]
    n = len(members)
    for m, block in enumerate(blocks):
        if within[m].n != len(block):
            raise InputError(f"block {m} has {len(block)} players but its selection has {within[m].n}")
    if len(set(members)) != n:
        raise InputError("blocks overlap")
    if sorted(members) != list(range(n)):
        raise InputError(f"blocks must cover players 0..{n - 1} exactly")

    block_of = np.empty(n, dtype=np.int64)
    for m, block in enumerate(blocks):
        block_of[list(block)] = m
    matrix = block_of[:, np.newaxis] > block_of[np.newaxis, :]
    for m, block in enumerate(blocks):
        idx = np.array(block, dtype=np.intp)
        matrix[np.ix_(idx, idx)] = within[m].matrix
    return WeakSelection.from_matrix(matrix, _default_players(n, players))


def param_label(s: float) -> str:
    return repr(float(s))


def graph_selection(s_values: Sequence[float], mode: str = "min") -> WeakSelection:
    """sigma_min / sigma_max on graph points keyed by their parameter s in [0, 1]."""
    for k, s in enumerate(s_values):
        if not 0.0 <= s <= 1.0:
            raise InputError(f"s_values[{k}] = {s} outside [0, 1]")
    return order_selection(s_values, mode, players=[param_label(s) for s in s_values])


def random_tournament(n: int, seed: int) -> WeakSelection:
    """
    Pair p is oriented by the top bit of mix64(seed + (p + 1) * GAMMA),
    so each orientation depends only on (seed, p).
    """
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    m = pair_count(n)
    state = np.uint64(seed & MASK64) + np.arange(1, m + 1, dtype=np.uint64) * np.uint64(GAMMA)
    bits = (mix64_array(state) >> np.uint64(63)).astype(bool)
    return WeakSelection(tuple(str(k) for k in range(n)), bits)


@dataclass
class SelectionSpec:
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "spec") -> "SelectionSpec":
        if not isinstance(data, dict):
            raise InputError(f"{path}: expected an object")
        kind = data.get("kind")
        if kind not in KINDS:
            raise InputError(f"{path}.kind: unknown kind {kind!r}")
        params = {k: v for k, v in data.items() if k not in ("kind", "seed")}
        seed = data.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise InputError(f"{path}.seed: expected an integer")
        spec = cls(kind=kind, params=params, seed=seed)
        spec.validate(path)
        return spec

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind}
        data.update(self.params)
        if self.seed is not None:
            data["seed"] = self.seed
        return data

    def _require(self, name: str, path: str):
        if name not in self.params:
            raise InputError(f"{path}.{name}: required for kind {self.kind}")
        return self.params[name]

    def validate(self, path: str = "spec"):
        kind = self.kind
        if kind == "random":
            n = self._require("n", path)
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise InputError(f"{path}.n: expected a positive integer")
            if self.seed is None:
                raise InputError(f"{path}.seed: required for kind random")
        elif kind in ("order_min", "order_max", "threshold"):
            keys = self._require("keys", path)
            if not isinstance(keys, list) or not keys:
                raise InputError(f"{path}.keys: expected a non-empty list")
            problem = _key_error(keys, numeric=kind == "threshold")
            if problem:
                raise InputError(f"{path}.keys: {problem}")
            if kind == "threshold" and "threshold" in self.params and not _is_number(self.params["threshold"]):
                raise InputError(f"{path}.threshold: expected a number")
        elif kind in ("graph_min", "graph_max"):
            s_values = self._require("s_values", path)
            if not isinstance(s_values, list) or not s_values:
                raise InputError(f"{path}.s_values: expected a non-empty list")
            if any(not isinstance(s, (int, float)) or not 0 <= s <= 1 for s in s_values):
                raise InputError(f"{path}.s_values: values must lie in [0, 1]")
        elif kind == "clopen_sum":
            SelectionSpec.from_dict(self._require("xi", path), f"{path}.xi")
            if self.params.get("psi") is not None:
                SelectionSpec.from_dict(self.params["psi"], f"{path}.psi")
        elif kind == "graded_partition":
            blocks = self._require("blocks", path)
            if not isinstance(blocks, list) or not blocks:
                raise InputError(f"{path}.blocks: expected a non-empty list of blocks")
            for m, block in enumerate(blocks):
                if not isinstance(block, list) or not block:
                    raise InputError(f"{path}.blocks[{m}]: expected a non-empty list")
                if any(isinstance(a, bool) or not isinstance(a, int) for a in block):
                    raise InputError(f"{path}.blocks[{m}]: expected integer player indices")
            members = sorted(a for block in blocks for a in block)
            if members != list(range(len(members))):
                raise InputError(f"{path}.blocks: blocks must partition 0..{len(members) - 1}")
            within = self.params.get("within")
            if within is not None:
                if not isinstance(within, list) or len(within) != len(blocks):
                    raise InputError(f"{path}.within: expected one spec per block")
                for m, inner in enumerate(within):
                    SelectionSpec.from_dict(inner, f"{path}.within[{m}]")


def materialize(spec: SelectionSpec) -> WeakSelection:
    kind, p = spec.kind, spec.params
    if kind == "random":
        return random_tournament(p["n"], spec.seed)
    if kind == "order_min":
        return order_selection(p["keys"], "min")
    if kind == "order_max":
        return order_selection(p["keys"], "max")
    if kind == "threshold":
        return threshold_selection(p["keys"], p.get("threshold", 0.5))
    if kind == "graph_min":
        return graph_selection(p["s_values"], "min")
    if kind == "graph_max":
        return graph_selection(p["s_values"], "max")
    if kind == "clopen_sum":
        xi = materialize(SelectionSpec.from_dict(p["xi"]))
        psi = materialize(SelectionSpec.from_dict(p["psi"])) if p.get("psi") is not None else None
        if psi is None:
            return xi
        # positional identifiers of the two parts would collide
        xi = WeakSelection(tuple(f"u{k}" for k in range(xi.n)), xi.bits)
        psi = WeakSelection(tuple(f"v{k}" for k in range(psi.n)), psi.bits)
        return clopen_sum(xi, psi)
    if kind == "graded_partition":
        blocks = p["blocks"]
        if p.get("within") is not None:
            within = [materialize(SelectionSpec.from_dict(inner)) for inner in p["within"]]
        elif spec.seed is not None:
            within = [random_tournament(len(block), derive_seed(spec.seed, m)) for m, block in enumerate(blocks)]
        else:
            # last listed player of each block dominates its block
            within = [order_selection(list(range(len(block))), "min") for block in blocks]
        return graded_partition(blocks, within)
    raise InputError(f"spec.kind: unknown kind {kind!r}")
