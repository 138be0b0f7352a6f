import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.config import Config

logger = logging.getLogger(__name__)


class InputError(ValueError):
    """Raised for any invalid argument or malformed input."""


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int, i: int, j: int) -> int:
    # Lexicographic position of {i, j} (i < j) among all pairs of range(n)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True, eq=False)
class WeakSelection:
    """
    A finite tournament: one chosen element for every unordered pair of players.

    `bits` is packed over lexicographically ordered pairs (i < j);
    bit = 1 means the higher index j is chosen, which reads as i -> j.
    """
    players: Tuple[str, ...]
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).reshape(-1)
        expected = pair_count(len(self.players))
        if bits.size != expected:
            raise InputError(f"expected {expected} pair choices for {len(self.players)} players, got {bits.size}")
        players = tuple(str(p) for p in self.players)
        if len(set(players)) != len(players):
            raise InputError("player identifiers must be distinct")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "players", players)
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return len(self.players)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeakSelection):
            return NotImplemented
        return self.players == other.players and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.players, self.bits.tobytes()))

    @property
    def n(self) -> int:
        return len(self.players)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dominance matrix: matrix[a, b] is a ->_phi b."""
        n = self.n
        m = np.eye(n, dtype=bool)
        iu, ju = np.triu_indices(n, 1)
        m[iu, ju] = self.bits
        m[ju, iu] = ~self.bits
        m.flags.writeable = False
        return m

    @cached_property
    def code(self) -> int:
        """Bit vector read as an integer, first pair most significant."""
        value = 0
        for bit in self.bits:
            value = (value << 1) | int(bit)
        return value

    def check_index(self, a: int, name: str = "player") -> int:
        if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
            raise InputError(f"{name} must be an integer index, got {a!r}")
        if not 0 <= a < self.n:
            raise InputError(f"{name} index {a} out of range for {self.n} players")
        return int(a)

    def choice(self, i: int, j: int) -> int:
        i = self.check_index(i, "i")
        j = self.check_index(j, "j")
        if i == j:
            raise InputError(f"no choice is defined on the self-pair {{{i}, {j}}}")
        lo, hi = min(i, j), max(i, j)
        return hi if self.bits[pair_index(self.n, lo, hi)] else lo

    def picks(self) -> Iterator[Tuple[int, int, int]]:
        n = self.n
        p = 0
        for i in range(n):
            for j in range(i + 1, n):
                yield i, j, (j if self.bits[p] else i)
                p += 1

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, players: Optional[Sequence[str]] = None) -> "WeakSelection":
        """Read the upper triangle; the lower triangle is implied."""
        m = np.asarray(matrix, dtype=bool)
        n = m.shape[0]
        if m.shape != (n, n):
            raise InputError(f"dominance matrix must be square, got shape {m.shape}")
        iu, ju = np.triu_indices(n, 1)
        if players is None:
            players = [str(k) for k in range(n)]
        return cls(tuple(players), m[iu, ju])

    @classmethod
    def from_code(cls, n: int, code: int, players: Optional[Sequence[str]] = None) -> "WeakSelection":
        m = pair_count(n)
        if not 0 <= code < (1 << m):
            raise InputError(f"code {code} out of range for {n} players")
        bits = np.array([(code >> (m - 1 - p)) & 1 for p in range(m)], dtype=bool)
        if players is None:
            players = [str(k) for k in range(n)]
        return cls(tuple(players), bits)

    @classmethod
    def from_picks(cls, n: int, picks: Iterable[Tuple[int, int, int]],
                   players: Optional[Sequence[str]] = None) -> "WeakSelection":
        """Build from (i, j, pick) records; exactly one record per unordered pair."""
        m = pair_count(n)
        bits = np.zeros(m, dtype=bool)
        seen = np.zeros(m, dtype=bool)
        for i, j, pick in picks:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise InputError(f"invalid pair ({i}, {j}) for {n} players")
            if pick not in (i, j):
                raise InputError(f"pick {pick} is not a member of pair ({i}, {j})")
            lo, hi = min(i, j), max(i, j)
            p = pair_index(n, lo, hi)
            if seen[p]:
                raise InputError(f"duplicate choice for pair ({lo}, {hi})")
            seen[p] = True
            bits[p] = pick == hi
        if not seen.all():
            p = int(np.argmin(seen))
            lo, hi = np.triu_indices(n, 1)
            raise InputError(f"missing choice for pair ({int(lo[p])}, {int(hi[p])})")
        if players is None:
            players = [str(k) for k in range(n)]
        return cls(tuple(players), bits)


@dataclass(frozen=True, eq=False)
class DominanceRelation:
    n: int
    matrix: np.ndarray = field(repr=False)

    def arrow(self, a: int, b: int) -> bool:
        return bool(self.matrix[a, b])


@dataclass(frozen=True, eq=False)
class KingReport:
    """
    K_phi and the per-target K-sets of a selection.

    reach[z, x] holds iff z -> y -> x for some y, i.e. z is in K_{phi,x}.
    witnesses maps each king to its intermediate y for every target x.
    """
    kings: FrozenSet[int]
    reach: np.ndarray = field(repr=False)
    witnesses: Dict[int, Tuple[int, ...]] = field(repr=False)

    @property
    def k_sets(self) -> Dict[int, FrozenSet[int]]:
        return {x: frozenset(np.flatnonzero(self.reach[:, x]).tolist()) for x in range(self.reach.shape[0])}

    def witness(self, z: int, x: int) -> int:
        return self.witnesses[z][x]

    def witness_triples(self) -> List[Tuple[int, int, int]]:
        return [(z, y, x) for z in sorted(self.witnesses) for x, y in enumerate(self.witnesses[z])]


def dominance(sel: WeakSelection) -> DominanceRelation:
    return DominanceRelation(n=sel.n, matrix=sel.matrix)


def arrow(sel: WeakSelection, a: int, b: int) -> bool:
    a = sel.check_index(a, "a")
    b = sel.check_index(b, "b")
    if a == b:
        return True
    return sel.choice(a, b) == b


def out_degrees(sel: WeakSelection) -> np.ndarray:
    return sel.matrix.sum(axis=1) - 1


def out_degree(sel: WeakSelection, a: int) -> int:
    a = sel.check_index(a, "a")
    return int(out_degrees(sel)[a])


def _require_players(sel: WeakSelection):
    if sel.n == 0:
        raise InputError("the player set must be non-empty")


def landau_king(sel: WeakSelection) -> int:
    """A vertex of maximum out-degree, lowest index on ties. Always a king."""
    _require_players(sel)
    return int(np.argmax(out_degrees(sel)))


def _masks(sel: WeakSelection) -> Tuple[List[int], List[int]]:
    # Row/column bitsets of the dominance matrix as Python ints
    m = sel.matrix

    def to_int(row: np.ndarray) -> int:
        return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")

    return [to_int(m[a]) for a in range(sel.n)], [to_int(m[:, a]) for a in range(sel.n)]


def _k_set_from_masks(out_masks: List[int], in_mask: int) -> FrozenSet[int]:
    return frozenset(z for z, row in enumerate(out_masks) if row & in_mask)


def k_set(sel: WeakSelection, x: int) -> FrozenSet[int]:
    """{z : z -> y -> x for some y}, by direct quantification over y."""
    x = sel.check_index(x, "x")
    out_masks, in_masks = _masks(sel)
    return _k_set_from_masks(out_masks, in_masks[x])


def k_set_via_composition(sel: WeakSelection, x: int) -> FrozenSet[int]:
    """
    The same set through relations: F = {(a, b): a -> b},
    P = (F x X) & (X x F), Q = P restricted to third coordinate x,
    then projection of Q on the first coordinate.
    """
    x = sel.check_index(x, "x")
    f = sel.matrix
    # Q[a, b] = F[a, b] and F[b, x]
    q = f & f[:, x][np.newaxis, :]
    return frozenset(np.flatnonzero(q.any(axis=1)).tolist())


def compose(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Boolean relation product: (f o g)[a, c] iff f[a, b] and g[b, c] for some b."""
    # float32 counts stay exact below 2**24 players
    return (f.astype(np.float32) @ g.astype(np.float32)) > 0


def _reach_direct(sel: WeakSelection) -> np.ndarray:
    n = sel.n
    out_masks, in_masks = _masks(sel)
    reach = np.zeros((n, n), dtype=bool)
    for x in range(n):
        for z in _k_set_from_masks(out_masks, in_masks[x]):
            reach[z, x] = True
    return reach


def _witnesses(sel: WeakSelection, kings: Iterable[int]) -> Dict[int, Tuple[int, ...]]:
    m = sel.matrix
    result = {}
    for z in kings:
        # paths[y, x] = z -> y and y -> x; lowest y per column
        paths = m[z][:, np.newaxis] & m
        ys = np.argmax(paths, axis=0)
        result[int(z)] = tuple(int(y) for y in ys)
    return result


def king_report(sel: WeakSelection, method: str = "direct") -> KingReport:
    _require_players(sel)
    if method == "direct":
        reach = _reach_direct(sel)
    elif method == "composition":
        reach = compose(sel.matrix, sel.matrix)
    else:
        raise InputError(f"unknown king_report method {method!r}")
    reach.flags.writeable = False
    kings = frozenset(np.flatnonzero(reach.all(axis=1)).tolist())
    return KingReport(kings=kings, reach=reach, witnesses=_witnesses(sel, sorted(kings)))


def is_king(sel: WeakSelection, z: int) -> Tuple[bool, Dict[int, int]]:
    z = sel.check_index(z, "z")
    m = sel.matrix
    witnesses = {}
    for x in range(sel.n):
        ys = np.flatnonzero(m[z] & m[:, x])
        if ys.size == 0:
            return False, {}
        witnesses[x] = int(ys[0])
    return True, witnesses


def common_k_set(sel: WeakSelection, targets: Iterable[int]) -> FrozenSet[int]:
    """Intersection of K_{phi,x} over finitely many targets; never empty."""
    targets = [sel.check_index(x, "x") for x in targets]
    if not targets:
        raise InputError("targets must be non-empty")
    out_masks, in_masks = _masks(sel)
    result = None
    for x in targets:
        ks = _k_set_from_masks(out_masks, in_masks[x])
        result = ks if result is None else result & ks
    return result


def restrict(sel: WeakSelection, subset: Iterable[int]) -> Tuple[WeakSelection, Tuple[int, ...]]:
    """
    Restriction to a subset of players. Returns the restricted selection
    and the table mapping each new index to the original one.
    """
    index = tuple(sorted({sel.check_index(a, "subset member") for a in subset}))
    if not index:
        raise InputError("subset must be non-empty")
    idx = np.array(index, dtype=np.intp)
    sub = sel.matrix[np.ix_(idx, idx)]
    return WeakSelection.from_matrix(sub, [sel.players[i] for i in index]), index


def relabel(sel: WeakSelection, perm: Sequence[int]) -> WeakSelection:
    """Move player a to position perm[a]; identifiers travel with the players."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(sel.n)):
        raise InputError(f"{perm} is not a permutation of range({sel.n})")
    idx = np.array(perm, dtype=np.intp)
    m = np.empty((sel.n, sel.n), dtype=bool)
    m[np.ix_(idx, idx)] = sel.matrix
    players = [""] * sel.n
    for a, p in enumerate(perm):
        players[p] = sel.players[a]
    return WeakSelection.from_matrix(m, players)


def tournament_count(n: int) -> int:
    return 1 << pair_count(n)


def enumerate_tournaments(n: int, start: int = 0, stop: Optional[int] = None) -> Iterator[WeakSelection]:
    """Every labeled tournament on n players, in lexicographic order of the bit vector."""
    limit = Config.ENUMERATION_LIMIT
    if not 1 <= n <= limit:
        raise InputError(f"n must be between 1 and {limit}, got {n}")
    total = tournament_count(n)
    stop = total if stop is None else min(stop, total)
    if not 0 <= start <= stop:
        raise InputError(f"invalid code range [{start}, {stop})")
    players = tuple(str(k) for k in range(n))
    for code in range(start, stop):
        yield WeakSelection.from_code(n, code, players)
