from hypothesis import strategies as st

from src.core import WeakSelection, pair_count


def tournaments(min_players: int = 1, max_players: int = 9):
    """Arbitrary labeled tournaments as weak selections."""
    def build(n):
        return st.lists(st.booleans(), min_size=pair_count(n), max_size=pair_count(n)).map(
            lambda bits: WeakSelection(tuple(str(k) for k in range(n)), bits)
        )
    return st.integers(min_players, max_players).flatmap(build)


def three_cycle() -> WeakSelection:
    # 0 beats 1, 1 beats 2, 2 beats 0
    return WeakSelection.from_picks(3, [(0, 1, 1), (1, 2, 2), (0, 2, 0)])


def transitive(n: int) -> WeakSelection:
    # larger index beats smaller: every pair picks its lower member
    return WeakSelection.from_code(n, 0)
