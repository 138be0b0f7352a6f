import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from src.constructions import derive_seed, random_tournament
from src.core import (
    InputError, WeakSelection, arrow, common_k_set, compose, dominance, enumerate_tournaments, is_king,
    k_set, k_set_via_composition, king_report, landau_king, out_degree, relabel, restrict,
)
from tests.strategies import three_cycle, tournaments, transitive


class TestArrow(unittest.TestCase):
    def test_reflexive(self):
        sel = three_cycle()
        self.assertTrue(arrow(sel, 0, 0))

    def test_orientation(self):
        sel = WeakSelection.from_picks(2, [(0, 1, 1)])
        self.assertTrue(arrow(sel, 0, 1))
        self.assertFalse(arrow(sel, 1, 0))

    def test_index_out_of_range(self):
        with self.assertRaises(InputError):
            arrow(three_cycle(), 0, 3)
        with self.assertRaises(InputError):
            arrow(three_cycle(), -1, 0)

    @given(tournaments())
    def test_totality(self, sel):
        rel = dominance(sel)
        for a in range(sel.n):
            self.assertTrue(rel.arrow(a, a))
            for b in range(sel.n):
                if a != b:
                    self.assertNotEqual(arrow(sel, a, b), arrow(sel, b, a))
                    self.assertEqual(rel.arrow(a, b), arrow(sel, a, b))

    def test_choice_is_member_of_pair(self):
        sel = random_tournament(7, 3)
        for i in range(7):
            for j in range(i + 1, 7):
                self.assertIn(sel.choice(i, j), (i, j))
                self.assertEqual(sel.choice(i, j), sel.choice(j, i))
        with self.assertRaises(InputError):
            sel.choice(2, 2)


class TestOutDegree(unittest.TestCase):
    def test_three_cycle(self):
        self.assertEqual(out_degree(three_cycle(), 0), 1)

    def test_transitive(self):
        self.assertEqual(out_degree(transitive(4), 3), 3)

    def test_single_player(self):
        self.assertEqual(out_degree(transitive(1), 0), 0)


class TestLandau(unittest.TestCase):
    def test_single_player(self):
        self.assertEqual(landau_king(transitive(1)), 0)

    def test_transitive(self):
        self.assertEqual(landau_king(transitive(4)), 3)

    def test_three_cycle_tie_break(self):
        self.assertEqual(landau_king(three_cycle()), 0)

    def test_empty(self):
        with self.assertRaises(InputError):
            landau_king(WeakSelection((), []))

    @given(tournaments(max_players=12))
    def test_landau_is_king(self, sel):
        self.assertIn(landau_king(sel), king_report(sel).kings)

    def test_landau_on_larger_random(self):
        for seed in range(20):
            sel = random_tournament(64, seed)
            self.assertIn(landau_king(sel), king_report(sel, "composition").kings)

    def test_landau_ten_thousand_per_size(self):
        for n in (16, 64, 256):
            for i in range(10000):
                sel = random_tournament(n, derive_seed(7, n, i))
                m = sel.matrix
                # z is a king iff row z of F o F is all true
                self.assertTrue(compose(m[[landau_king(sel)]], m).all(), (n, i))


class TestKSets(unittest.TestCase):
    def test_three_cycle(self):
        self.assertEqual(k_set(three_cycle(), 0), {0, 1, 2})
        self.assertEqual(k_set_via_composition(three_cycle(), 1), {0, 1, 2})

    def test_transitive(self):
        self.assertEqual(k_set(transitive(3), 2), {2})

    def test_single_player(self):
        self.assertEqual(k_set_via_composition(transitive(1), 0), {0})

    def test_out_of_range(self):
        with self.assertRaises(InputError):
            k_set(three_cycle(), 5)
        with self.assertRaises(InputError):
            k_set_via_composition(three_cycle(), 5)

    @given(tournaments())
    def test_contains_target(self, sel):
        for x in range(sel.n):
            self.assertIn(x, k_set(sel, x))

    def test_direct_and_composition_agree_exhaustively(self):
        for n in range(1, 6):
            for sel in enumerate_tournaments(n):
                for x in range(n):
                    self.assertEqual(k_set(sel, x), k_set_via_composition(sel, x))

    def test_direct_and_composition_agree_at_scale(self):
        for seed in range(5):
            sel = random_tournament(128, seed)
            direct = king_report(sel, "direct")
            composed = king_report(sel, "composition")
            self.assertTrue(np.array_equal(direct.reach, composed.reach))
            self.assertEqual(direct.kings, composed.kings)
            for x in (0, 63, 127):
                self.assertEqual(k_set(sel, x), k_set_via_composition(sel, x))

    def test_composition_oracle_thousand_instances(self):
        for seed in range(1000):
            sel = random_tournament(128, derive_seed(2024, seed))
            x = seed % 128
            self.assertEqual(k_set(sel, x), k_set_via_composition(sel, x), seed)
            # every target at once through the boolean product
            self.assertTrue(np.array_equal(king_report(sel, "direct").reach, compose(sel.matrix, sel.matrix)), seed)


class TestKingReport(unittest.TestCase):
    def test_three_cycle(self):
        self.assertEqual(king_report(three_cycle()).kings, {0, 1, 2})

    def test_transitive(self):
        self.assertEqual(king_report(transitive(4)).kings, {3})

    def test_two_players(self):
        sel = WeakSelection.from_picks(2, [(0, 1, 0)])
        self.assertEqual(king_report(sel).kings, {1})

    def test_unknown_method(self):
        with self.assertRaises(InputError):
            king_report(three_cycle(), "bogus")

    @given(tournaments())
    def test_kings_are_intersection_of_k_sets(self, sel):
        report = king_report(sel)
        self.assertTrue(report.kings)
        expected = frozenset(range(sel.n))
        for ks in report.k_sets.values():
            expected &= ks
        self.assertEqual(report.kings, expected)

    @given(tournaments())
    def test_witnesses_are_paths(self, sel):
        report = king_report(sel)
        for z, y, x in report.witness_triples():
            self.assertTrue(arrow(sel, z, y))
            self.assertTrue(arrow(sel, y, x))
        self.assertEqual(len(report.witness_triples()), len(report.kings) * sel.n)

    def test_kings_never_empty_up_to_six(self):
        for n in range(1, 7):
            for sel in enumerate_tournaments(n):
                self.assertTrue(king_report(sel).kings)


class TestIsKing(unittest.TestCase):
    def test_transitive(self):
        ok, witnesses = is_king(transitive(4), 3)
        self.assertTrue(ok)
        self.assertEqual(set(witnesses), {0, 1, 2, 3})
        self.assertEqual(is_king(transitive(4), 0), (False, {}))

    def test_single_player(self):
        self.assertEqual(is_king(transitive(1), 0), (True, {0: 0}))

    @given(tournaments())
    def test_matches_report(self, sel):
        kings = king_report(sel).kings
        for z in range(sel.n):
            ok, witnesses = is_king(sel, z)
            self.assertEqual(ok, z in kings)
            for x, y in witnesses.items():
                self.assertTrue(arrow(sel, z, y) and arrow(sel, y, x))


class TestRestrict(unittest.TestCase):
    def test_pair_winner(self):
        sel = random_tournament(6, 11)
        sub, index = restrict(sel, {1, 4})
        # the unpicked member beats the picked one
        picked = sel.choice(1, 4)
        winner = 4 if picked == 1 else 1
        self.assertEqual({index[z] for z in king_report(sub).kings}, {winner})

    def test_three_cycle_pair(self):
        sub, index = restrict(three_cycle(), {0, 1})
        self.assertEqual({index[z] for z in king_report(sub).kings}, {0})

    def test_full_set_is_identity(self):
        sel = random_tournament(7, 5)
        sub, index = restrict(sel, range(7))
        self.assertEqual(sub, sel)
        self.assertEqual(index, tuple(range(7)))

    def test_identifiers_preserved(self):
        sel = WeakSelection(("a", "b", "c"), [True, False, True])
        sub, index = restrict(sel, [2, 0])
        self.assertEqual(sub.players, ("a", "c"))
        self.assertEqual(index, (0, 2))

    def test_errors(self):
        with self.assertRaises(InputError):
            restrict(three_cycle(), [])
        with self.assertRaises(InputError):
            restrict(three_cycle(), [0, 7])

    @given(tournaments(min_players=2), st.data())
    def test_monotonicity(self, sel, data):
        subset = data.draw(st.sets(st.integers(0, sel.n - 1), min_size=1))
        sub, index = restrict(sel, subset)
        for new_x, x in enumerate(index):
            lifted = {index[z] for z in k_set(sub, new_x)}
            self.assertTrue(lifted <= k_set(sel, x))

    def test_monotonicity_at_scale(self):
        rng = np.random.default_rng(99)
        for trial in range(1000):
            n = int(rng.integers(2, 65))
            sel = random_tournament(n, trial)
            subset = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist()
            sub, index = restrict(sel, subset)
            new_x = int(rng.integers(0, sub.n))
            lifted = {index[z] for z in k_set(sub, new_x)}
            self.assertTrue(lifted <= k_set(sel, index[new_x]))


class TestCommonKSet(unittest.TestCase):
    @given(tournaments(), st.data())
    def test_finite_intersection_property(self, sel, data):
        targets = data.draw(st.sets(st.integers(0, sel.n - 1), min_size=1))
        self.assertTrue(common_k_set(sel, targets))

    def test_all_targets_gives_kings(self):
        sel = random_tournament(9, 4)
        self.assertEqual(common_k_set(sel, range(9)), king_report(sel).kings)

    def test_empty_targets(self):
        with self.assertRaises(InputError):
            common_k_set(three_cycle(), [])


class TestRelabel(unittest.TestCase):
    @given(tournaments(), st.data())
    def test_king_set_equivariant(self, sel, data):
        perm = data.draw(st.permutations(list(range(sel.n))))
        moved = relabel(sel, perm)
        self.assertEqual(king_report(moved).kings, {perm[z] for z in king_report(sel).kings})
        self.assertIn(landau_king(moved), king_report(moved).kings)

    def test_identifiers_travel(self):
        sel = transitive(3)
        moved = relabel(sel, [2, 0, 1])
        self.assertEqual(moved.players, ("1", "2", "0"))
        # old player 2 (the king) now sits at index 1
        self.assertEqual(king_report(moved).kings, {1})

    def test_not_a_permutation(self):
        with self.assertRaises(InputError):
            relabel(three_cycle(), [0, 0, 1])


class TestEnumeration(unittest.TestCase):
    def test_counts(self):
        self.assertEqual(sum(1 for _ in enumerate_tournaments(2)), 2)
        self.assertEqual(sum(1 for _ in enumerate_tournaments(4)), 64)
        self.assertEqual(sum(1 for _ in enumerate_tournaments(6)), 32768)

    def test_each_once_in_order(self):
        codes = [sel.code for sel in enumerate_tournaments(4)]
        self.assertEqual(codes, list(range(64)))
        self.assertEqual(len({sel for sel in enumerate_tournaments(4)}), 64)

    def test_partitioned_ranges_cover(self):
        first = list(enumerate_tournaments(4, 0, 20))
        rest = list(enumerate_tournaments(4, 20))
        self.assertEqual(first + rest, list(enumerate_tournaments(4)))

    def test_guard(self):
        with self.assertRaises(InputError):
            next(enumerate_tournaments(0))
        with self.assertRaises(InputError):
            next(enumerate_tournaments(7))
        with self.assertRaises(TypeError):
            enumerate_tournaments(7, limit=7)


class TestWeakSelection(unittest.TestCase):
    def test_from_picks_rejects_bad_input(self):
        with self.assertRaises(InputError):
            WeakSelection.from_picks(2, [(0, 1, 2)])
        with self.assertRaises(InputError):
            WeakSelection.from_picks(3, [(0, 1, 0), (0, 2, 0)])
        with self.assertRaises(InputError):
            WeakSelection.from_picks(2, [(0, 1, 0), (1, 0, 0)])

    def test_identifiers_distinct_after_coercion(self):
        with self.assertRaises(InputError):
            WeakSelection((1, "1"), [True])
        self.assertEqual(WeakSelection((1, 2), [True]).players, ("1", "2"))

    def test_wrong_bit_count(self):
        with self.assertRaises(InputError):
            WeakSelection(("0", "1", "2"), [True])

    def test_immutable(self):
        sel = three_cycle()
        with self.assertRaises(ValueError):
            sel.bits[0] = False
        with self.assertRaises(ValueError):
            sel.matrix[0, 1] = False


if __name__ == '__main__':
    unittest.main()
