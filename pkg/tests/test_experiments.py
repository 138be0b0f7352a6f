import unittest

from src.core import InputError
from src.experiments import (
    EscapeLevel, EscapeTrace, exhaustive_verify, gap_escape_experiment, graded_escape_experiment,
    interior_gap_escape_experiment, random_sweep, sine_king_experiment,
)


class TestGapEscape(unittest.TestCase):
    def test_distances_halve(self):
        trace = gap_escape_experiment(10)
        self.assertEqual(trace.metrics, [2.0 ** -k for k in range(1, 11)])
        for rec in trace.levels:
            self.assertEqual(len(rec.kings), 1)
            self.assertEqual(rec.sample_size, 2 ** rec.level)

    def test_second_level(self):
        rec = gap_escape_experiment(2).levels[1]
        self.assertEqual(rec.king_coordinates, (0.75,))
        self.assertEqual(rec.metric, 0.25)

    def test_compact_control(self):
        trace = gap_escape_experiment(10, include_right_endpoint=True)
        self.assertEqual(trace.metrics, [0.0] * 10)
        self.assertTrue(all(rec.king_coordinates == (1.0,) for rec in trace.levels))

    def test_left_side(self):
        trace = gap_escape_experiment(6, side="left")
        self.assertEqual(trace.metrics, [2.0 ** -k for k in range(1, 7)])
        self.assertEqual(gap_escape_experiment(6, True, "left").metrics, [0.0] * 6)

    def test_single_level(self):
        self.assertEqual(gap_escape_experiment(1).metrics, [0.5])

    def test_guards(self):
        with self.assertRaises(InputError):
            gap_escape_experiment(0)
        with self.assertRaises(InputError):
            gap_escape_experiment(2, side="up")


class TestInteriorGapEscape(unittest.TestCase):
    def test_march_to_gap(self):
        trace = interior_gap_escape_experiment(8, 0.5)
        self.assertEqual(trace.metrics, [2.0 ** -k for k in range(1, 9)])
        for rec in trace.levels:
            self.assertTrue(all(x < 0.5 for x in rec.king_coordinates))

    def test_guard(self):
        with self.assertRaises(InputError):
            interior_gap_escape_experiment(3, 1.0)


class TestGradedEscape(unittest.TestCase):
    def test_block_indices(self):
        trace = graded_escape_experiment([1], 3, seed=0)
        self.assertEqual(trace.metrics, [0.0, 1.0, 2.0])
        self.assertEqual(trace.levels[1].kings, (1,))

    def test_blocks_of_three(self):
        trace = graded_escape_experiment([3], 5, seed=17)
        last = trace.levels[-1]
        self.assertEqual(last.sample_size, 15)
        self.assertTrue(all(b == 4.0 for b in last.king_coordinates))
        self.assertTrue(all(12 <= z < 15 for z in last.kings))

    def test_single_level_uses_inner_kings(self):
        trace = graded_escape_experiment([4], 1, seed=3)
        self.assertEqual(trace.metrics, [0.0])
        self.assertTrue(trace.levels[0].kings)

    def test_reproducible(self):
        a = graded_escape_experiment([2, 3], 6, seed=5)
        b = graded_escape_experiment([2, 3], 6, seed=5)
        self.assertEqual([r.kings for r in a.levels], [r.kings for r in b.levels])

    def test_guards(self):
        with self.assertRaises(InputError):
            graded_escape_experiment([], 3, 0)
        with self.assertRaises(InputError):
            graded_escape_experiment([0], 3, 0)


class TestEscapeTrace(unittest.TestCase):
    def test_rejects_unordered_levels(self):
        trace = EscapeTrace("gap-right", "distance_to_gap")
        trace.add(EscapeLevel(1, 2, 2, (1,), (0.5,), 0.5))
        with self.assertRaises(ValueError):
            trace.add(EscapeLevel(2, 2, 2, (1,), (0.5,), 0.5))
        with self.assertRaises(ValueError):
            trace.add(EscapeLevel(2, 4, 4, (), (), 0.0))


class TestSineKings(unittest.TestCase):
    def test_sixteen_points(self):
        report = sine_king_experiment(16)
        self.assertEqual(report.min_kings, (1.0,))
        self.assertEqual(report.max_kings, (0.0,))
        self.assertTrue(report.min_certificate.passed)
        self.assertTrue(report.max_certificate.passed)
        self.assertEqual(report.epsilon, 4 * report.delta)
        self.assertTrue(report.passed)

        self.assertEqual(report.control_certificate.verdict, "violation")
        self.assertTrue(report.control_straddles)

    def test_two_points(self):
        report = sine_king_experiment(2)
        self.assertEqual(report.min_kings, (1.0,))
        self.assertEqual(report.max_kings, (0.0,))
        self.assertTrue(report.passed)

    def test_refinement_keeps_kings(self):
        for n_points in (2, 16, 256):
            report = sine_king_experiment(n_points)
            self.assertTrue(report.passed, n_points)
        self.assertEqual(sine_king_experiment(256).control_certificate.verdict, "violation")

    def test_four_thousand_points(self):
        report = sine_king_experiment(4096)
        self.assertEqual(report.min_kings, (1.0,))
        self.assertEqual(report.max_kings, (0.0,))
        self.assertTrue(report.passed)
        self.assertEqual(report.control_certificate.verdict, "violation")
        self.assertTrue(report.control_straddles)

    def test_guard(self):
        with self.assertRaises(InputError):
            sine_king_experiment(1)


class TestVerification(unittest.TestCase):
    def test_counts_up_to_three(self):
        report = exhaustive_verify(3)
        self.assertEqual(report.total, 11)
        self.assertEqual(report.failures, [])

    def test_counts_up_to_five(self):
        report = exhaustive_verify(5)
        self.assertEqual(report.counts, {1: 1, 2: 2, 3: 8, 4: 64, 5: 1024})
        self.assertEqual(report.total, 1099)
        self.assertTrue(report.passed)
        self.assertEqual(report.summary(), "1099 tournaments, 0 failures")

    def test_counts_up_to_six(self):
        report = exhaustive_verify(6)
        self.assertEqual(report.counts[6], 32768)
        self.assertEqual(report.total, 33867)
        self.assertEqual(report.failures, [])

    def test_guard(self):
        with self.assertRaises(InputError):
            exhaustive_verify(0)
        with self.assertRaises(InputError):
            exhaustive_verify(7)

    def test_random_sweep(self):
        report = random_sweep([16, 64], 10, seed=1)
        self.assertEqual(report.total, 20)
        self.assertTrue(report.passed)


if __name__ == '__main__':
    unittest.main()
