"""Unit tests for algorithm dispatch, brute force and benchmarks."""
import unittest
from fractions import Fraction

from submod_lift.config import Settings
from submod_lift.exceptions import CapExceededError, InfeasibleError, PreconditionError
from submod_lift.harness import (ALGORITHMS, RunOptions, bench, brute_min_allocation,
                                 brute_optimum, compatible_algorithms, run)
from submod_lift.maximize import double_greedy
from submod_lift.parser import InstanceParser


def vertex_cover_problem():
    return InstanceParser.parse_record({
        "name": "path",
        "labels": ["a", "b", "c"],
        "agents": 2,
        "oracle": {"kind": "decomposable", "parts": [
            {"kind": "modular", "weights": [1, 2, 3]},
            {"kind": "modular", "weights": [3, 2, 1]},
        ]},
        "constraint": {"kind": "vertex-cover", "edges": [["a", "b"], ["b", "c"]]},
        "task": {"kind": "min"},
    })


def max_problem(task=None, constraint=None):
    return InstanceParser.parse_record({
        "name": "pick-two",
        "labels": ["a", "b", "c", "d"],
        "agents": 1,
        "oracle": {"kind": "modular", "weights": [3, 1, 2, 1]},
        "constraint": constraint or {"kind": "uniform", "b": 2},
        "task": task or {"kind": "max"},
    })


def cut_problem(seed=0):
    return InstanceParser.parse_record({
        "name": "path-cut",
        "labels": ["a", "b", "c", "d", "e"],
        "agents": 1,
        "oracle": {"kind": "cut", "edges": [["a", "b"], ["b", "c"], ["c", "d"], ["d", "e"],
                                            ["a", "e", 2]]},
        "constraint": {"kind": "free"},
        "task": {"kind": "max"},
        "seed": seed,
    })


class TestRun(unittest.TestCase):

    def test_bounded_blocker_run(self):
        """Test a covering run with re-verified verdicts."""
        record = run(vertex_cover_problem(), "ma-bb-round")

        self.assertTrue(record.ok)
        self.assertEqual(set(record.verdicts), {"feasible", "objective", "bound_ok"})
        self.assertEqual(record.brute_opt, Fraction(2))
        self.assertIsNotNone(record.lp_value)
        self.assertGreaterEqual(record.ratio, 1)
        self.assertIsNone(record.wall_time)
        self.assertNotIn("wall_time", record.to_dict())

    def test_timings(self):
        """Test that wall time is only reported on request."""
        record = run(vertex_cover_problem(), "ma-bb-round", RunOptions(timings=True))

        self.assertIsNotNone(record.wall_time)
        self.assertIn("wall_time", record.to_dict())

    def test_lp_run(self):
        """Test that an LP run reports a feasible point and no solution."""
        record = run(vertex_cover_problem(), "lp")

        self.assertIsNone(record.solution)
        self.assertTrue(record.ok)
        self.assertAlmostEqual(float(record.lp_value), 2.0, places=3)

    def test_greedy_run(self):
        """Test single-agent greedy under a uniform matroid."""
        record = run(max_problem(), "greedy")

        self.assertTrue(record.ok)
        self.assertEqual(record.objective, Fraction(5))
        self.assertEqual(record.solution, [["a", "c"]])
        self.assertEqual(record.ratio, Fraction(1))

    def test_robust_run(self):
        """Test robust maximization against the exhaustive optimum."""
        problem = max_problem(task={"kind": "robust", "tau": 1}, constraint={"kind": "free"})
        record = run(problem, "robust")

        self.assertTrue(record.ok)
        self.assertEqual(record.objective, Fraction(4))
        self.assertEqual(record.brute_opt, Fraction(4))

    def test_ring_run(self):
        """Test ring minimization where agents may share elements."""
        problem = InstanceParser.parse_record({
            "labels": ["a", "b"],
            "agents": 2,
            "oracle": {"kind": "modular", "weights": [1, -2]},
            "constraint": {"kind": "ring", "implications": [[[1, "b"], [0, "a"]]]},
            "task": {"kind": "ring"},
        })
        record = run(problem, "ring")

        self.assertTrue(record.ok)
        self.assertEqual(record.objective, Fraction(-3))
        self.assertEqual(record.solution, [["a", "b"], ["b"]])

    def test_bmatching_run(self):
        """Test allocation with unit caps."""
        problem = InstanceParser.parse_record({
            "labels": ["a", "b"],
            "agents": 2,
            "oracle": {"kind": "decomposable", "parts": [
                {"kind": "modular", "weights": [1, 5]},
                {"kind": "modular", "weights": [5, 1]},
            ]},
            "constraint": {"kind": "full"},
            "task": {"kind": "min"},
            "regions": [["a", "b"], ["a", "b"]],
            "caps": [1, 1],
        })
        record = run(problem, "msca-bmatching")

        self.assertTrue(record.ok)
        self.assertEqual(record.solution, [["a"], ["b"]])
        self.assertEqual(record.objective, Fraction(2))

    def test_randomized_double_greedy_seed(self):
        """Test the run seed overrides the instance seed of randomized double greedy."""
        problem = cut_problem(seed=7)
        f = problem.agent_oracles[0]
        labels = problem.ground.labels

        default = run(problem, "double-greedy-rand")
        expected = double_greedy(f, randomized=True, seed=7)
        self.assertEqual(default.solution, [[labels[v] for v in range(5) if expected >> v & 1]])
        self.assertIsNone(default.bound)
        self.assertTrue(default.ok)

        for seed in range(5):
            record = run(problem, "double-greedy-rand", RunOptions(seed=seed))
            expected = double_greedy(f, randomized=True, seed=seed)
            self.assertEqual(record.objective, f.value(expected))
            self.assertEqual(record.solution,
                             [[labels[v] for v in range(5) if expected >> v & 1]])
        self.assertEqual(problem.seed, 7)

    def test_deterministic_double_greedy_ignores_seed(self):
        """Test the deterministic pass keeps its third-of-optimum bound for every seed."""
        problem = cut_problem()
        records = [run(problem, "double-greedy", RunOptions(seed=seed)) for seed in range(3)]
        self.assertEqual(len({record.to_json() for record in records}), 1)
        self.assertEqual(records[0].bound, Fraction(1, 3))
        self.assertTrue(records[0].ok)

    def test_incompatible_algorithm(self):
        """Test that a mismatched algorithm lists the valid ids."""
        with self.assertRaises(PreconditionError) as cm:
            run(vertex_cover_problem(), "greedy")

        self.assertIn("valid ids", str(cm.exception))
        self.assertIn("ma-bb-round", str(cm.exception))

    def test_unknown_algorithm(self):
        """Test rejection of an unknown algorithm id."""
        with self.assertRaises(PreconditionError):
            run(vertex_cover_problem(), "simplex")

    def test_compatible_algorithms(self):
        """Test compatibility lists for minimization and maximization."""
        self.assertIn("mv-reduce", compatible_algorithms(vertex_cover_problem()))
        maximizing = compatible_algorithms(max_problem())
        self.assertIn("greedy", maximizing)
        self.assertIn("ma-greedy", maximizing)
        self.assertNotIn("double-greedy", maximizing)
        randomized = compatible_algorithms(cut_problem())
        self.assertIn("double-greedy", randomized)
        self.assertIn("double-greedy-rand", randomized)


class TestBruteForce(unittest.TestCase):

    def test_brute_optimum(self):
        """Test exhaustive optima for min, max and robust tasks."""
        self.assertEqual(brute_optimum(vertex_cover_problem()), Fraction(2))
        self.assertEqual(brute_optimum(max_problem()), Fraction(5))
        robust = max_problem(task={"kind": "robust", "tau": 1}, constraint={"kind": "free"})
        self.assertEqual(brute_optimum(robust), Fraction(4))

    def test_regions_make_infeasible(self):
        """Test that regions can rule out every allocation."""
        problem = vertex_cover_problem()

        with self.assertRaises(InfeasibleError):
            brute_min_allocation(problem.oracle, problem.family, [0b001, 0b001])

    def test_placement_cap(self):
        """Test that the (k+1)^n enumeration respects its cap."""
        problem = vertex_cover_problem()
        settings = Settings().with_overrides(robust_cap=10)

        with self.assertRaises(CapExceededError):
            brute_optimum(problem, settings)

    def test_run_skips_capped_brute_force(self):
        """Test that a capped brute force leaves brute_opt empty."""
        settings = Settings().with_overrides(robust_cap=10)
        record = run(vertex_cover_problem(), "ma-bb-round", settings=settings)

        self.assertIsNone(record.brute_opt)
        self.assertIsNone(record.ratio)


class TestBench(unittest.TestCase):

    def test_bench_summary(self):
        """Test that bench runs compatible pairs and summarises ratios."""
        problems = [vertex_cover_problem(), max_problem()]
        result = bench(problems, ["ma-bb-round", "greedy", "lp"])

        self.assertEqual(len(result.records), 3)
        self.assertEqual(result.violations, [])
        keys = [(r.digest, r.algorithm) for r in result.records]
        self.assertEqual(keys, sorted(keys))
        rows = {row.algorithm: row.to_dict() for row in result.summary}
        self.assertEqual(rows["greedy"]["runs"], 1)
        self.assertEqual(rows["greedy"]["mean_ratio"], 1.0)

    def test_parallel_matches_serial(self):
        """Test that workers do not change the record order."""
        problems = [vertex_cover_problem(), max_problem()]
        serial = bench(problems, ["ma-bb-round", "greedy"])
        parallel = bench(problems, ["ma-bb-round", "greedy"], workers=2)

        self.assertEqual([r.to_json() for r in serial.records],
                         [r.to_json() for r in parallel.records])

    def test_empty_corpus(self):
        """Test that an empty corpus gives empty rows."""
        result = bench([])

        self.assertEqual(result.records, [])
        self.assertEqual(len(result.summary), len(ALGORITHMS))
        self.assertTrue(all(row.runs == 0 for row in result.summary))
        self.assertIsNone(result.summary[0].to_dict()["mean_ratio"])

    def test_unknown_algorithm(self):
        """Test that bench rejects unknown ids before running anything."""
        with self.assertRaises(PreconditionError):
            bench([vertex_cover_problem()], ["nope"])


if __name__ == '__main__':
    unittest.main()
