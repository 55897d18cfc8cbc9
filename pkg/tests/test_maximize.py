"""
Unit tests for greedy and robust maximization.
"""
import unittest
from fractions import Fraction

import networkx as nx
import numpy as np

from submod_lift.exceptions import PreconditionError, StageError
from submod_lift.harness import brute_max_allocation, brute_robust_max
from submod_lift.matroids import (FullSetFamily, MatroidIntersection, PowerSetFamily,
                                  make_partition, make_uniform)
from submod_lift.maximize import (check_tuple, double_greedy, greedy_max, ma_maximize,
                                  robust_maximize, robust_value)
from submod_lift.models import GroundSet, SetTuple
from submod_lift.oracles import make_coverage, make_cut_function, make_decomposable, make_modular


class TestSingleAgent(unittest.TestCase):

    def setUp(self):
        self.ground = GroundSet.of_size(4)
        self.f = make_coverage(self.ground, [[1, 2, 3], [1, 2], [3, 4], [5]])

    def test_greedy_uniform(self):
        """Test greedy under a cardinality limit."""
        trace = greedy_max(self.f, make_uniform(self.ground, 2))
        self.assertEqual(trace.subset, 0b0101)
        self.assertEqual(trace.value, 4)
        self.assertEqual([v for v, _ in trace.picks], [0, 2])
        self.assertEqual(trace.guarantee, Fraction(1, 2))

    def test_greedy_ratio_against_enumeration(self):
        """Test greedy reaches half the optimum over a partition matroid."""
        matroid = make_partition(self.ground, [0b0011, 0b1100], [1, 1])
        trace = greedy_max(self.f, matroid)
        best = max(self.f.value(mask) for mask in range(16) if matroid.is_independent(mask))
        self.assertGreaterEqual(trace.value, best * trace.guarantee)

    def test_greedy_ground_mismatch(self):
        """Test the constraint must share the oracle's ground set."""
        with self.assertRaises(PreconditionError):
            greedy_max(self.f, make_uniform(GroundSet.of_size(3), 1))

    def test_double_greedy(self):
        """Test double greedy on a cut function reaches a third of the optimum."""
        f = make_cut_function(nx.path_graph(4))
        optimum = max(f.value(mask) for mask in range(16))
        self.assertGreaterEqual(f.value(double_greedy(f)) * 3, optimum)
        chosen = double_greedy(f, randomized=True, seed=5)
        self.assertEqual(chosen, double_greedy(f, randomized=True, seed=5))


class TestMultiAgent(unittest.TestCase):

    def setUp(self):
        self.ground = GroundSet.of_size(3)
        self.g = make_decomposable([make_coverage(self.ground, [[1], [1, 2], [3]]),
                                    make_coverage(self.ground, [[2], [3], [1, 3]])])

    def test_welfare_free(self):
        """Test greedy welfare without a constraint on the union."""
        solution = ma_maximize(self.g, PowerSetFamily(self.ground))
        self.assertTrue(solution.assignment.is_disjoint)
        _, best = brute_max_allocation(self.g, PowerSetFamily(self.ground))
        self.assertGreaterEqual(solution.total, best * solution.trace["guarantee"])
        self.assertEqual(solution.total, sum(solution.costs))

    def test_welfare_uniform(self):
        """Test a cardinality limit on the allocated elements."""
        family = make_uniform(self.ground, 2)
        solution = ma_maximize(self.g, family)
        self.assertLessEqual(bin(solution.assignment.union).count("1"), 2)
        self.assertEqual(solution.trace["p"], 1)
        self.assertEqual(solution.trace["guarantee"], Fraction(1, 2))
        _, best = brute_max_allocation(self.g, family)
        self.assertGreaterEqual(solution.total * 2, best)

    def test_full_allocation(self):
        """Test F = {V} assigns every element."""
        g = make_decomposable([make_modular(self.ground, [3, 1, 1]),
                               make_modular(self.ground, [1, 2, 2])])
        solution = ma_maximize(g, FullSetFamily(self.ground))
        self.assertEqual(solution.assignment.masks, (0b001, 0b110))
        self.assertEqual(solution.total, 7)

    def test_agent_constraints(self):
        """Test each agent respects its own matroid."""
        agents = [make_uniform(self.ground, 1), make_uniform(self.ground, 1)]
        solution = ma_maximize(self.g, PowerSetFamily(self.ground), agents)
        for mask in solution.assignment:
            self.assertLessEqual(bin(mask).count("1"), 1)

    def test_greedy_ratio_battery(self):
        """Test greedy welfare against enumeration over random matroid constraints."""
        rng = np.random.default_rng(17)
        for trial in range(40):
            k = int(rng.integers(1, 4))
            n = int(rng.integers(2, 10 // k + 1))
            ground = GroundSet.of_size(n)
            g = make_decomposable([
                make_coverage(ground, [[int(x) for x in rng.integers(0, 6, size=2)]
                                       for _ in range(n)],
                              {item: int(w) for item, w in enumerate(rng.integers(1, 4, size=6))})
                for _ in range(k)])
            uniform = make_uniform(ground, int(rng.integers(1, n + 1)))
            half = (1 << (n // 2)) - 1
            partition = make_partition(ground, [half, ground.full & ~half], [1, 1])
            shape = trial % 4
            agents = None
            if shape == 0:
                family, single = PowerSetFamily(ground), True
            elif shape == 1:
                family, single = uniform, True
            elif shape == 2:
                family, single = MatroidIntersection([uniform, partition]), False
            else:
                family, single = partition, False
                agents = [make_uniform(ground, int(rng.integers(0, n + 1))) for _ in range(k)]
            solution = ma_maximize(g, family, agents)
            _, best = brute_max_allocation(g, family, agents)
            p = solution.trace["p"]
            self.assertEqual(solution.trace["guarantee"], Fraction(1, p + 1))
            if single:
                self.assertEqual(solution.trace["guarantee"], Fraction(1, 2))
            self.assertGreaterEqual(solution.total, best * solution.trace["guarantee"])
            self.assertGreaterEqual(solution.total * (p + 2), best)

    def test_check_tuple(self):
        """Test overlapping or infeasible tuples are rejected."""
        with self.assertRaises(StageError):
            check_tuple(SetTuple(self.ground, (0b001, 0b001)), PowerSetFamily(self.ground), None)
        with self.assertRaises(StageError):
            check_tuple(SetTuple(self.ground, (0b001, 0b010)), make_uniform(self.ground, 1), None)
        with self.assertRaises(StageError):
            check_tuple(SetTuple(self.ground, (0b011, 0b000)), PowerSetFamily(self.ground),
                        [make_uniform(self.ground, 1), None])


class TestRobust(unittest.TestCase):

    def setUp(self):
        self.ground = GroundSet.of_size(3)
        self.g = make_decomposable([make_modular(self.ground, [4, 2, 1]),
                                    make_modular(self.ground, [1, 3, 2])])

    def test_robust_value(self):
        """Test removals take away the most valuable lifted elements."""
        self.assertEqual(robust_value(self.g, (0b001, 0b110), 0), 9)
        self.assertEqual(robust_value(self.g, (0b001, 0b110), 1), 5)
        self.assertEqual(robust_value(self.g, (0b001, 0b110), 2), 2)
        with self.assertRaises(PreconditionError):
            robust_value(self.g, (0b001, 0b110), -1)

    def test_robust_matches_enumeration(self):
        """Test the exhaustive solver finds the robust optimum."""
        family = make_uniform(self.ground, 2)
        for tau in range(3):
            solution = robust_maximize(self.g, family, None, tau)
            _, best = brute_robust_max(self.g, family, None, tau)
            self.assertEqual(solution.trace["robust_value"], best)

    def test_robust_value_decreases_with_tau(self):
        """Test the robust optimum never grows as more removals are allowed."""
        family = PowerSetFamily(self.ground)
        values = [robust_maximize(self.g, family, None, tau).trace["robust_value"]
                  for tau in range(4)]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_tau_range(self):
        """Test tau must lie between 0 and nk."""
        with self.assertRaises(PreconditionError):
            robust_maximize(self.g, PowerSetFamily(self.ground), None, 7)


if __name__ == '__main__':
    unittest.main()
