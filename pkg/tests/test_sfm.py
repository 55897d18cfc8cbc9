"""
Unit tests for the Lovász extension and submodular minimization.
"""
import unittest
from fractions import Fraction

import networkx as nx
import numpy as np

from submod_lift.config import Settings
from submod_lift.exceptions import CapExceededError, ConvergenceError, PreconditionError
from submod_lift.harness import brute_ring_min
from submod_lift.lifting import LiftedGroundSet
from submod_lift.models import GroundSet
from submod_lift.oracles import (SubmodularOracle, make_concave_of_cardinality,
                                 make_cut_function, make_decomposable, make_modular,
                                 make_mv_sum, make_quadratic, make_table, subtract_modular,
                                 validate_submodular)
from submod_lift.sfm import (RingFamily, blocker_load, cover_bound_holds, dual_feasible,
                             level_set_decomposition, lovasz, lovasz_float, sfm_brute,
                             sfm_min_norm, sfm_minimize, sfm_mv_ring, sfm_ring)


def random_submodular(rng, n: int) -> SubmodularOracle:
    """Weighted cut plus a concave cardinality term minus a modular term."""
    graph = nx.empty_graph(n)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.5:
                graph.add_edge(u, v, weight=int(rng.integers(1, 4)))
    cut = make_cut_function(graph)
    steps = sorted((int(x) for x in rng.integers(0, 4, size=n)), reverse=True)
    table = [0]
    for step in steps:
        table.append(table[-1] + step)
    concave = make_concave_of_cardinality(cut.ground, table)
    mixed = SubmodularOracle(cut.ground, lambda mask: cut.value(mask) + concave.value(mask),
                             name="cut-plus-concave", normalized=True, nonnegative=True)
    return subtract_modular(mixed, [int(x) for x in rng.integers(0, n + 3, size=n)])


def random_point(rng, n: int):
    return [Fraction(int(x), 8) for x in rng.integers(0, 9, size=n)]


def random_ring(rng, ground: GroundSet) -> RingFamily:
    size = ground.size
    implications = [(int(u), int(w)) for u, w in rng.integers(0, size, size=(size // 2, 2))
                    if u != w]
    lower = int(rng.integers(0, 1 << size)) & int(rng.integers(0, 1 << size))
    changed = True
    while changed:
        changed = False
        for u, w in implications:
            if lower >> u & 1 and not lower >> w & 1:
                lower |= 1 << w
                changed = True
    upper = lower | int(rng.integers(0, 1 << size))
    return RingFamily(ground, implications, lower=lower, upper=upper)


class TestLovasz(unittest.TestCase):

    def setUp(self):
        self.f = make_concave_of_cardinality(GroundSet.of_size(3), [0, 3, 5, 6])

    def test_indicator_points(self):
        """Test f^L agrees with f on indicator vectors."""
        for mask in range(8):
            z = [1 if mask >> v & 1 else 0 for v in range(3)]
            self.assertEqual(lovasz(self.f, z).value, self.f.value(mask))

    def test_positive_homogeneity(self):
        """Test f^L(t z) = t f^L(z) for a normalized f."""
        z = [Fraction(1, 2), Fraction(1, 3), Fraction(1)]
        base = lovasz(self.f, z).value
        for t in (Fraction(1, 4), Fraction(2, 3)):
            scaled = [t * x for x in z]
            self.assertEqual(lovasz(self.f, scaled).value, t * base)

    def test_level_sets_rebuild_point(self):
        """Test the level-set columns sum back to z."""
        z = [Fraction(1, 2), Fraction(1, 3), Fraction(1)]
        columns = level_set_decomposition(self.f, z)
        rebuilt = [sum((w for S, w in columns.items() if S >> v & 1), Fraction(0))
                   for v in range(3)]
        self.assertEqual(rebuilt, z)
        self.assertEqual(sum(w * self.f.value(S) for S, w in columns.items()),
                         lovasz(self.f, z).value)

    def test_float_extension(self):
        """Test the float extension matches the exact one."""
        z = [0.5, 0.25, 1.0]
        value, gradient = lovasz_float(self.f, np.array(z))
        self.assertAlmostEqual(value, float(lovasz(self.f, [Fraction(1, 2), Fraction(1, 4), 1]).value))
        self.assertAlmostEqual(float(gradient.sum()), 6.0)

    def test_convex_on_random_submodular(self):
        """Test midpoint convexity of f^L for random submodular functions."""
        rng = np.random.default_rng(41)
        for _ in range(40):
            n = int(rng.integers(2, 7))
            f = random_submodular(rng, n)
            x, y = random_point(rng, n), random_point(rng, n)
            mid = [(a + b) / 2 for a, b in zip(x, y)]
            self.assertLessEqual(lovasz(f, mid).value,
                                 (lovasz(f, x).value + lovasz(f, y).value) / 2)

    def test_monotone_extension(self):
        """Test f^L is coordinatewise nondecreasing when f is monotone."""
        rng = np.random.default_rng(43)
        for _ in range(40):
            n = int(rng.integers(2, 7))
            steps = sorted((int(x) for x in rng.integers(0, 5, size=n)), reverse=True)
            table = [sum(steps[:size]) for size in range(n + 1)]
            weights = [int(x) for x in rng.integers(0, 3, size=n)]
            concave = make_concave_of_cardinality(GroundSet.of_size(n), table)
            modular = make_modular(concave.ground, weights)
            f = SubmodularOracle(concave.ground,
                                 lambda mask: concave.value(mask) + modular.value(mask),
                                 name="monotone", normalized=True, monotone=True)
            low = random_point(rng, n)
            high = [min(Fraction(1), a + b) for a, b in zip(low, random_point(rng, n))]
            self.assertLessEqual(lovasz(f, low).value, lovasz(f, high).value)

    def test_supermodular_breaks_convexity(self):
        """Test a planted supermodular function fails the midpoint check."""
        square = make_table(GroundSet.of_size(2), [0, 1, 1, 4])
        self.assertFalse(validate_submodular(square))
        x, y = [1, 0], [0, 1]
        mid = [Fraction(1, 2), Fraction(1, 2)]
        self.assertGreater(lovasz(square, mid).value,
                           (lovasz(square, x).value + lovasz(square, y).value) / 2)

    def test_box_check(self):
        """Test points outside the unit box are rejected."""
        with self.assertRaises(PreconditionError):
            lovasz(self.f, [2, 0, 0])

    def test_cover_bound(self):
        """Test f(Z) is at most the cost of a fractional cover of Z."""
        columns = {0b011: Fraction(1, 2), 0b110: Fraction(1, 2), 0b101: Fraction(1, 2)}
        self.assertTrue(cover_bound_holds(self.f, 0b111, columns))
        with self.assertRaises(PreconditionError):
            cover_bound_holds(self.f, 0b111, {0b011: 1})


class TestMinimization(unittest.TestCase):

    def test_brute_minimizer(self):
        """Test f(S) = 2|S| - |S|^2 on three elements is minimized by V."""
        f = make_concave_of_cardinality(GroundSet.of_size(3), [0, 1, 0, -3])
        self.assertEqual(sfm_brute(f), (0b111, Fraction(-3)))
        self.assertEqual(sfm_min_norm(f), (0b111, Fraction(-3)))

    def test_brute_tie_break(self):
        """Test ties go to the smallest bitmask."""
        f = make_modular(GroundSet.of_size(2), [0, 0])
        self.assertEqual(sfm_brute(f), (0, 0))

    def test_min_norm_matches_brute(self):
        """Test min-norm values match enumeration on shifted cut functions."""
        rng = np.random.default_rng(11)
        for _ in range(8):
            graph = nx.gnp_random_graph(5, 0.6, seed=int(rng.integers(0, 1000)))
            graph.add_nodes_from(range(5))
            cut = make_cut_function(graph)
            f = subtract_modular(cut, [int(x) for x in rng.integers(0, 4, size=5)])
            mask, value = sfm_min_norm(f)
            self.assertEqual(value, sfm_brute(f)[1])
            self.assertEqual(f.value(mask), value)

    def test_min_norm_battery(self):
        """Test min-norm values match enumeration on random submodular functions."""
        rng = np.random.default_rng(2024)
        for _ in range(60):
            n = int(rng.integers(2, 13))
            f = random_submodular(rng, n)
            mask, value = sfm_min_norm(f)
            self.assertEqual(value, sfm_brute(f)[1])
            self.assertEqual(f.value(mask), value)

    def test_min_norm_convergence_error(self):
        """Test an exhausted iteration budget raises with a bound."""
        f = make_concave_of_cardinality(GroundSet.of_size(3), [0, 1, 0, -3])
        with self.assertRaises(ConvergenceError) as context:
            sfm_min_norm(f, Settings(min_norm_max_iter=0))
        self.assertIsNotNone(context.exception.best_bound)

    def test_sfm_minimize_dispatch(self):
        """Test the dispatcher uses min-norm above the brute-force cap."""
        f = make_concave_of_cardinality(GroundSet.of_size(3), [0, 1, 0, -3])
        self.assertEqual(sfm_minimize(f, Settings(brute_cap=2)), (0b111, Fraction(-3)))

    def test_brute_cap(self):
        """Test enumeration refuses large ground sets."""
        f = make_modular(GroundSet.of_size(3), [1, 1, 1])
        with self.assertRaises(CapExceededError):
            sfm_brute(f, Settings(sfm_brute_cap=2))


class TestRings(unittest.TestCase):

    def setUp(self):
        self.ground = GroundSet.of_size(3)
        self.f = make_modular(self.ground, [-1, 2, -3])

    def test_members(self):
        """Test members respect bounds and implications."""
        ring = RingFamily(self.ground, [(0, 1)], lower=0b100)
        self.assertEqual(list(ring.members()), [0b100, 0b110, 0b111])
        self.assertTrue(ring.contains(0b111))
        self.assertFalse(ring.contains(0b101))

    def test_ring_minimum(self):
        """Test minimization over a ring family."""
        self.assertEqual(sfm_ring(self.f, RingFamily(self.ground, [(0, 1)])),
                         (0b100, Fraction(-3)))
        forced = RingFamily(self.ground, [(0, 1)], lower=0b011)
        self.assertEqual(sfm_ring(self.f, forced), (0b111, Fraction(-2)))

    def test_ring_cap(self):
        """Test rings with too many candidates are refused."""
        with self.assertRaises(CapExceededError):
            sfm_ring(self.f, RingFamily(self.ground), Settings(ring_cap=4))

    def test_multivariate_ring(self):
        """Test ring minimization of a tuple function over the lifted ground set."""
        ground = GroundSet.of_size(2)
        g = make_decomposable([make_modular(ground, [-1, 1]), make_modular(ground, [1, -2])])
        lifted = LiftedGroundSet(ground, 2)
        ring = RingFamily(lifted.ground, [(lifted.index(1, 1), lifted.index(0, 1))])
        assignment, value = sfm_mv_ring(g, ring)
        self.assertEqual(value, Fraction(-2))
        self.assertEqual(assignment.masks, (0b11, 0b10))

    def test_multivariate_ring_battery(self):
        """Test ring minimization of tuple functions matches a full scan."""
        rng = np.random.default_rng(5)
        for _ in range(40):
            k = int(rng.integers(1, 4))
            n = int(rng.integers(1, 10 // k + 1))
            ground = GroundSet.of_size(n)
            parts = [make_modular(ground, [int(x) for x in rng.integers(-3, 4, size=n)])
                     for _ in range(k)]
            upper = rng.integers(-2, 3, size=(k, k))
            matrix = [[0] * k for _ in range(k)]
            for i in range(k):
                matrix[i][i] = -abs(int(upper[i, i]))
                for j in range(i + 1, k):
                    matrix[i][j] = int(upper[i, j])
                    matrix[j][i] = -int(upper[i, j]) - int(rng.integers(0, 2))
            g = make_mv_sum(make_decomposable(parts), make_quadratic(ground, matrix))
            lifted = LiftedGroundSet(ground, k)
            ring = random_ring(rng, lifted.ground)
            assignment, value = sfm_mv_ring(g, ring)
            _, best = brute_ring_min(g, ring)
            self.assertEqual(value, best)
            self.assertEqual(g.value(assignment.masks), value)
            self.assertTrue(ring.contains(lifted.lift(assignment)))


class TestDual(unittest.TestCase):

    def test_blocker_load(self):
        """Test loads add the weights of blockers through each element."""
        self.assertEqual(blocker_load(3, {0b011: Fraction(1, 2), 0b110: 1}),
                         [Fraction(1, 2), Fraction(3, 2), Fraction(1)])
        with self.assertRaises(PreconditionError):
            blocker_load(2, {0b01: -1})

    def test_dual_feasibility(self):
        """Test packing edge weights under a unit modular cost."""
        f = make_modular(GroundSet.of_size(3), [1, 1, 1])
        half = {0b011: Fraction(1, 2), 0b110: Fraction(1, 2), 0b101: Fraction(1, 2)}
        self.assertTrue(dual_feasible(f, half))
        heavy = {0b011: 1, 0b110: 1, 0b101: 1}
        result = dual_feasible(f, heavy)
        self.assertFalse(result.feasible)
        self.assertEqual(result.slack, -3)


if __name__ == '__main__':
    unittest.main()
