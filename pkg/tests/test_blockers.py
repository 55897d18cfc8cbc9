"""
Unit tests for clutters, blocking families and separation.
"""
import unittest
from fractions import Fraction

import networkx as nx

from submod_lift.exceptions import ArityMismatchError, PreconditionError
from submod_lift.blockers import (CardinalityFamily, Clutter, EdgeCoverFamily, HittingSetFamily,
                                  StPathFamily, VertexCoverFamily, compute_blocker,
                                  lift_separation, prune_to_minimal, pruned_network_family,
                                  separate, upward_closure_membership, verify_blocker,
                                  verify_lehman)
from submod_lift.models import GroundSet


def triangle() -> nx.Graph:
    return nx.Graph([(0, 1), (1, 2), (0, 2)])


class TestClutter(unittest.TestCase):

    def test_nested_members_rejected(self):
        """Test a clutter may not contain nested sets."""
        with self.assertRaises(PreconditionError):
            Clutter(GroundSet.of_size(3), [0b001, 0b011])

    def test_from_sets_keeps_minimal(self):
        """Test from_sets drops supersets and duplicates."""
        clutter = Clutter.from_sets(GroundSet.of_size(3), [0b011, 0b001, 0b110, 0b001])
        self.assertEqual(set(clutter.members), {0b001, 0b110})

    def test_compute_blocker(self):
        """Test minimal transversals and the double-blocker identity."""
        ground = GroundSet.of_size(3)
        clutter = Clutter(ground, [0b011, 0b110])
        self.assertEqual(compute_blocker(clutter), Clutter(ground, [0b010, 0b101]))
        self.assertTrue(verify_lehman(clutter))

    def test_blocker_of_empty_clutter(self):
        """Test the blocker of the empty clutter is {∅}."""
        ground = GroundSet.of_size(2)
        self.assertEqual(compute_blocker(Clutter(ground, [])).members, (0,))
        self.assertEqual(len(compute_blocker(Clutter(ground, [0]))), 0)

    def test_upward_closure(self):
        """Test membership in the upward closure."""
        clutter = Clutter(GroundSet.of_size(3), [0b011])
        self.assertTrue(upward_closure_membership(clutter, 0b111))
        self.assertFalse(upward_closure_membership(clutter, 0b101))


class TestFamilies(unittest.TestCase):

    def test_vertex_cover(self):
        """Test the triangle's vertex covers and their blockers."""
        family = VertexCoverFamily(triangle())
        self.assertEqual(family.beta_bound, 2)
        self.assertTrue(family.is_member(0b011))
        self.assertFalse(family.is_member(0b001))
        self.assertTrue(verify_blocker(family))

    def test_vertex_cover_separation(self):
        """Test a point missing one edge is separated by that edge."""
        family = VertexCoverFamily(triangle())
        result = separate(family, [Fraction(1), Fraction(1, 2), Fraction(0)])
        self.assertFalse(result.feasible)
        self.assertEqual(result.violated, 0b110)
        self.assertEqual(result.load, Fraction(1, 2))
        self.assertTrue(separate(family, [Fraction(1, 2)] * 3))

    def test_separation_input_checks(self):
        """Test points of the wrong length or with negative entries."""
        family = VertexCoverFamily(triangle())
        with self.assertRaises(ArityMismatchError):
            separate(family, [1, 1])
        with self.assertRaises(PreconditionError):
            separate(family, [1, -1, 1])

    def test_edge_cover(self):
        """Test vertex stars block edge covers of a path."""
        family = EdgeCoverFamily(nx.Graph([("a", "b"), ("b", "c")]))
        self.assertEqual(family.ground.size, 2)
        self.assertTrue(family.is_member(0b11))
        self.assertFalse(family.is_member(0b01))
        self.assertTrue(verify_blocker(family))

    def test_hitting_set(self):
        """Test hitting sets of explicit hyperedges."""
        family = HittingSetFamily(GroundSet.of_size(4), [0b0011, 0b1100, 0b0111])
        self.assertEqual(family.beta_bound, 2)
        self.assertTrue(family.is_member(0b0101))
        self.assertFalse(family.is_member(0b0011))
        self.assertTrue(verify_blocker(family))

    def test_cardinality(self):
        """Test {S : |S| >= m} and its fast separation."""
        ground = GroundSet.of_size(3)
        family = CardinalityFamily(ground, 2)
        self.assertEqual(family.beta_bound, 2)
        self.assertTrue(family.is_member(0b101))
        self.assertFalse(family.is_member(0b100))
        self.assertEqual(family.min_load([Fraction(1, 2), 0, Fraction(1, 4)]),
                         (Fraction(1, 4), 0b110))
        self.assertTrue(verify_blocker(family))
        self.assertTrue(separate(CardinalityFamily(ground, 0), [0, 0, 0]))
        with self.assertRaises(PreconditionError):
            CardinalityFamily(ground, 4)

    def test_st_path(self):
        """Test s-t path families separate through minimum cuts."""
        graph = nx.Graph([("s", "a"), ("a", "t"), ("s", "t")])
        family = StPathFamily(graph, "s", "t")
        position = {frozenset(edge): e for e, edge in enumerate(family.edges)}
        sa, st, at = (position[frozenset(pair)] for pair in (("s", "a"), ("s", "t"), ("a", "t")))
        z = [Fraction(0)] * 3
        z[sa], z[st], z[at] = Fraction(1, 2), Fraction(1, 4), Fraction(1)
        result = separate(family, z)
        self.assertFalse(result.feasible)
        self.assertEqual(result.load, Fraction(3, 4))
        self.assertEqual(result.violated, 1 << sa | 1 << st)
        self.assertTrue(family.is_member(1 << st))
        self.assertFalse(family.is_member(1 << sa))
        self.assertTrue(verify_blocker(family))
        self.assertEqual(family.beta_bound, 2)

    def test_pruned_network(self):
        """Test pruned-network blockers are (tau+1)-subsets of stars."""
        graph = nx.Graph([("c", "x"), ("c", "y"), ("c", "z"), ("x", "y")])
        family = pruned_network_family(graph, 1)
        self.assertEqual(family.kind, "pruned-network")
        self.assertEqual(family.beta_bound, 2)
        self.assertTrue(all(bin(B).count("1") == 2 for B in family.blockers()))
        self.assertEqual(len(family.blockers()), 5)
        with self.assertRaises(PreconditionError):
            pruned_network_family(graph, -1)

    def test_prune_to_minimal(self):
        """Test pruning drops elements in ascending order."""
        family = VertexCoverFamily(triangle())
        self.assertEqual(prune_to_minimal(0b111, family), 0b110)
        with self.assertRaises(PreconditionError):
            prune_to_minimal(0b001, family)


class TestLiftedSeparation(unittest.TestCase):

    def test_lifted_family(self):
        """Test lifted blockers hold every agent copy of a blocker."""
        family = lift_separation(VertexCoverFamily(nx.Graph([("a", "b")])), 2)
        self.assertEqual(family.beta_bound, 4)
        self.assertEqual(family.blockers().members, (0b1111,))
        load, blocker = family.min_load([Fraction(1, 4), 0, Fraction(1, 4), 0])
        self.assertEqual(load, Fraction(1, 2))
        self.assertEqual(blocker, 0b1111)
        self.assertTrue(family.is_member(0b0100))
        self.assertFalse(family.is_member(0))
        with self.assertRaises(ArityMismatchError):
            family.project([0, 0])


if __name__ == '__main__':
    unittest.main()
