"""
Unit tests for utility functions and settings.
"""
import unittest
from fractions import Fraction

import networkx as nx

from submod_lift.config import DEFAULT_SETTINGS, Settings, resolve
from submod_lift.utils import (bits, canonical_json, digest, edge_label, format_fraction,
                               full_mask, graph_edges, harmonic, jsonable_number, mask_of,
                               popcount, snap_fraction, submasks, to_fraction)


class TestBitmasks(unittest.TestCase):

    def test_bits_ascending(self):
        """Test element indices come out in ascending order."""
        self.assertEqual(list(bits(0b10110)), [1, 2, 4])
        self.assertEqual(list(bits(0)), [])

    def test_mask_roundtrip(self):
        """Test mask_of and popcount agree with bits."""
        mask = mask_of([0, 3, 5])
        self.assertEqual(mask, 0b101001)
        self.assertEqual(popcount(mask), 3)
        self.assertEqual(full_mask(4), 0b1111)

    def test_submasks_order(self):
        """Test submasks are enumerated in ascending numeric order."""
        self.assertEqual(list(submasks(0b101)), [0b000, 0b001, 0b100, 0b101])
        self.assertEqual(list(submasks(0)), [0])


class TestRationals(unittest.TestCase):

    def test_to_fraction(self):
        """Test parsing of ints, strings and floats."""
        self.assertEqual(to_fraction(3), Fraction(3))
        self.assertEqual(to_fraction("3/4"), Fraction(3, 4))
        self.assertEqual(to_fraction(0.5), Fraction(1, 2))
        self.assertEqual(to_fraction(Fraction(2, 3)), Fraction(2, 3))

    def test_to_fraction_rejects_garbage(self):
        """Test booleans and non-numeric strings are rejected."""
        with self.assertRaises(ValueError):
            to_fraction(True)
        with self.assertRaises(ValueError):
            to_fraction("three")

    def test_snap_and_format(self):
        """Test snapping a float and formatting the result."""
        snapped = snap_fraction(0.3333333333, 1000)
        self.assertEqual(snapped, Fraction(1, 3))
        self.assertEqual(format_fraction(snapped), "1/3")
        self.assertEqual(format_fraction(Fraction(4, 2)), "2")

    def test_harmonic(self):
        """Test harmonic numbers are exact."""
        self.assertEqual(harmonic(0), 0)
        self.assertEqual(harmonic(1), 1)
        self.assertEqual(harmonic(3), Fraction(11, 6))

    def test_jsonable_number(self):
        """Test report numbers keep integers and render fractions."""
        self.assertEqual(jsonable_number(Fraction(6, 3)), 2)
        self.assertEqual(jsonable_number(Fraction(1, 2)), "1/2")
        self.assertIsNone(jsonable_number(None))


class TestSerialization(unittest.TestCase):

    def test_canonical_json_sorted(self):
        """Test keys are sorted and fractions become strings."""
        text = canonical_json({"b": Fraction(1, 2), "a": [1, 2]})
        self.assertEqual(text, '{"a":[1,2],"b":"1/2"}')

    def test_digest_ignores_key_order(self):
        """Test digest depends only on content."""
        self.assertEqual(digest({"x": 1, "y": 2}), digest({"y": 2, "x": 1}))
        self.assertNotEqual(digest({"x": 1}), digest({"x": 2}))


class TestGraphs(unittest.TestCase):

    def test_multigraph_edges_keep_copies(self):
        """Test parallel edges are listed separately."""
        graph = nx.MultiGraph()
        graph.add_edge("a", "b")
        graph.add_edge("a", "b")
        self.assertEqual(graph_edges(graph), [("a", "b"), ("a", "b")])

    def test_edge_labels_unique(self):
        """Test duplicate edge labels get a position suffix."""
        seen = set()
        self.assertEqual(edge_label("a", "b", 0, seen), "a-b")
        self.assertEqual(edge_label("a", "b", 1, seen), "a-b#1")


class TestSettings(unittest.TestCase):

    def test_defaults(self):
        """Test default caps and tolerances."""
        self.assertEqual(DEFAULT_SETTINGS.brute_cap, 16)
        self.assertEqual(DEFAULT_SETTINGS.rational_denominator, 10 ** 6)
        self.assertIs(resolve(None), DEFAULT_SETTINGS)

    def test_overrides_ignore_none(self):
        """Test with_overrides skips None values."""
        settings = Settings().with_overrides(brute_cap=8, multi_cap=None)
        self.assertEqual(settings.brute_cap, 8)
        self.assertEqual(settings.multi_cap, 12)

    def test_from_env(self):
        """Test environment overrides and bad values."""
        with self.assertLogs("submod_lift.config", level="WARNING"):
            settings = Settings.from_env({"SUBMOD_LIFT_BRUTE_CAP": "10",
                                          "SUBMOD_LIFT_TOLERANCE": "1e-6",
                                          "SUBMOD_LIFT_MULTI_CAP": "many"})
        self.assertEqual(settings.brute_cap, 10)
        self.assertEqual(settings.tolerance, 1e-6)
        self.assertEqual(settings.multi_cap, 12)


if __name__ == '__main__':
    unittest.main()
