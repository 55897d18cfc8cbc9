"""Unit tests for the command line interface."""
import io
import json
import os
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from submod_lift.cli import EXIT_ERROR, EXIT_OK, EXIT_PARSE, main
from submod_lift.harness import RunOptions, run
from submod_lift.parser import InstanceParser


class TestCLI(unittest.TestCase):

    def setUp(self):
        self.workdir = tempfile.mkdtemp()
        self.corpus = os.path.join(self.workdir, "vc.jsonl")

    def tearDown(self):
        shutil.rmtree(self.workdir)

    def call(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def generate(self, count=2):
        return self.call("gen", "--family", "vertex-cover", "--n", "4", "--k", "2",
                         "--count", str(count), "--seed", "1", "--out", self.corpus)

    def read_records(self, path):
        with open(path, encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    def test_gen_then_solve(self):
        """Test generating a corpus and solving it."""
        code, out, _ = self.generate()
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Generated 2 vertex-cover instances", out)

        report = os.path.join(self.workdir, "report.jsonl")
        code, _, err = self.call("solve", "--instance", self.corpus,
                                 "--algorithm", "ma-bb-round", "--out", report)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Wrote 2 records", err)

        records = self.read_records(report)
        self.assertEqual(len(records), 2)
        for record in records:
            self.assertEqual(record["algorithm"], "ma-bb-round")
            self.assertTrue(all(record["verdicts"].values()))
            self.assertNotIn("wall_time", record)

    def test_solve_to_stdout_with_timings(self):
        """Test printing records with wall times."""
        self.generate(count=1)

        code, out, _ = self.call("solve", "-i", self.corpus, "-a", "ma-bb-round", "--timings")

        self.assertEqual(code, EXIT_OK)
        self.assertIn("wall_time", json.loads(out.strip()))

    def test_lp_command(self):
        """Test the LP-only command."""
        self.generate(count=1)

        code, out, _ = self.call("lp", "--instance", self.corpus)

        self.assertEqual(code, EXIT_OK)
        record = json.loads(out.strip())
        self.assertEqual(record["algorithm"], "lp")
        self.assertIsNone(record["solution"])

    def test_verify_command(self):
        """Test property checks of generated instances."""
        self.generate(count=1)

        code, out, _ = self.call("verify", "--instance", self.corpus)

        self.assertEqual(code, EXIT_OK)
        checks = json.loads(out.strip())["checks"]
        self.assertEqual([c["property"] for c in checks],
                         ["multisubmodular", "monotone", "blocker"])
        self.assertTrue(all(c["holds"] for c in checks))

    def test_bench_command(self):
        """Test the benchmark summary and record file."""
        self.generate()
        records = os.path.join(self.workdir, "runs.jsonl")

        code, out, _ = self.call("bench", "--instance", self.corpus, "-a", "ma-bb-round",
                                 "-a", "lp", "--records", records)

        self.assertEqual(code, EXIT_OK)
        rows = [json.loads(line) for line in out.strip().splitlines()]
        self.assertEqual([row["algorithm"] for row in rows], ["ma-bb-round", "lp"])
        self.assertEqual(len(self.read_records(records)), 4)

    def test_seed_reaches_randomized_double_greedy(self):
        """Test --seed on solve and bench drives the randomized double greedy."""
        instance = {
            "name": "cycle-cut",
            "labels": ["a", "b", "c", "d"],
            "agents": 1,
            "oracle": {"kind": "cut", "edges": [["a", "b"], ["b", "c"], ["c", "d"], ["d", "a"]]},
            "constraint": {"kind": "free"},
            "task": {"kind": "max"},
        }
        with open(self.corpus, "w", encoding="utf-8") as f:
            f.write(json.dumps(instance) + "\n")

        code, out, _ = self.call("solve", "-i", self.corpus, "-a", "double-greedy-rand",
                                 "--seed", "3")
        self.assertEqual(code, EXIT_OK)
        expected = run(InstanceParser.parse_record(instance), "double-greedy-rand",
                       RunOptions(seed=3))
        self.assertEqual(json.loads(out.strip()), json.loads(expected.to_json()))

        code, out, _ = self.call("bench", "-i", self.corpus, "-a", "double-greedy-rand",
                                 "--seed", "3")
        self.assertEqual(code, EXIT_OK)
        row = json.loads(out.strip())
        self.assertEqual(row["algorithm"], "double-greedy-rand")
        self.assertEqual(row["runs"], 1)
        self.assertEqual(row["violations"], 0)

    def test_parse_error_exit_code(self):
        """Test that a malformed instance exits with the parse code."""
        with open(self.corpus, "w", encoding="utf-8") as f:
            f.write('{"labels": ["a"], "task": {"kind": "min"}, "oracle": {"kind": "nope"}}\n')

        code, _, err = self.call("solve", "-i", self.corpus, "-a", "lp")

        self.assertEqual(code, EXIT_PARSE)
        self.assertIn("line 1", err)
        self.assertIn("oracle.kind", err)

    def test_missing_file(self):
        """Test that a missing instance file is an error."""
        code, _, err = self.call("lp", "--instance", os.path.join(self.workdir, "absent.jsonl"))

        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("Error:", err)

    def test_incompatible_algorithm(self):
        """Test that a mismatched algorithm is reported with the valid ids."""
        self.generate(count=1)

        code, _, err = self.call("solve", "-i", self.corpus, "-a", "greedy")

        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("valid ids", err)

    def test_unknown_family_rejected_by_argparse(self):
        """Test that argparse refuses an unknown corpus family."""
        with self.assertRaises(SystemExit):
            self.call("gen", "--family", "knapsack", "--out", self.corpus)


if __name__ == '__main__':
    unittest.main()
