import json
import os
import shutil
import subprocess
import sys
import tempfile
import unittest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "app.main", *args],
        cwd=REPO_ROOT,
        capture_output=True,
        text=True,
        env={**os.environ, "COLUMNS": "200"},
    )


class TestCli(unittest.TestCase):
    """End-to-end: files and exit codes only."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def write_json(self, name, doc):
        with open(self.path(name), "w", encoding="utf-8") as f:
            json.dump(doc, f)
        return self.path(name)

    # ── compute ──────────────────────────────────────────────────────────────

    def test_compute_fixture(self):
        out = self.path("x.json")
        result = run_cli("compute", "--fixture", "ex41", "--m", "1", "--method", "wmwg", "--out", out)
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertIn("-0.015936-0.019648i", result.stdout)
        with open(out, encoding="utf-8") as f:
            doc = json.load(f)
        self.assertEqual((doc["rows"], doc["cols"]), (6, 5))
        re, im = doc["data"][0]
        self.assertAlmostEqual(re, -0.015936, delta=5e-7)
        self.assertAlmostEqual(im, -0.019648, delta=5e-7)

    def test_compute_inapplicable_representation(self):
        result = run_cli("compute", "--fixture", "ex41", "--m", "3", "--method", "wmwg:CoreK")
        self.assertEqual(result.returncode, 2)
        self.assertIn("k >= m+1", result.stderr)

    def test_compute_nonexistent_group_inverse(self):
        a = self.write_json("n.json", {"rows": 2, "cols": 2, "data": [[0, 0], [1, 0], [0, 0], [0, 0]]})
        result = run_cli("compute", "--matrix", a, "--method", "group")
        self.assertEqual(result.returncode, 3)

    def test_compute_weighted_needs_weight(self):
        a = self.write_json("a.json", {"rows": 1, "cols": 1, "data": [[2, 0]]})
        result = run_cli("compute", "--matrix", a, "--method", "w-drazin")
        self.assertEqual(result.returncode, 2)

    def test_compute_from_files(self):
        a = self.write_json("a.json", {"rows": 1, "cols": 1, "data": [[2, 0]]})
        out = self.path("pinv.json")
        result = run_cli("compute", "--matrix", a, "--method", "pinv", "--out", out)
        self.assertEqual(result.returncode, 0, result.stderr)
        with open(out, encoding="utf-8") as f:
            self.assertEqual(json.load(f)["data"], [[0.5, 0.0]])

    # ── I/O failures ─────────────────────────────────────────────────────────

    def test_malformed_file(self):
        bad = self.path("bad.json")
        with open(bad, "w", encoding="utf-8") as f:
            f.write("{not json")
        result = run_cli("compute", "--matrix", bad, "--method", "pinv")
        self.assertEqual(result.returncode, 4)
        self.assertIn("malformed JSON", result.stderr)

    def test_shape_mismatch_file(self):
        bad = self.write_json("bad.json", {"rows": 2, "cols": 2, "data": [[1, 0]]})
        result = run_cli("compute", "--matrix", bad, "--method", "pinv")
        self.assertEqual(result.returncode, 4)
        self.assertIn("shape mismatch", result.stderr)

    def test_missing_file(self):
        result = run_cli("compute", "--matrix", self.path("absent.json"), "--method", "pinv")
        self.assertEqual(result.returncode, 4)

    # ── table ────────────────────────────────────────────────────────────────

    def test_table_csv(self):
        out = self.path("table.csv")
        result = run_cli("table", "--fixture", "ex41", "--m", "1,2,3", "--out", out)
        self.assertEqual(result.returncode, 0, result.stderr)
        with open(out, encoding="utf-8", newline="") as f:
            lines = f.read().split("\n")
        self.assertEqual(lines[0], "method,m=1,m=2,m=3")
        rows = [line.split(",") for line in lines[1:] if line]
        self.assertEqual(len(rows), 13)
        cells = [(r[0], m, value) for r in rows for m, value in zip((1, 2, 3), r[1:])]
        self.assertEqual(len(cells), 39)
        self.assertEqual([c for c in cells if c[2] == "NA"], [("CoreK", 3, "NA")])
        for _, _, value in cells:
            if value != "NA":
                self.assertLess(float(value), 1e-10)

    def test_table_json(self):
        out = self.path("table.json")
        result = run_cli("table", "--fixture", "ex41", "--m", "2", "--out", out, "--workers", "2")
        self.assertEqual(result.returncode, 0, result.stderr)
        with open(out, encoding="utf-8") as f:
            doc = json.load(f)
        self.assertEqual(doc["k"], 3)
        self.assertIn("checksum", doc)

    def test_table_seeded_is_deterministic(self):
        args = ("table", "--seed", "77", "--q", "5", "--n", "3", "--index", "2", "--m", "1,2")
        first, second = run_cli(*args), run_cli(*args)
        self.assertEqual(first.returncode, 0, first.stderr)
        self.assertEqual(first.stdout, second.stdout)

    # ── verify ───────────────────────────────────────────────────────────────

    def test_verify_fixture_passes(self):
        out = self.path("residuals.json")
        result = run_cli("verify", "--fixture", "ex41", "--m", "2", "--tol", "1e-10", "--out", out)
        self.assertEqual(result.returncode, 0, result.stderr)
        with open(out, encoding="utf-8") as f:
            self.assertTrue(json.load(f)["passed"])

    def test_verify_impossible_tolerance(self):
        result = run_cli("verify", "--fixture", "ex41", "--m", "2", "--tol", "1e-20")
        self.assertEqual(result.returncode, 1)
        self.assertIn("Failed", result.stderr)

    def test_verify_zero_weight(self):
        a = self.write_json("a.json", {"rows": 1, "cols": 2, "data": [[1, 0], [0, 1]]})
        w = self.write_json("zero.json", {"rows": 2, "cols": 1, "data": [[0, 0], [0, 0]]})
        result = run_cli("verify", "--matrix", a, "--weight", w, "--m", "1")
        self.assertEqual(result.returncode, 2)

    # ── random / show ────────────────────────────────────────────────────────

    def test_random_then_verify(self):
        result = run_cli("random", "--seed", "3", "--q", "4", "--n", "6", "--index", "2", "--out-dir", self.tmp)
        self.assertEqual(result.returncode, 0, result.stderr)
        result = run_cli(
            "verify", "--matrix", self.path("A.json"), "--weight", self.path("W.json"),
            "--m", "2", "--tol", "1e-8", "--rank-tol", "1e-9",
        )
        self.assertEqual(result.returncode, 0, result.stderr)

    def test_random_rejects_impossible_index(self):
        result = run_cli("random", "--seed", "3", "--q", "2", "--n", "3", "--index", "0", "--out-dir", self.tmp)
        self.assertEqual(result.returncode, 2)

    def test_show(self):
        result = run_cli("show", "--fixture", "ex41", "--which", "w")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertIn("1+1i", result.stdout)


if __name__ == "__main__":
    unittest.main()
