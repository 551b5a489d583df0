"""End-to-end checks of the contrakt command line. Usage: cli_test.py BINARY DATA_DIR"""

import json
import os
import subprocess
import sys
import tempfile
import unittest

BINARY = ""
DATA = ""


def run(*args, cwd=None, env=None):
    return subprocess.run([BINARY, *args], capture_output=True, text=True, cwd=cwd, env=env)


def data(name):
    return os.path.join(DATA, name)


class CliTest(unittest.TestCase):
    def test_measure_negated_laplacian_inf_is_zero(self):
        r = run("measure", "--matrix", data("neg_laplacian_path4.json"), "-p", "inf", "--oracle")
        self.assertEqual(r.returncode, 0, r.stderr)
        doc = json.loads(r.stdout)
        self.assertEqual(doc["result"]["value"], 0.0)
        self.assertLess(abs(doc["result"]["oracle"]["value"]), 1e-8)
        self.assertEqual(doc["manifest"]["params"]["p"], "inf")

    def test_sync_below_threshold_exits_one_with_witness(self):
        r = run("sync", "--system", data("sync_linear_weak.json"))
        self.assertEqual(r.returncode, 1, r.stderr)
        res = json.loads(r.stdout)["result"]
        self.assertFalse(res["certificate"]["certified"])
        self.assertIn("witness", res)
        self.assertGreater(res["witness"]["measure"], res["lambda2"])

    def test_sync_above_threshold_synchronizes(self):
        r = run("sync", "--system", data("sync_linear_strong.json"), "--x0", data("x0_6.json"))
        self.assertEqual(r.returncode, 0, r.stderr)
        sim = json.loads(r.stdout)["result"]["simulation"]
        self.assertTrue(sim["decays"])
        self.assertGreaterEqual(sim["rate_over_certified_c"], 0.95)

    def test_report_on_averaging_matches_essential_abscissa(self):
        r = run("run", "--config", "report_config.json", cwd=DATA)
        self.assertEqual(r.returncode, 0, r.stderr)
        res = json.loads(r.stdout)["result"]
        self.assertTrue(res["certificate"]["certified"])
        self.assertTrue(res["rate"]["within_tolerance"])
        self.assertLessEqual(res["rate"]["relative_error"], 0.05)
        self.assertLess(res["limit"]["error"], 1e-8)

    def test_unknown_param_is_input_error(self):
        r = run("measure", "--matrix", data("neg_laplacian_path4.json"), "--param", "bogus=1")
        self.assertEqual(r.returncode, 2)
        self.assertEqual(r.stdout, "")
        self.assertEqual(len(r.stderr.strip().splitlines()), 1)

    def test_unknown_config_key_is_input_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = os.path.join(tmp, "cfg.json")
            with open(cfg, "w") as f:
                json.dump({"command": "measure", "inputs": {"matrix": data("neg_laplacian_path4.json")},
                           "extra": 1}, f)
            r = run("run", "--config", cfg)
        self.assertEqual(r.returncode, 2)
        self.assertIn("unknown key 'extra'", r.stderr)

    def test_missing_file_is_input_error(self):
        r = run("measure", "--matrix", data("does_not_exist.json"))
        self.assertEqual(r.returncode, 2)
        self.assertEqual(len(r.stderr.strip().splitlines()), 1)

    def test_repeated_runs_are_byte_identical(self):
        outputs = []
        for threads in ("1", "3"):
            env = dict(os.environ, CONTRAKT_THREADS=threads)
            with tempfile.TemporaryDirectory() as tmp:
                out = os.path.join(tmp, "report.json")
                r = run("report", "--system", data("averaging_cycle5.json"), "--x0", data("x0_5.json"),
                        "--out", "report.json", "--seed", "3", cwd=tmp, env=env)
                self.assertEqual(r.returncode, 0, r.stderr)
                with open(out, "rb") as f:
                    report = f.read()
                with open(os.path.join(tmp, "report_rate.csv"), "rb") as f:
                    csv = f.read()
                outputs.append((report, csv))
        self.assertEqual(outputs[0], outputs[1])

    def test_simulate_writes_csv_and_gnuplot(self):
        with tempfile.TemporaryDirectory() as tmp:
            csv = os.path.join(tmp, "traj.csv")
            r = run("simulate", "--system", data("averaging_cycle5.json"), "--x0", data("x0_5.json"),
                    "--t-final", "2", "--out", csv, "--emit-gnuplot")
            self.assertEqual(r.returncode, 0, r.stderr)
            with open(csv) as f:
                lines = f.read().splitlines()
            self.assertEqual(lines[0], "t,x_0,x_1,x_2,x_3,x_4")
            self.assertEqual(len(lines), 202)
            self.assertTrue(os.path.exists(csv + ".gp"))


if __name__ == "__main__":
    BINARY = os.path.abspath(sys.argv[1])
    DATA = os.path.abspath(sys.argv[2])
    unittest.main(argv=sys.argv[:1], verbosity=2)
