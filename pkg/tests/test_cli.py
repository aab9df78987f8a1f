import csv
import io
import json
import os
import shutil
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from unittest import TestCase

from priority_mm1 import cli

BASE_FLAGS = ["--lambda1", "1", "--lambda2", "1", "--mu", "4"]


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        status = cli.main(list(argv))
    return status, out.getvalue(), err.getvalue()


class CliTestCase(TestCase):
    def setUp(self):
        self.folder = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.folder, ignore_errors=True)

    def path(self, name):
        return os.path.join(self.folder, name)


class AnalyzeTest(CliTestCase):
    def test_json(self):
        status, out, _ = run("analyze", *BASE_FLAGS, "--format", "json")
        self.assertEqual(cli.EXIT_OK, status)
        payload = json.loads(out)
        self.assertEqual("analytic", payload["engine"])
        self.assertEqual({"lambda1": 1.0, "lambda2": 1.0, "mu": 4.0}, payload["params"])
        metrics = payload["metrics"]
        self.assertEqual(0.5, metrics["p000"])
        self.assertEqual(0.416666667, metrics["L1"])
        self.assertEqual(0.583333333, metrics["L2_conservation"])
        self.assertEqual(0.2, metrics["F02_at_1"])
        self.assertEqual(0.296296296, metrics["f_double_prime_at_1"])
        self.assertEqual(1.38666667, payload["diagnostics"]["F02_prime_paper"])
        self.assertEqual(0.5, payload["diagnostics"]["rho"])

    def test_text_is_default(self):
        status, out, _ = run("analyze", *BASE_FLAGS)
        self.assertEqual(cli.EXIT_OK, status)
        self.assertTrue(out.startswith("analytic: lambda1=1, lambda2=1, mu=4"))
        self.assertIn("[analytic]", out)

    def test_unstable(self):
        status, out, err = run("analyze", "--lambda1", "3", "--lambda2", "2", "--mu", "4")
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertEqual("", out)
        self.assertIn("rho = 1.25", err)

    def test_missing_parameter(self):
        status, _, err = run("analyze", "--lambda1", "1", "--mu", "4")
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("--lambda2", err)

    def test_negative_rate(self):
        status, _, err = run("analyze", "--lambda1", "-1", "--lambda2", "1", "--mu", "4")
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("nonnegative", err)

    def test_output_file(self):
        target = self.path("analytic.json")
        status, out, _ = run("analyze", *BASE_FLAGS, "--format", "json", "--output", target)
        self.assertEqual(cli.EXIT_OK, status)
        self.assertEqual("", out)
        with open(target, encoding="utf-8") as file:
            self.assertEqual("analytic", json.load(file)["engine"])

    def test_output_into_missing_folder(self):
        target = self.path(os.path.join("absent", "analytic.json"))
        status, _, err = run("analyze", *BASE_FLAGS, "--output", target)
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("analytic.json", err)


class CtmcTest(CliTestCase):
    def test_json(self):
        status, out, _ = run("ctmc", *BASE_FLAGS, "--format", "json")
        self.assertEqual(cli.EXIT_OK, status)
        payload = json.loads(out)
        self.assertAlmostEqual(0.5, payload["metrics"]["p000"], places=8)
        self.assertAlmostEqual(5 / 12, payload["metrics"]["L1"], places=8)
        self.assertLess(payload["diagnostics"]["tail_mass"], 1e-12)
        self.assertEqual("direct", payload["diagnostics"]["method"])
        self.assertNotIn("states", payload["metrics"])

    def test_cap_below_two(self):
        status, _, err = run("ctmc", *BASE_FLAGS, "--n1-max", "1")
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("at least 2", err)

    def test_state_budget(self):
        status, _, err = run("ctmc", *BASE_FLAGS, "--n1-max", "4", "--n2-max", "4", "--max-states", "60")
        self.assertEqual(cli.EXIT_TRUNCATION, status)
        self.assertIn("state budget", err)

    def test_no_auto(self):
        status, out, _ = run(
            "ctmc", *BASE_FLAGS, "--n1-max", "4", "--n2-max", "4", "--no-auto", "--format", "json"
        )
        self.assertEqual(cli.EXIT_OK, status)
        self.assertEqual(4, json.loads(out)["diagnostics"]["n1_max"])


class SimulateTest(CliTestCase):
    FLAGS = ["--reps", "2", "--horizon", "1000", "--seed", "9", "--format", "json"]

    def test_deterministic(self):
        first = run("simulate", *BASE_FLAGS, *self.FLAGS)
        second = run("simulate", *BASE_FLAGS, *self.FLAGS)
        self.assertEqual(cli.EXIT_OK, first[0])
        self.assertEqual(first[1], second[1])

    def test_json_rows(self):
        _, out, _ = run("simulate", *BASE_FLAGS, *self.FLAGS)
        payload = json.loads(out)
        self.assertEqual(
            ["p_free", "p_class1", "p_class2", "L1", "L2", "W1", "W2"], list(payload["metrics"])
        )
        self.assertEqual(2, payload["metrics"]["L1"]["replications"])
        self.assertEqual(9, payload["diagnostics"]["seed"])
        self.assertFalse(payload["diagnostics"]["unstable"])

    def test_trace(self):
        target = self.path("trace.jsonl")
        status, _, _ = run("simulate", *BASE_FLAGS, *self.FLAGS, "--trace", target)
        self.assertEqual(cli.EXIT_OK, status)
        with open(target, encoding="utf-8") as file:
            records = [json.loads(line) for line in file]
        self.assertEqual("arrival", records[0]["event"])

    def test_trace_into_missing_folder(self):
        target = self.path(os.path.join("absent", "trace.jsonl"))
        status, out, err = run("simulate", *BASE_FLAGS, *self.FLAGS, "--trace", target)
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertEqual("", out)
        self.assertIn("No such file or directory", err)

    def test_bad_config(self):
        status, _, err = run("simulate", *BASE_FLAGS, "--reps", "0")
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("replications", err)


class ValidateTest(CliTestCase):
    def test_without_simulation(self):
        status, out, _ = run("validate", *BASE_FLAGS, "--no-sim", "--format", "json")
        self.assertEqual(cli.EXIT_OK, status)
        payload = json.loads(out)
        self.assertEqual("PASS", payload["diagnostics"]["overall"])
        self.assertFalse(payload["diagnostics"]["simulated"])
        self.assertTrue(payload["metrics"]["L1"]["passed"])
        fidelity = payload["diagnostics"]["paper_fidelity"]
        self.assertEqual(6, len(fidelity))
        self.assertEqual("DIFFERS", fidelity[0]["verdict"])
        self.assertGreaterEqual(payload["diagnostics"]["differs"], 2)

    def test_tolerance_failure(self):
        status, out, _ = run("validate", *BASE_FLAGS, "--no-sim", "--tol-boundary", "1e-15", "--format", "json")
        self.assertEqual(cli.EXIT_TOLERANCE, status)
        self.assertEqual("FAIL", json.loads(out)["diagnostics"]["overall"])

    def test_with_simulation(self):
        status, out, _ = run(
            "validate", *BASE_FLAGS, "--reps", "3", "--horizon", "2000", "--format", "json"
        )
        self.assertIn(status, (cli.EXIT_OK, cli.EXIT_TOLERANCE))
        diagnostics = json.loads(out)["diagnostics"]
        self.assertTrue(diagnostics["simulated"])
        self.assertAlmostEqual(1 - 0.05 / 7, diagnostics["sim_confidence_per_metric"], places=9)

    def test_unstable(self):
        status, _, err = run("validate", "--lambda1", "3", "--lambda2", "2", "--mu", "4", "--no-sim")
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("rho = 1.25", err)


class SweepTest(CliTestCase):
    def test_l1_increases_with_lambda2(self):
        status, out, _ = run(
            "sweep", "--lambda1", "1", "--lambda2", "0.5", "1.0", "1.5", "--mu", "4"
        )
        self.assertEqual(cli.EXIT_OK, status)
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual(3, len(rows))
        l1 = [float(row["L1"]) for row in rows]
        self.assertEqual(sorted(l1), l1)
        self.assertTrue(all(row["stable"] == "true" for row in rows))

    def test_unstable_point(self):
        status, out, _ = run("sweep", "--lambda1", "1", "--lambda2", "1", "3.5", "--mu", "4")
        self.assertEqual(cli.EXIT_OK, status)
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual("false", rows[1]["stable"])
        self.assertEqual("", rows[1]["L1"])

    def test_ctmc_engine(self):
        status, out, _ = run(
            "sweep", "--lambda1", "1", "--lambda2", "1", "--mu", "4", "--engine", "ctmc", "--format", "json"
        )
        self.assertEqual(cli.EXIT_OK, status)
        metrics = json.loads(out)["metrics"]
        self.assertAlmostEqual(7 / 12, metrics["L2"], places=8)
        self.assertEqual("ctmc", metrics["engine"])

    def test_empty_grid(self):
        status, _, err = run("sweep", "--mu", "4")
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("empty parameter grid", err)


class DistTest(CliTestCase):
    def test_csv(self):
        status, out, _ = run("dist", *BASE_FLAGS)
        self.assertEqual(cli.EXIT_OK, status)
        rows = list(csv.DictReader(io.StringIO(out)))
        self.assertEqual("0", rows[0]["n"])
        self.assertAlmostEqual(0.5, float(rows[0]["P(N1+N2=n)"]), places=8)
        total = sum(float(row["P(N1+N2=n)"]) for row in rows)
        self.assertAlmostEqual(1.0, total, places=9)
        self.assertLess(len(rows), 65)


class ConfigTest(CliTestCase):
    def write_config(self, text):
        target = self.path("run.cfg")
        with open(target, "w", encoding="utf-8") as file:
            file.write(text)
        return target

    def test_values_from_file(self):
        config = self.write_config("# base point\nlambda1 = 1\nlambda2 = 1\nmu = 4\nformat = json\n")
        status, out, _ = run("analyze", "--config", config)
        self.assertEqual(cli.EXIT_OK, status)
        self.assertEqual(0.416666667, json.loads(out)["metrics"]["L1"])

    def test_command_line_wins(self):
        config = self.write_config("lambda1=1\nlambda2=1\nmu=4\nformat=json\n")
        status, out, _ = run("analyze", "--config", config, "--mu", "5")
        self.assertEqual(cli.EXIT_OK, status)
        self.assertEqual(5.0, json.loads(out)["params"]["mu"])

    def test_flags_and_lists(self):
        config = self.write_config("lambda1 = 1\nlambda2 = 0.5, 1.0\nmu = 4\nno-auto = true\n")
        self.assertEqual(
            {"lambda1": "1", "lambda2": "0.5, 1.0", "mu": "4", "no_auto": "true"},
            cli.read_config(config),
        )
        status, _, _ = run("sweep", "--config", config)
        self.assertEqual(cli.EXIT_INPUT, status)

    def test_boolean_option(self):
        config = self.write_config("lambda1 = 1\nlambda2 = 0.5, 1.0\nmu = 4\nauto = false\n")
        status, out, _ = run("sweep", "--config", config)
        self.assertEqual(cli.EXIT_OK, status)
        self.assertEqual(2, len(list(csv.DictReader(io.StringIO(out)))))

    def test_unknown_key(self):
        config = self.write_config("lambda3 = 1\n")
        status, _, err = run("analyze", "--config", config)
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("lambda3", err)

    def test_bad_line(self):
        config = self.write_config("lambda1\n")
        status, _, err = run("analyze", "--config", config)
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("key=value", err)

    def test_missing_file(self):
        status, _, err = run("analyze", "--config", self.path("absent.cfg"))
        self.assertEqual(cli.EXIT_INPUT, status)
        self.assertIn("cannot read config file", err)
