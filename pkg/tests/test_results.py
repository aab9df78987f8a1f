import math
from unittest import TestCase

from priority_mm1.model import ModelParams
from priority_mm1.results import (
    TOLERANCE_ABSOLUTE,
    VERDICT_DIFFERS,
    VERDICT_MATCHES,
    EngineFailure,
    FidelityRow,
    MetricRow,
    ValidationReport,
    deviations,
)
from priority_mm1.sim import SimEstimate


class DeviationsTest(TestCase):
    def test_relative(self):
        absolute, relative = deviations(2.0, 2.5)
        self.assertEqual(0.5, absolute)
        self.assertEqual(0.25, relative)

    def test_zero_reference(self):
        self.assertEqual((1e-9, 1e-9), deviations(0.0, 1e-9))


class MetricRowTest(TestCase):
    def test_relative_tolerance(self):
        self.assertTrue(MetricRow("L1", 1.0, 1.0 + 5e-7, 1e-6).passed)
        self.assertFalse(MetricRow("L1", 1.0, 1.0 + 5e-6, 1e-6).passed)

    def test_absolute_tolerance(self):
        row = MetricRow("p000", 0.5, 0.5 + 5e-9, 1e-8, TOLERANCE_ABSOLUTE)
        self.assertTrue(row.within_tolerance)

    def test_sim_not_run(self):
        self.assertIsNone(MetricRow("L1", 1.0, 1.0, 1e-6).sim_covers)

    def test_sim_without_interval(self):
        row = MetricRow("L1", 1.0, 1.0, 1e-6, sim=SimEstimate(1.1, None, 1))
        self.assertIsNone(row.sim_covers)
        self.assertTrue(row.passed)

    def test_sim_covers(self):
        row = MetricRow("L1", 1.0, 1.0, 1e-6, sim=SimEstimate(1.02, 0.05, 10))
        self.assertTrue(row.sim_covers)
        self.assertTrue(row.passed)

    def test_sim_misses(self):
        row = MetricRow("L1", 1.0, 1.0, 1e-6, sim=SimEstimate(1.2, 0.05, 10))
        self.assertFalse(row.sim_covers)
        self.assertFalse(row.passed)

    def test_nan_reference_not_judged_by_sim(self):
        row = MetricRow("W2", math.nan, math.nan, 1e-6, sim=SimEstimate(1.0, 0.1, 10))
        self.assertIsNone(row.sim_covers)


class FidelityRowTest(TestCase):
    def test_verdicts(self):
        params = ModelParams(1.0, 1.0, 4.0)
        self.assertEqual(VERDICT_DIFFERS, FidelityRow("L2", params, 4.104166667, 7 / 12, 1e-6).verdict)
        self.assertEqual(VERDICT_MATCHES, FidelityRow("L2", params, 7 / 12, 7 / 12, 1e-6).verdict)


class ValidationReportTest(TestCase):
    def test_empty_report_passes(self):
        self.assertTrue(ValidationReport().passed)

    def test_fidelity_does_not_fail_report(self):
        report = ValidationReport()
        report.add_row(MetricRow("L1", 1.0, 1.0, 1e-6))
        report.add_fidelity(FidelityRow("L2", None, 4.0, 0.5, 1e-6))
        self.assertTrue(report.passed)
        self.assertEqual({"rows": 1, "failed": 0, "differs": 1}, report.totals)

    def test_failed_rows(self):
        report = ValidationReport()
        bad = MetricRow("L2", 1.0, 2.0, 1e-6)
        report.add_row(MetricRow("L1", 1.0, 1.0, 1e-6))
        report.add_row(bad)
        self.assertEqual([bad], report.failed_rows())
        self.assertFalse(report.passed)

    def test_failures(self):
        report = ValidationReport()
        try:
            raise ValueError("boom")
        except ValueError as e:
            report.append_failure(EngineFailure(e, engine="ctmc"))
        self.assertTrue(report.has_errors())
        self.assertFalse(report.passed)
        self.assertIn("ValueError: boom", report.failures[0].traceback)
