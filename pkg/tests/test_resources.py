from types import SimpleNamespace
from unittest import TestCase

import tablib

from priority_mm1 import analytic, ctmc, sim
from priority_mm1.cli import DistributionRow, SweepPoint
from priority_mm1.model import ModelParams
from priority_mm1.resources import (
    AnalyticResource,
    CtmcResource,
    DistributionResource,
    Resource,
    SimEstimateResource,
    SweepResource,
    float_field,
)

BASE = ModelParams(1.0, 1.0, 4.0)


class OrderedResource(Resource):
    L1 = float_field("l1")
    L2 = float_field("l2")
    tail = float_field("tail_mass", column_name="tail_mass")

    class Meta:
        name = "ordered"
        export_order = ("tail_mass", "L2")


class HookedResource(Resource):
    L1 = float_field("l1")

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.calls = []

    def before_export(self, objects, **kwargs):
        self.calls.append(("before", len(objects)))

    def after_export(self, objects, dataset, **kwargs):
        self.calls.append(("after", dataset.height))


class ResourceTest(TestCase):
    def setUp(self):
        self.obj = SimpleNamespace(l1=0.25, l2=0.75, tail_mass=1e-13)

    def test_instance_fields_are_copies(self):
        resource = OrderedResource()
        self.assertIsNot(resource.fields["L1"], OrderedResource.fields["L1"])

    def test_display_name(self):
        self.assertEqual("ordered", OrderedResource.get_display_name())
        self.assertEqual("HookedResource", HookedResource.get_display_name())

    def test_export_order_by_field_or_column_name(self):
        resource = OrderedResource()
        self.assertEqual(["tail_mass", "L2", "L1"], resource.get_export_headers())

    def test_export(self):
        dataset = OrderedResource().export([self.obj])
        self.assertIsInstance(dataset, tablib.Dataset)
        self.assertEqual("ordered", dataset.title)
        self.assertEqual(("1e-13", "0.75", "0.25"), dataset[0])

    def test_export_without_coercion(self):
        dataset = OrderedResource(coerce_to_string=False).export([self.obj])
        self.assertEqual((1e-13, 0.75, 0.25), dataset[0])

    def test_hooks(self):
        resource = HookedResource()
        resource.export([self.obj, self.obj])
        self.assertEqual([("before", 2), ("after", 2)], resource.calls)

    def test_get_field_name(self):
        resource = OrderedResource()
        self.assertEqual("tail", resource.get_field_name(resource.fields["tail"]))
        with self.assertRaises(AttributeError):
            resource.get_field_name(float_field("l1"))

    def test_diagnostic_columns(self):
        self.assertEqual(
            ["F02_prime_series", "F02_prime_paper"], AnalyticResource().get_diagnostic_columns()
        )
        self.assertEqual([], OrderedResource().get_diagnostic_columns())


class EngineResourceTest(TestCase):
    def test_analytic(self):
        dataset = AnalyticResource().export([analytic.evaluate(BASE)])
        row = dict(zip(dataset.headers, dataset[0]))
        self.assertEqual("0.5", row["p000"])
        self.assertEqual("0.416666667", row["L1"])
        self.assertEqual("0.583333333", row["L2_conservation"])
        self.assertEqual("1", row["f_at_1"])
        self.assertEqual("1.38666667", row["F02_prime_paper"])

    def test_ctmc(self):
        metrics = ctmc.solve(BASE)
        dataset = CtmcResource(coerce_to_string=False).export([metrics])
        row = dict(zip(dataset.headers, dataset[0]))
        self.assertEqual(metrics.states, row["states"])
        self.assertEqual("direct", row["method"])
        self.assertAlmostEqual(0.5, row["p000"], places=9)

    def test_sim_rows(self):
        report = sim.run(BASE, sim.SimConfig(seed=1, replications=2, horizon_events=500))
        dataset = SimEstimateResource().export(report.rows())
        self.assertEqual(7, dataset.height)
        self.assertEqual("L1", dataset["metric"][3])

    def test_sweep_unstable_point_is_blank(self):
        point = SweepPoint(ModelParams(3.0, 2.0, 4.0), "analytic", stable=False)
        dataset = SweepResource().export([point])
        row = dict(zip(dataset.headers, dataset[0]))
        self.assertEqual("", row["L1"])
        self.assertEqual("", row["L2"])
        self.assertEqual("false", row["stable"])
        self.assertEqual("1.25", row["rho"])

    def test_sweep_l2_per_engine(self):
        exact = SweepPoint(BASE, "analytic", stable=True, metrics=analytic.evaluate(BASE))
        oracle = SweepPoint(BASE, "ctmc", stable=True, metrics=ctmc.solve(BASE))
        dataset = SweepResource(coerce_to_string=False).export([exact, oracle])
        l2 = dataset["L2"]
        self.assertEqual(0.583333333, l2[0])
        self.assertAlmostEqual(7 / 12, l2[1], places=8)

    def test_sweep_zero_l2(self):
        params = ModelParams(1.0, 0.0, 2.0)
        point = SweepPoint(params, "analytic", stable=True, metrics=analytic.evaluate(params))
        dataset = SweepResource().export([point])
        self.assertEqual("0", dataset["L2"][0])

    def test_distribution_headers(self):
        dataset = DistributionResource().export([DistributionRow(0, 0.5, 0.5, 0.5)])
        self.assertEqual(["n", "P(N1=n)", "P(N2=n)", "P(N1+N2=n)"], dataset.headers)
