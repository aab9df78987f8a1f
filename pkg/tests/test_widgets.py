import math
from unittest import TestCase

from priority_mm1 import widgets


class WidgetTest(TestCase):
    def setUp(self):
        self.widget = widgets.Widget()

    def test_render(self):
        self.assertEqual("1", self.widget.render(1))
        self.assertEqual("", self.widget.render(None))

    def test_render_no_coerce_to_string(self):
        self.widget = widgets.Widget(coerce_to_string=False)
        self.assertEqual(1, self.widget.render(1))


class IsMissingTest(TestCase):
    def test_missing(self):
        self.assertTrue(widgets.is_missing(None))
        self.assertTrue(widgets.is_missing(math.nan))

    def test_present(self):
        self.assertFalse(widgets.is_missing(0.0))
        self.assertFalse(widgets.is_missing(False))
        self.assertFalse(widgets.is_missing("nan"))


class FloatWidgetTest(TestCase):
    def setUp(self):
        self.widget = widgets.FloatWidget()

    def test_render_significant_digits(self):
        self.assertEqual("0.416666667", self.widget.render(5 / 12))
        self.assertEqual("0.5", self.widget.render(0.5))
        self.assertEqual("1e-13", self.widget.render(1e-13))

    def test_render_missing(self):
        self.assertEqual("", self.widget.render(None))
        self.assertEqual("", self.widget.render(math.nan))

    def test_render_no_coerce_to_string(self):
        self.widget = widgets.FloatWidget(coerce_to_string=False)
        self.assertEqual(0.416666667, self.widget.render(5 / 12))
        self.assertIsNone(self.widget.render(math.nan))
        self.assertIsNone(self.widget.render(math.inf))

    def test_render_digits(self):
        self.widget = widgets.FloatWidget(digits=3)
        self.assertEqual("3.14", self.widget.render(math.pi))

    def test_render_infinite(self):
        self.assertEqual("inf", self.widget.render(math.inf))

    def test_render_non_numeric(self):
        self.assertEqual("", self.widget.render("x"))


class IntegerWidgetTest(TestCase):
    def setUp(self):
        self.widget = widgets.IntegerWidget()

    def test_render(self):
        self.assertEqual("2113", self.widget.render(2113))
        self.assertEqual("", self.widget.render(None))

    def test_render_no_coerce_to_string(self):
        self.widget = widgets.IntegerWidget(coerce_to_string=False)
        self.assertEqual(3, self.widget.render(3))
        self.assertIsNone(self.widget.render(None))


class CharWidgetTest(TestCase):
    def setUp(self):
        self.widget = widgets.CharWidget()

    def test_render(self):
        self.assertEqual("direct", self.widget.render("direct"))
        self.assertEqual("", self.widget.render(None))

    def test_render_no_coerce_to_string(self):
        self.widget = widgets.CharWidget(coerce_to_string=False)
        self.assertIsNone(self.widget.render(None))


class BooleanWidgetTest(TestCase):
    def setUp(self):
        self.widget = widgets.BooleanWidget()

    def test_clean(self):
        for value in ("1", 1, "TRUE", "True", "true", "yes", "on", " true "):
            self.assertTrue(self.widget.clean(value), value)
        for value in ("0", 0, "FALSE", "False", "false", "no", "off"):
            self.assertFalse(self.widget.clean(value), value)
        self.assertIsNone(self.widget.clean(""))
        self.assertIsNone(self.widget.clean("NONE"))

    def test_clean_invalid(self):
        with self.assertRaises(ValueError):
            self.widget.clean("maybe")

    def test_render(self):
        self.assertEqual("true", self.widget.render(True))
        self.assertEqual("false", self.widget.render(False))
        self.assertEqual("", self.widget.render(None))
        self.assertEqual("", self.widget.render(1))

    def test_render_no_coerce_to_string(self):
        self.widget = widgets.BooleanWidget(coerce_to_string=False)
        self.assertIs(True, self.widget.render(True))
        self.assertIsNone(self.widget.render(None))
