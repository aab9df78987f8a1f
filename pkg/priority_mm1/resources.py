import logging
from copy import deepcopy

import tablib

from . import widgets
from .declarative import DeclarativeMetaclass
from .fields import Field

logger = logging.getLogger(__name__)


class Resource(metaclass=DeclarativeMetaclass):
    """
    Resource defines how result objects are mapped to their export
    representation.
    """

    def __init__(self, coerce_to_string=True):
        """
        :param coerce_to_string: render every value as text (tabular
          formats) or as a JSON-compatible python value.
        """
        # The fields class attribute is the *class-wide* definition of
        # fields. Because a particular *instance* of the class might want to
        # alter self.fields, we create self.fields here by copying cls.fields.
        # Instances should always modify self.fields; they should not modify
        # cls.fields.
        self.fields = deepcopy(self.fields)
        self.coerce_to_string = coerce_to_string
        for field in self.fields.values():
            field.widget.coerce_to_string = coerce_to_string

    @classmethod
    def get_display_name(cls):
        return cls._meta.name or cls.__name__

    def get_field_name(self, field):
        """
        Returns the field name for a given field.
        """
        for field_name, f in self.fields.items():
            if f == field:
                return field_name
        raise AttributeError(
            "Field %s does not exists in %s resource" % (field, self.__class__)
        )

    def get_export_order(self):
        return self._get_ordered_field_names("export_order")

    def get_diagnostic_columns(self):
        """Column names the JSON format reports under ``diagnostics``."""
        names = self._meta.diagnostics or ()
        return [
            field.column_name
            for field_name, field in self.fields.items()
            if field_name in names or field.column_name in names
        ]

    def before_export(self, objects, **kwargs):
        r"""
        Override to add additional logic. Does nothing by default.

        :param objects: The result objects for export.

        :param \**kwargs:
            Metadata which may be associated with the export.
        """
        pass

    def after_export(self, objects, dataset, **kwargs):
        r"""
        Override to add additional logic. Does nothing by default.

        :param objects: The result objects for export.

        :param dataset: A ``tablib.Dataset``.

        :param \**kwargs:
            Metadata which may be associated with the export.
        """
        pass

    def export_field(self, field, obj):
        field_name = self.get_field_name(field)
        dehydrate_method = field.get_dehydrate_method(field_name)

        method = getattr(self, dehydrate_method, None)
        if method is not None:
            return field.widget.render(method(obj))
        return field.export(obj)

    def get_export_fields(self):
        export_fields = []
        for field_name in self.get_export_order():
            if field_name in self.fields:
                export_fields.append(self.fields[field_name])
                continue
            # fields may be referenced by column_name in `export_order`
            for field in self.fields.values():
                if field.column_name == field_name:
                    export_fields.append(field)
        return export_fields

    def export_resource(self, obj):
        return [self.export_field(field, obj) for field in self.get_export_fields()]

    def get_export_headers(self):
        return [field.column_name for field in self.get_export_fields()]

    def export(self, objects, **kwargs):
        """
        Exports result objects.

        :param objects: An iterable of result objects.

        :returns: A ``tablib.Dataset``.
        """
        objects = list(objects)
        self.before_export(objects, **kwargs)

        dataset = tablib.Dataset(headers=self.get_export_headers(), title=self.get_display_name())
        for obj in objects:
            dataset.append(self.export_resource(obj))

        self.after_export(objects, dataset, **kwargs)
        logger.debug("exported %d rows with %s", len(dataset), self.__class__.__name__)
        return dataset

    def _get_ordered_field_names(self, order_field):
        """
        Return a list of field names, respecting any defined ordering.
        """
        # get any declared 'order' fields
        order_fields = tuple(getattr(self._meta, order_field) or ())
        # get any defined fields
        defined_fields = order_fields + tuple(getattr(self._meta, "fields") or ())

        order = list()
        [order.append(f) for f in defined_fields if f not in order]
        declared_fields = []
        for field_name, field in self.fields.items():
            if field_name not in order and field.column_name not in order:
                declared_fields.append(field_name)
        return tuple(order) + tuple(declared_fields)


def float_field(attribute, column_name=None):
    return Field(attribute=attribute, column_name=column_name, widget=widgets.FloatWidget())


class ParamsMixin(Resource):
    lambda1 = float_field("params__lambda1")
    lambda2 = float_field("params__lambda2")
    mu = float_field("params__mu")
    rho = float_field("params__rho")


class AnalyticResource(Resource):
    """Closed-form bundle of one parameter set."""

    p000 = float_field("p000")
    p_free = float_field("occupancy__p_free")
    p_class1 = float_field("occupancy__p_class1")
    p_class2 = float_field("occupancy__p_class2")
    L1 = float_field("l1")
    L2_conservation = float_field("l2_conservation")
    L2_pgf_derivative = float_field("l2_pgf_derivative")
    L2_paper = float_field("l2_paper")
    L2_priority_formula = float_field("l2_priority_formula")
    L_total = float_field("l_total")
    W1 = float_field("w1")
    W2 = float_field("w2")
    f_at_1 = float_field("boundary__f1")
    f_prime_at_1 = float_field("boundary__fp1")
    f_double_prime_at_1 = float_field("boundary__fpp1")
    F02_at_1 = float_field("boundary__F02_at_1")
    F02_prime_at_1 = float_field("boundary__F02_prime_at_1")
    F02_prime_series = float_field("F02_prime_series")
    F02_prime_paper = float_field("F02_prime_paper")

    class Meta:
        name = "analytic"
        diagnostics = ("F02_prime_series", "F02_prime_paper")


class CtmcResource(Resource):
    """Stationary metrics of the truncated chain."""

    p000 = float_field("p000")
    p_free = float_field("occupancy__p_free")
    p_class1 = float_field("occupancy__p_class1")
    p_class2 = float_field("occupancy__p_class2")
    L1 = float_field("l1")
    L2 = float_field("l2")
    L_total = float_field("l_total")
    F02_at_1 = float_field("F02_at_1")
    F02_prime_at_1 = float_field("F02_prime_at_1")
    tail_mass = float_field("tail_mass")
    residual = float_field("residual")
    states = Field(attribute="states", widget=widgets.IntegerWidget())
    n1_max = Field(attribute="n1_max", widget=widgets.IntegerWidget())
    n2_max = Field(attribute="n2_max", widget=widgets.IntegerWidget())
    method = Field(attribute="method", widget=widgets.CharWidget())

    class Meta:
        name = "ctmc"
        diagnostics = ("tail_mass", "residual", "states", "n1_max", "n2_max", "method")


class SimEstimateResource(Resource):
    """One row per simulated metric."""

    metric = Field(attribute="metric", widget=widgets.CharWidget())
    mean = float_field("estimate__mean")
    half_width = float_field("estimate__half_width")
    lower = float_field("estimate__lower")
    upper = float_field("estimate__upper")
    replications = Field(attribute="estimate__replications", widget=widgets.IntegerWidget())

    class Meta:
        name = "simulation"
        json_key = "metric"


class SweepResource(ParamsMixin):
    """One row per grid point; metrics are blank for unstable points."""

    p_free = float_field("metrics__occupancy__p_free")
    p_class1 = float_field("metrics__occupancy__p_class1")
    p_class2 = float_field("metrics__occupancy__p_class2")
    L1 = float_field("metrics__l1")
    L2 = Field(widget=widgets.FloatWidget())
    engine = Field(attribute="engine", widget=widgets.CharWidget())
    stable = Field(attribute="stable", widget=widgets.BooleanWidget())

    class Meta:
        name = "sweep"

    def dehydrate_L2(self, point):
        # analytic bundles carry several L2 routes; the conservation one is reported
        metrics = point.metrics
        if metrics is None:
            return None
        if hasattr(metrics, "l2_conservation"):
            return metrics.l2_conservation
        return metrics.l2


class DistributionResource(Resource):
    n = Field(attribute="n", widget=widgets.IntegerWidget())
    p_class1 = float_field("class1", column_name="P(N1=n)")
    p_class2 = float_field("class2", column_name="P(N2=n)")
    p_total = float_field("total", column_name="P(N1+N2=n)")

    class Meta:
        name = "distribution"


class ValidationRowResource(Resource):
    metric = Field(attribute="metric", widget=widgets.CharWidget())
    analytic = float_field("analytic")
    ctmc = float_field("ctmc")
    sim_mean = float_field("sim__mean")
    sim_half_width = float_field("sim__half_width")
    abs_deviation = float_field("abs_deviation")
    rel_deviation = float_field("rel_deviation")
    tolerance = float_field("tolerance")
    tolerance_kind = Field(attribute="tolerance_kind", widget=widgets.CharWidget())
    sim_covers = Field(attribute="sim_covers", widget=widgets.BooleanWidget())
    passed = Field(attribute="passed", widget=widgets.BooleanWidget())

    class Meta:
        name = "validation"
        json_key = "metric"


class FidelityResource(Resource):
    """Literal closed forms against the CTMC oracle."""

    quantity = Field(attribute="quantity", widget=widgets.CharWidget())
    lambda1 = float_field("params__lambda1")
    lambda2 = float_field("params__lambda2")
    mu = float_field("params__mu")
    printed = float_field("printed")
    oracle = float_field("oracle")
    rel_deviation = float_field("rel_deviation")
    verdict = Field(attribute="verdict", widget=widgets.CharWidget())

    class Meta:
        name = "paper_fidelity"
