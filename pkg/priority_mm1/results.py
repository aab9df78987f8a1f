import logging
import math
import traceback
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

VERDICT_MATCHES = "MATCHES"
VERDICT_DIFFERS = "DIFFERS"

TOLERANCE_ABSOLUTE = "abs"
TOLERANCE_RELATIVE = "rel"


class EngineFailure:
    """An engine error collected while building a report."""

    def __init__(self, error, engine=None, tb=None):
        self.error = error
        self.engine = engine
        self.traceback = tb if tb is not None else "".join(traceback.format_exception(error))


def deviations(reference, value):
    """Absolute and relative deviation of ``value`` from ``reference``."""
    absolute = abs(value - reference)
    relative = absolute / abs(reference) if reference != 0.0 else absolute
    return absolute, relative


class MetricRow:
    """
    One metric compared across engines.

    The analytic value is the reference. A row passes when the CTMC value is
    within tolerance and, if simulated, the simulation interval covers the
    reference.
    """

    def __init__(self, metric, analytic, ctmc, tolerance, tolerance_kind=TOLERANCE_RELATIVE, sim=None):
        self.metric = metric
        self.analytic = analytic
        self.ctmc = ctmc
        self.tolerance = tolerance
        self.tolerance_kind = tolerance_kind
        #: a :class:`~priority_mm1.sim.SimEstimate`, or ``None`` when not simulated
        self.sim = sim
        self.abs_deviation, self.rel_deviation = deviations(analytic, ctmc)

    @property
    def within_tolerance(self):
        if self.tolerance_kind == TOLERANCE_ABSOLUTE:
            return self.abs_deviation <= self.tolerance
        return self.rel_deviation <= self.tolerance

    @property
    def sim_covers(self):
        """``None`` when the metric was not simulated or has no interval."""
        if self.sim is None or self.sim.half_width is None:
            return None
        if math.isnan(self.analytic):
            return None
        return self.sim.contains(self.analytic)

    @property
    def passed(self):
        return self.within_tolerance and self.sim_covers is not False


class FidelityRow:
    """
    A literal closed form compared with the CTMC value of the same
    quantity. Verdicts are informational.
    """

    def __init__(self, quantity, params, printed, oracle, tolerance):
        self.quantity = quantity
        self.params = params
        self.printed = printed
        self.oracle = oracle
        self.tolerance = tolerance
        _, self.rel_deviation = deviations(oracle, printed)

    @property
    def verdict(self):
        return VERDICT_MATCHES if self.rel_deviation <= self.tolerance else VERDICT_DIFFERS


class ValidationReport:
    def __init__(self, params=None):
        self.params = params
        self.rows = []
        self.fidelity = []
        self.failures = []

    def add_row(self, row):
        self.rows.append(row)

    def add_fidelity(self, row):
        self.fidelity.append(row)

    def append_failure(self, failure):
        self.failures.append(failure)

    def has_errors(self):
        return bool(self.failures)

    def failed_rows(self):
        return [row for row in self.rows if not row.passed]

    @property
    def passed(self):
        """Conjunction of the metric rows; fidelity verdicts do not count."""
        return not self.has_errors() and all(row.passed for row in self.rows)

    @property
    def totals(self):
        return {
            "rows": len(self.rows),
            "failed": len(self.failed_rows()),
            "differs": sum(1 for row in self.fidelity if row.verdict == VERDICT_DIFFERS),
        }


@dataclass
class Section:
    """Objects exported through one resource."""

    resource: object
    objects: list


@dataclass
class ExportDocument:
    """
    What a command renders. The first section holds the metrics; further
    sections are extra tables (for instance the fidelity comparison).
    """

    engine: str
    params: object
    sections: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def main(self):
        return self.sections[0]
