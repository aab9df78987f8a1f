"""
Command line interface::

    priority-mm1 analyze  --lambda1 1 --lambda2 1 --mu 4 --format json
    priority-mm1 ctmc     --lambda1 1 --lambda2 1 --mu 4 --tail-eps 1e-12
    priority-mm1 simulate --lambda1 1 --lambda2 1 --mu 4 --reps 10 --seed 7
    priority-mm1 validate --lambda1 1 --lambda2 1 --mu 4
    priority-mm1 sweep    --lambda1 1 --lambda2 0.5 1.0 1.5 --mu 4
    priority-mm1 dist     --lambda1 1 --lambda2 1 --mu 4

Exit codes: 0 success, 1 tolerance failure, 2 input or stability error,
3 truncation budget exceeded, 4 engine failure.
"""
import argparse
import itertools
import logging
import os
import sys
from dataclasses import dataclass

from . import analytic, ctmc, sim
from .conf import settings
from .exceptions import (
    ConfigurationError,
    DomainError,
    EngineError,
    ParameterError,
    QueueingError,
    SolverError,
    TruncationError,
)
from .formats import base_formats
from .model import ModelParams, require_stable, validate
from .resources import (
    AnalyticResource,
    CtmcResource,
    DistributionResource,
    FidelityResource,
    SimEstimateResource,
    SweepResource,
    ValidationRowResource,
)
from .results import (
    TOLERANCE_ABSOLUTE,
    TOLERANCE_RELATIVE,
    EngineFailure,
    ExportDocument,
    FidelityRow,
    MetricRow,
    Section,
    ValidationReport,
)
from .trace_storages import TempFolderTraceStorage
from .widgets import BooleanWidget

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INPUT = 2
EXIT_TRUNCATION = 3
EXIT_ENGINE = 4

#: extra grid points of the fidelity comparison
REFERENCE_POINTS = (
    ModelParams(1.0, 1.0, 4.0),
    ModelParams(2.0, 1.0, 5.0),
    ModelParams(0.5, 2.0, 4.0),
)

#: probabilities below this end a distribution dump
DISTRIBUTION_CUTOFF = 1e-12


@dataclass(frozen=True)
class SweepPoint:
    params: ModelParams
    engine: str
    stable: bool
    metrics: object = None


@dataclass(frozen=True)
class DistributionRow:
    n: int
    class1: float
    class2: float
    total: float


def _params(args):
    missing = [name for name in ("lambda1", "lambda2", "mu") if getattr(args, name) is None]
    if missing:
        raise ParameterError("missing " + ", ".join(f"--{name}" for name in missing))
    params = ModelParams(args.lambda1, args.lambda2, args.mu)
    validate(params)
    return params


def _truncation(args):
    return ctmc.TruncationSpec(
        n1_max=args.n1_max,
        n2_max=args.n2_max,
        tail_eps=args.tail_eps,
        auto_grow=args.auto,
        max_states=args.max_states,
    )


def _sim_config(args, confidence=None):
    return sim.SimConfig(
        seed=args.seed,
        replications=args.reps,
        horizon_events=args.horizon,
        warmup_events=args.warmup,
        confidence=args.confidence if confidence is None else confidence,
        workers=args.workers,
    )


def cmd_analyze(args):
    params = _params(args)
    metrics = analytic.evaluate(params)
    diagnostics = {"rho": params.rho, "root_residual_at_0": analytic.root_f(params, 0.0).residual}
    return ExportDocument("analytic", params, [Section(AnalyticResource(), [metrics])], diagnostics), EXIT_OK


def cmd_ctmc(args):
    params = _params(args)
    result = ctmc.auto_truncate(params, _truncation(args))
    metrics = ctmc.metrics(result.solution)
    return ExportDocument("ctmc", params, [Section(CtmcResource(), [metrics])], {"rho": params.rho}), EXIT_OK


def cmd_simulate(args):
    params = _params(args)
    config = _sim_config(args)
    storage = None
    if args.trace:
        folder, name = os.path.split(os.path.abspath(args.trace))
        storage = TempFolderTraceStorage(name=name, folder=folder)
        storage.remove()
    try:
        report = sim.run(params, config, trace=storage)
    finally:
        if storage is not None:
            storage.close()

    little = sim.littles_law_check(report, params)
    diagnostics = {
        "rho": params.rho,
        "unstable": report.unstable,
        "seed": config.seed,
        "replications": config.replications,
        "horizon_events": config.horizon_events,
        "warmup_events": config.warmup_events,
        "confidence": config.confidence,
        "littles_law_class1": little.class1.discrepancy,
        "littles_law_class2": little.class2.discrepancy,
        "littles_law_passed": little.passed,
    }
    return ExportDocument("sim", params, [Section(SimEstimateResource(), report.rows())], diagnostics), EXIT_OK


def _run_engine(engine, params, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except QueueingError as e:
        logger.debug(e, exc_info=e)
        raise EngineError(e, engine=engine, params=params) from e


def _fidelity_rows(params, solution, spec, tolerances):
    points = [params] + [p for p in REFERENCE_POINTS if p != params]
    rows = []
    for point in points:
        if point == params:
            oracle = solution
        else:
            oracle = _run_engine("ctmc", point, ctmc.solve, point, spec)
        rows.append(
            FidelityRow(
                "F02_prime_at_1",
                point,
                analytic.F0_2_prime_at_1(point, analytic.VARIANT_PAPER),
                oracle.F02_prime_at_1,
                tolerances["boundary"],
            )
        )
        rows.append(
            FidelityRow(
                "L2",
                point,
                analytic.mean_length_class2(point, analytic.ROUTE_PAPER),
                oracle.l2,
                tolerances["length"],
            )
        )
    return rows


def run_validation(params, spec, sim_config=None, tolerances=None):
    """
    Compare the three engines for ``params``.

    The analytic values are the reference. Simulation intervals are built at
    a per-metric level that keeps the family-wise coverage at the configured
    confidence.
    """
    tolerances = {"occupancy": 1e-8, "length": 1e-6, "boundary": 1e-4, **(tolerances or {})}
    require_stable(params, "validate")
    report = ValidationReport(params)

    exact = _run_engine("analytic", params, analytic.evaluate, params)
    oracle = _run_engine("ctmc", params, ctmc.solve, params, spec)
    estimates = {}
    if sim_config is not None:
        sim_report = _run_engine("sim", params, sim.run, params, sim_config)
        estimates = sim_report.estimates()

    def add(metric, reference, value, tolerance, kind, estimate=None):
        report.add_row(MetricRow(metric, reference, value, tolerance, kind, sim=estimate))

    occupancy = tolerances["occupancy"]
    length = tolerances["length"]
    boundary = tolerances["boundary"]
    add("p000", exact.p000, oracle.p000, occupancy, TOLERANCE_ABSOLUTE)
    for name in ("p_free", "p_class1", "p_class2"):
        add(
            name,
            getattr(exact.occupancy, name),
            getattr(oracle.occupancy, name),
            occupancy,
            TOLERANCE_ABSOLUTE,
            estimates.get(name),
        )
    add("L1", exact.l1, oracle.l1, length, TOLERANCE_RELATIVE, estimates.get("l1"))
    add("L2", exact.l2_conservation, oracle.l2, length, TOLERANCE_RELATIVE, estimates.get("l2"))
    add("L_total", exact.l_total, oracle.l_total, length, TOLERANCE_RELATIVE)
    if params.lambda1 > 0:
        add("W1", exact.w1, oracle.l1 / params.lambda1, length, TOLERANCE_RELATIVE, estimates.get("w1"))
    if params.lambda2 > 0:
        add("W2", exact.w2, oracle.l2 / params.lambda2, length, TOLERANCE_RELATIVE, estimates.get("w2"))
    add("F02_at_1", exact.boundary.F02_at_1, oracle.F02_at_1, boundary, TOLERANCE_RELATIVE)
    add(
        "F02_prime_at_1",
        exact.boundary.F02_prime_at_1,
        oracle.F02_prime_at_1,
        boundary,
        TOLERANCE_RELATIVE,
    )

    try:
        for row in _fidelity_rows(params, oracle, spec, tolerances):
            report.add_fidelity(row)
    except EngineError as e:
        # the fidelity section is informational
        logger.warning("fidelity comparison incomplete: %s", e)
        report.append_failure(EngineFailure(e, engine=e.engine))
    return report, oracle


def cmd_validate(args):
    params = _params(args)
    require_stable(params, "validate")
    spec = _truncation(args)
    sim_config = None
    if not args.no_sim:
        # Bonferroni over the simulated metrics
        family = 1.0 - args.confidence
        per_metric = 1.0 - family / len(sim.METRIC_NAMES)
        sim_config = _sim_config(args, confidence=per_metric)
    tolerances = {
        "occupancy": args.tol_occupancy,
        "length": args.tol_length,
        "boundary": args.tol_boundary,
    }
    report, oracle = run_validation(params, spec, sim_config, tolerances)
    if report.has_errors():
        # a failed fidelity solve is an engine failure too
        raise report.failures[0].error

    diagnostics = {
        "overall": "PASS" if report.passed else "FAIL",
        "passed": report.passed,
        **report.totals,
        "tail_mass": oracle.tail_mass,
        "residual": oracle.residual,
        "simulated": sim_config is not None,
    }
    if sim_config is not None:
        diagnostics["seed"] = sim_config.seed
        diagnostics["sim_confidence_per_metric"] = sim_config.confidence
    document = ExportDocument(
        "validate",
        params,
        [Section(ValidationRowResource(), report.rows), Section(FidelityResource(), report.fidelity)],
        diagnostics,
    )
    return document, EXIT_OK if report.passed else EXIT_TOLERANCE


def cmd_sweep(args):
    grid = list(itertools.product(args.lambda1 or [], args.lambda2 or [], args.mu or []))
    if not grid:
        raise ConfigurationError("empty parameter grid")
    spec = _truncation(args)
    points = []
    for lambda1, lambda2, mu in grid:
        params = ModelParams(lambda1, lambda2, mu)
        if not validate(params).stable:
            logger.warning("sweep point %s is unstable", params)
            points.append(SweepPoint(params, args.engine, stable=False))
            continue
        if args.engine == "ctmc":
            metrics = ctmc.solve(params, spec)
        else:
            metrics = analytic.evaluate(params)
        points.append(SweepPoint(params, args.engine, stable=True, metrics=metrics))
    document = ExportDocument("sweep", None, [Section(SweepResource(), points)], {"points": len(points)})
    return document, EXIT_OK


def cmd_dist(args):
    params = _params(args)
    result = ctmc.auto_truncate(params, _truncation(args))
    marginals = ctmc.marginal_distributions(result.solution)
    columns = [marginals.class1, marginals.class2, marginals.total]
    size = max(len(c) for c in columns)

    def at(column, n):
        return float(column[n]) if n < len(column) else 0.0

    rows = []
    for n in range(size):
        values = [at(c, n) for c in columns]
        if all(v < DISTRIBUTION_CUTOFF for v in values):
            break
        rows.append(DistributionRow(n, *values))
    diagnostics = {"tail_mass": result.tail_mass, "n1_max": result.spec.n1_max, "n2_max": result.spec.n2_max}
    return ExportDocument("ctmc", params, [Section(DistributionResource(), rows)], diagnostics), EXIT_OK


def _output_parent(default_format):
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--format", choices=sorted(base_formats.DEFAULT_FORMATS), default=default_format
    )
    parent.add_argument("--output", metavar="FILE", help="write to FILE instead of stdout")
    parent.add_argument("--config", metavar="FILE", help="key=value file supplying any flag")
    parent.add_argument("-v", "--verbose", action="count", default=0)
    return parent


def _params_parent():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--lambda1", type=float, help="class-1 arrival rate")
    parent.add_argument("--lambda2", type=float, help="class-2 arrival rate")
    parent.add_argument("--mu", type=float, help="service rate")
    return parent


def _truncation_parent():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--n1-max", type=int, default=32)
    parent.add_argument("--n2-max", type=int, default=32)
    parent.add_argument("--tail-eps", type=float, default=1e-12)
    parent.add_argument(
        "--auto", action=argparse.BooleanOptionalAction, default=True, help="grow caps until the tail is met"
    )
    parent.add_argument("--max-states", type=int, default=None)
    return parent


def _sim_parent():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=0)
    parent.add_argument("--reps", type=int, default=10)
    parent.add_argument("--horizon", type=int, default=100_000, help="departures per replication")
    parent.add_argument("--warmup", type=int, default=None, help="departures discarded (default 10%%)")
    parent.add_argument("--confidence", type=float, default=0.95)
    parent.add_argument("--workers", type=int, default=None)
    return parent


def build_parser():
    from . import __version__

    parser = argparse.ArgumentParser(
        prog="priority-mm1",
        description="Two-class non-preemptive priority M/M/1 queue: closed forms, CTMC oracle and simulation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    params, truncation, simulation = _params_parent(), _truncation_parent(), _sim_parent()

    sub = subparsers.add_parser("analyze", parents=[params, _output_parent("text")], help="closed-form metrics")
    sub.set_defaults(handler=cmd_analyze)

    sub = subparsers.add_parser(
        "ctmc", parents=[params, truncation, _output_parent("text")], help="truncated chain oracle"
    )
    sub.set_defaults(handler=cmd_ctmc)

    sub = subparsers.add_parser(
        "simulate", parents=[params, simulation, _output_parent("text")], help="discrete-event simulation"
    )
    sub.add_argument("--trace", metavar="FILE", help="write one JSON line per event to FILE")
    sub.set_defaults(handler=cmd_simulate)

    sub = subparsers.add_parser(
        "validate",
        parents=[params, truncation, simulation, _output_parent("text")],
        help="cross-engine validation report",
    )
    sub.add_argument("--tol-occupancy", type=float, default=1e-8, help="absolute")
    sub.add_argument("--tol-length", type=float, default=1e-6, help="relative")
    sub.add_argument("--tol-boundary", type=float, default=1e-4, help="relative")
    sub.add_argument("--no-sim", action="store_true", help="skip the simulation engine")
    sub.set_defaults(handler=cmd_validate)

    sub = subparsers.add_parser("sweep", parents=[truncation, _output_parent("csv")], help="metrics over a grid")
    sub.add_argument("--lambda1", type=float, nargs="+", default=[])
    sub.add_argument("--lambda2", type=float, nargs="+", default=[])
    sub.add_argument("--mu", type=float, nargs="+", default=[])
    sub.add_argument("--engine", choices=["analytic", "ctmc"], default="analytic")
    sub.set_defaults(handler=cmd_sweep)

    sub = subparsers.add_parser(
        "dist", parents=[params, truncation, _output_parent("csv")], help="marginal count distributions"
    )
    sub.set_defaults(handler=cmd_dist)
    return parser


def _config_value(action, raw):
    if isinstance(action, argparse._CountAction):
        return int(raw)
    if action.nargs == 0 or isinstance(action, argparse.BooleanOptionalAction):
        value = BooleanWidget().clean(raw)
        if value is None:
            raise ValueError("empty flag value")
        return value
    convert = action.type or str
    if action.nargs in ("+", "*"):
        return [convert(item) for item in raw.replace(",", " ").split()]
    return convert(raw)


def read_config(path):
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as file:
            lines = file.readlines()
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}")
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(f"{path}:{number}: expected key=value, got {line!r}")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def apply_config(parser, argv):
    """
    Install values of a ``--config`` file as defaults of the chosen
    subcommand, so flags given on the command line still win.
    """
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((arg for arg in rest if arg in subparsers.choices), None)
    if command is None:
        return
    subparser = subparsers.choices[command]
    actions = {action.dest: action for action in subparser._actions}

    defaults = {}
    for key, raw in read_config(known.config).items():
        action = actions.get(key)
        if action is None or key in ("config", "help", "output"):
            raise ConfigurationError(f"{known.config}: unknown option {key!r} for {command}")
        try:
            defaults[key] = _config_value(action, raw)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"{known.config}: bad value for {key}: {e}")
    logger.debug("config defaults for %s: %s", command, defaults)
    subparser.set_defaults(**defaults)


def configure_logging(verbosity=0):
    level = logging.getLevelName(str(settings.LOG_LEVEL).upper())
    if not isinstance(level, int):
        level = logging.WARNING
    level = max(logging.DEBUG, level - 10 * verbosity)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _fail(message, code):
    sys.stderr.write(f"error: {message}\n")
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        apply_config(parser, argv)
    except ConfigurationError as e:
        return _fail(e, EXIT_INPUT)
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        document, status = args.handler(args)
        output = base_formats.get_format(args.format).export_document(document)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as file:
                file.write(output)
        else:
            sys.stdout.write(output)
    except (ParameterError, DomainError, ConfigurationError) as e:
        return _fail(e, EXIT_INPUT)
    except TruncationError as e:
        return _fail(e, EXIT_TRUNCATION)
    except EngineError as e:
        logger.debug(e, exc_info=e)
        if isinstance(e.error, TruncationError):
            return _fail(e, EXIT_TRUNCATION)
        return _fail(e, EXIT_ENGINE)
    except SolverError as e:
        logger.debug(e, exc_info=e)
        return _fail(e, EXIT_ENGINE)
    except OSError as e:
        # unwritable --output or --trace file
        logger.debug(e, exc_info=e)
        return _fail(e, EXIT_INPUT)
    return status
