"""
Discrete-event simulation of the two-class non-preemptive priority queue.

Random numbers
--------------
Each replication owns a ``numpy`` PCG64 generator (128-bit linear
congruential state with a xorshift/random-rotation output, period ``2**128``).
Its 128-bit state and odd increment are filled from a splitmix64 sequence
started at ``splitmix64(seed) ^ replication``, so replication streams are
independent of each other and of how replications are scheduled. Exponential
variates use the inverse CDF ``-log1p(-U) / rate`` drawn in batches.

Estimators
----------
The first ``warmup_events`` departures are discarded. Occupancy fractions and
mean queue lengths are time averages of the piecewise-constant sample path;
sojourn means are averaged over customers departing after the warm-up.
Intervals use Student's t on the replication means.
"""
import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .conf import settings
from .exceptions import ConfigurationError
from .model import ServerPhase, validate

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
DRAW_BATCH = 1 << 14

EVENT_ARRIVAL = "arrival"
EVENT_SERVICE_START = "service_start"
EVENT_DEPARTURE = "departure"

METRIC_NAMES = ("p_free", "p_class1", "p_class2", "l1", "l2", "w1", "w2")

#: names used in reports
METRIC_LABELS = {
    "p_free": "p_free",
    "p_class1": "p_class1",
    "p_class2": "p_class2",
    "l1": "L1",
    "l2": "L2",
    "w1": "W1",
    "w2": "W2",
}


def splitmix64(state):
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    state = (state + SPLITMIX_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def replication_generator(seed, replication):
    """The ``numpy.random.Generator`` of replication ``replication``."""
    _, state = splitmix64(seed & MASK64)
    state ^= replication
    words = []
    for _ in range(4):
        state, word = splitmix64(state)
        words.append(word)
    bit_generator = np.random.PCG64()
    bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {"state": (words[0] << 64) | words[1], "inc": ((words[2] << 64) | words[3]) | 1},
        "has_uint32": 0,
        "uinteger": 0,
    }
    return np.random.Generator(bit_generator)


class _ExponentialStream:
    """Unit-rate exponential variates, drawn in batches."""

    def __init__(self, generator, batch=DRAW_BATCH):
        self._generator = generator
        self._batch = batch
        self._buffer = []
        self._pos = 0

    def __call__(self):
        if self._pos == len(self._buffer):
            uniforms = self._generator.random(self._batch)
            self._buffer = (-np.log1p(-uniforms)).tolist()
            self._pos = 0
        value = self._buffer[self._pos]
        self._pos += 1
        return value


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    replications: int = 10
    horizon_events: int = 100_000
    #: departures discarded before measuring; ``None`` means 10% of the horizon
    warmup_events: int = None
    confidence: float = 0.95
    #: worker processes; ``None`` reads the ``SIM_WORKERS`` setting
    workers: int = None

    def __post_init__(self):
        if self.horizon_events is None or self.horizon_events <= 0:
            raise ConfigurationError(f"horizon_events must be positive, got {self.horizon_events!r}")
        if self.warmup_events is None:
            object.__setattr__(self, "warmup_events", self.horizon_events // 10)
        if not 0 <= self.warmup_events < self.horizon_events:
            raise ConfigurationError(
                f"warmup_events must satisfy 0 <= warmup < horizon ({self.horizon_events}), "
                f"got {self.warmup_events!r}"
            )
        if self.replications < 1:
            raise ConfigurationError(f"replications must be at least 1, got {self.replications!r}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigurationError(f"confidence must lie in (0, 1), got {self.confidence!r}")
        if not 0 <= self.seed <= MASK64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.workers is not None and self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers!r}")

    @property
    def worker_count(self):
        return self.workers if self.workers is not None else settings.SIM_WORKERS


@dataclass(frozen=True)
class ReplicationResult:
    replication: int
    p_free: float
    p_class1: float
    p_class2: float
    l1: float
    l2: float
    w1: float
    w2: float
    measured_time: float
    departures1: int
    departures2: int

    def value(self, name):
        return getattr(self, name)


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    #: ``None`` when fewer than two replications carry a value
    half_width: float
    replications: int

    @property
    def lower(self):
        return None if self.half_width is None else self.mean - self.half_width

    @property
    def upper(self):
        return None if self.half_width is None else self.mean + self.half_width

    def contains(self, value):
        if self.half_width is None:
            return False
        return self.lower <= value <= self.upper

    @classmethod
    def from_samples(cls, samples, confidence):
        values = np.asarray(samples, dtype=float)
        values = values[np.isfinite(values)]
        n = len(values)
        if n == 0:
            return cls(mean=math.nan, half_width=None, replications=0)
        mean = float(values.mean())
        if n < 2:
            return cls(mean=mean, half_width=None, replications=n)
        quantile = stats.t.ppf(0.5 + confidence / 2.0, n - 1)
        half_width = float(quantile * values.std(ddof=1) / math.sqrt(n))
        return cls(mean=mean, half_width=half_width, replications=n)


@dataclass(frozen=True)
class SimReport:
    params: object
    config: SimConfig
    p_free: SimEstimate
    p_class1: SimEstimate
    p_class2: SimEstimate
    l1: SimEstimate
    l2: SimEstimate
    w1: SimEstimate
    w2: SimEstimate
    #: ``rho >= 1``; stationary comparisons do not apply
    unstable: bool = False
    replications: tuple = field(default=(), repr=False)

    def estimates(self):
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def rows(self):
        return [EstimateRow(METRIC_LABELS[name], getattr(self, name)) for name in METRIC_NAMES]


@dataclass(frozen=True)
class EstimateRow:
    metric: str
    estimate: SimEstimate


@dataclass(frozen=True)
class LittleCheck:
    applicable: bool
    discrepancy: float = None
    bound: float = None

    @property
    def within_bounds(self):
        return self.applicable and self.discrepancy <= self.bound


@dataclass(frozen=True)
class LittlesLawCheck:
    class1: LittleCheck
    class2: LittleCheck
    skipped: bool = False

    @property
    def passed(self):
        checks = [c for c in (self.class1, self.class2) if c.applicable]
        return not self.skipped and all(c.within_bounds for c in checks)


def _trace(storage, replication, time, event, customer_class, customer, n1, n2, phase):
    storage.save(
        {
            "replication": replication,
            "time": time,
            "event": event,
            "class": customer_class,
            "customer": customer,
            "n1": n1,
            "n2": n2,
            "phase": phase,
        }
    )


def _simulate_replication(params, config, replication, trace=None):
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    draw = _ExponentialStream(replication_generator(config.seed, replication))
    horizon, warmup = config.horizon_events, config.warmup_events
    inf = math.inf
    free, serving1, serving2 = int(ServerPhase.FREE), int(ServerPhase.SERVING_CLASS1), int(ServerPhase.SERVING_CLASS2)

    next1 = draw() / lambda1 if lambda1 > 0 else inf
    next2 = draw() / lambda2 if lambda2 > 0 else inf
    next_departure = inf
    queue1, queue2 = deque(), deque()
    phase = free
    in_service = None  # (customer, arrival time)
    n1 = n2 = 0
    customer = 0
    departures = 0

    measuring = warmup == 0
    now = start = 0.0
    area1 = area2 = idle = busy1 = busy2 = 0.0
    sojourn1 = sojourn2 = 0.0
    count1 = count2 = 0

    while departures < horizon:
        if next1 <= next2 and next1 <= next_departure:
            event_time, kind = next1, 1
        elif next2 <= next_departure:
            event_time, kind = next2, 2
        else:
            event_time, kind = next_departure, 0

        if measuring:
            dt = event_time - now
            area1 += n1 * dt
            area2 += n2 * dt
            if phase == serving1:
                busy1 += dt
            elif phase == serving2:
                busy2 += dt
            else:
                idle += dt
        now = event_time

        if kind == 1:
            customer += 1
            n1 += 1
            next1 = now + draw() / lambda1
            if trace is not None:
                _trace(trace, replication, now, EVENT_ARRIVAL, 1, customer, n1, n2, phase if phase != free else serving1)
            if phase == free:
                phase = serving1
                in_service = (customer, now)
                next_departure = now + draw() / mu
                if trace is not None:
                    _trace(trace, replication, now, EVENT_SERVICE_START, 1, customer, n1, n2, phase)
            else:
                queue1.append((customer, now))
        elif kind == 2:
            customer += 1
            n2 += 1
            next2 = now + draw() / lambda2
            if trace is not None:
                _trace(trace, replication, now, EVENT_ARRIVAL, 2, customer, n1, n2, phase if phase != free else serving2)
            if phase == free:
                phase = serving2
                in_service = (customer, now)
                next_departure = now + draw() / mu
                if trace is not None:
                    _trace(trace, replication, now, EVENT_SERVICE_START, 2, customer, n1, n2, phase)
            else:
                queue2.append((customer, now))
        else:
            departures += 1
            done, arrived = in_service
            done_class = 1 if phase == serving1 else 2
            if done_class == 1:
                n1 -= 1
                if measuring:
                    sojourn1 += now - arrived
                    count1 += 1
            else:
                n2 -= 1
                if measuring:
                    sojourn2 += now - arrived
                    count2 += 1

            if queue1:
                phase = serving1
                in_service = queue1.popleft()
                next_departure = now + draw() / mu
            elif queue2:
                phase = serving2
                in_service = queue2.popleft()
                next_departure = now + draw() / mu
            else:
                phase = free
                in_service = None
                next_departure = inf
            if trace is not None:
                _trace(trace, replication, now, EVENT_DEPARTURE, done_class, done, n1, n2, phase)
                if in_service is not None:
                    _trace(trace, replication, now, EVENT_SERVICE_START, phase, in_service[0], n1, n2, phase)

            if not measuring and departures == warmup:
                measuring = True
                start = now

    measured = idle + busy1 + busy2
    logger.debug(
        "replication %d: %d departures, measured time %.6g", replication, departures, now - start
    )
    return ReplicationResult(
        replication=replication,
        p_free=idle / measured,
        p_class1=busy1 / measured,
        p_class2=busy2 / measured,
        l1=area1 / measured,
        l2=area2 / measured,
        w1=sojourn1 / count1 if count1 else math.nan,
        w2=sojourn2 / count2 if count2 else math.nan,
        measured_time=measured,
        departures1=count1,
        departures2=count2,
    )


def _empty_replication(replication):
    return ReplicationResult(
        replication=replication,
        p_free=1.0,
        p_class1=0.0,
        p_class2=0.0,
        l1=0.0,
        l2=0.0,
        w1=math.nan,
        w2=math.nan,
        measured_time=0.0,
        departures1=0,
        departures2=0,
    )


def _run_replication(args):
    params, config, replication = args
    if params.lambda1 == 0.0 and params.lambda2 == 0.0:
        return _empty_replication(replication)
    return _simulate_replication(params, config, replication)


def run(params, config=None, trace=None):
    """
    Simulate ``config.replications`` independent replications and estimate the
    stationary metrics.

    Unstable parameters are simulated but the report is flagged. Results are
    bit-identical for a given ``(params, config)`` whatever the worker count.

    :param trace: optional trace storage receiving one record per event;
      tracing runs replications in this process.
    """
    summary = validate(params)
    config = config or SimConfig()
    if not summary.stable:
        logger.warning("simulating unstable system (rho = %.9g); stationary metrics do not exist", summary.rho)

    jobs = [(params, config, r) for r in range(config.replications)]
    idle_system = params.lambda1 == 0.0 and params.lambda2 == 0.0
    if trace is not None and not idle_system:
        results = [_simulate_replication(params, config, r, trace=trace) for r in range(config.replications)]
    elif config.worker_count > 1 and config.replications > 1 and not idle_system:
        with ProcessPoolExecutor(max_workers=config.worker_count) as executor:
            results = list(executor.map(_run_replication, jobs))
    else:
        results = [_run_replication(job) for job in jobs]

    estimates = {
        name: SimEstimate.from_samples([r.value(name) for r in results], config.confidence)
        for name in METRIC_NAMES
    }
    return SimReport(
        params=params,
        config=config,
        unstable=not summary.stable,
        replications=tuple(results),
        **estimates,
    )


def littles_law_check(report, params):
    """
    Compare ``L`` with ``lambda * W`` per class.

    The discrepancy ``|L - lambda W| / L`` is judged against the combined
    relative half-width ``(hw(L) + lambda hw(W)) / L``. Classes without
    arrivals are not applicable and unstable reports are skipped.
    """

    def check(length, sojourn, rate):
        if rate == 0.0 or not length.mean > 0.0 or not math.isfinite(sojourn.mean):
            return LittleCheck(applicable=False)
        discrepancy = abs(length.mean - rate * sojourn.mean) / length.mean
        if length.half_width is None or sojourn.half_width is None:
            bound = math.nan
        else:
            bound = (length.half_width + rate * sojourn.half_width) / length.mean
        return LittleCheck(applicable=True, discrepancy=discrepancy, bound=bound)

    if report.unstable:
        na = LittleCheck(applicable=False)
        return LittlesLawCheck(class1=na, class2=na, skipped=True)
    return LittlesLawCheck(
        class1=check(report.l1, report.w1, params.lambda1),
        class2=check(report.l2, report.w2, params.lambda2),
    )


def audit_trace(records):
    """
    Check an event trace against the service discipline.

    Returns a list of violation messages, empty for a clean trace. The audit
    verifies that a service is never interrupted or overlapped, that a class-2
    service never starts while a class-1 customer waits, and that each class
    is served in arrival order.
    """
    violations = []
    by_replication = {}
    for record in records:
        by_replication.setdefault(record["replication"], []).append(record)

    for replication, events in sorted(by_replication.items()):
        waiting = {1: deque(), 2: deque()}
        in_service = None
        for record in events:
            where = f"replication {replication} t={record['time']:.9g}"
            event, cls, cust = record["event"], record["class"], record["customer"]
            if event == EVENT_ARRIVAL:
                waiting[cls].append(cust)
            elif event == EVENT_SERVICE_START:
                if in_service is not None:
                    violations.append(f"{where}: customer {cust} started while {in_service[1]} in service")
                if cls == 2 and waiting[1]:
                    violations.append(f"{where}: class-2 customer {cust} started with class 1 waiting")
                if not waiting[cls] or waiting[cls][0] != cust:
                    violations.append(f"{where}: class-{cls} customer {cust} served out of arrival order")
                    if cust in waiting[cls]:
                        waiting[cls].remove(cust)
                else:
                    waiting[cls].popleft()
                in_service = (cls, cust)
            elif event == EVENT_DEPARTURE:
                if in_service != (cls, cust):
                    violations.append(f"{where}: customer {cust} departed without being in service")
                in_service = None
            else:
                violations.append(f"{where}: unknown event {event!r}")
    return violations
