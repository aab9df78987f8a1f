"""
Model parameters, server phases and system states of the two-class
non-preemptive priority M/M/1 queue.

Class-1 customers have non-preemptive priority over class-2 customers; within
a class service is first-come first-served. A state is the triple
``(n1, n2, phase)`` where the customer in service is counted in its class.
"""
import enum
import logging
import math
from dataclasses import dataclass

from .exceptions import ParameterError, StabilityError

logger = logging.getLogger(__name__)


class ServerPhase(enum.IntEnum):
    """What the server is doing; the integer value is the phase code."""

    FREE = 0
    SERVING_CLASS1 = 1
    SERVING_CLASS2 = 2


@dataclass(frozen=True)
class ModelParams:
    """
    Arrival rates of both classes and the common service rate.

    Construction does not validate; call :func:`validate` (every engine does).
    """

    lambda1: float
    lambda2: float
    mu: float

    @property
    def rho1(self):
        return self.lambda1 / self.mu

    @property
    def rho2(self):
        return self.lambda2 / self.mu

    @property
    def rho(self):
        return self.rho1 + self.rho2

    @property
    def p000(self):
        """Stationary probability of the empty system, ``1 - rho``."""
        return (self.mu - self.lambda1 - self.lambda2) / self.mu

    def as_dict(self):
        return {"lambda1": self.lambda1, "lambda2": self.lambda2, "mu": self.mu}

    def __str__(self):
        return f"lambda1={self.lambda1:g}, lambda2={self.lambda2:g}, mu={self.mu:g}"


@dataclass(frozen=True)
class TrafficSummary:
    rho1: float
    rho2: float
    rho: float
    stable: bool


@dataclass(frozen=True)
class SystemState:
    n1: int
    n2: int
    phase: ServerPhase

    def __iter__(self):
        return iter((self.n1, self.n2, int(self.phase)))

    def __str__(self):
        return f"({self.n1},{self.n2},{int(self.phase)})"


def validate(params):
    """
    Check parameter domains and return the traffic summary.

    :raises ParameterError: for non-finite or negative rates and ``mu <= 0``.
    """
    for name in ("lambda1", "lambda2", "mu"):
        value = getattr(params, name)
        try:
            finite = math.isfinite(value)
        except TypeError:
            raise ParameterError(f"{name} must be a real number, got {value!r}")
        if not finite:
            raise ParameterError(f"{name} must be finite, got {value!r}")
        if value < 0:
            raise ParameterError(f"{name} must be nonnegative, got {value!r}")
    if params.mu == 0:
        raise ParameterError("mu must be positive")

    rho1 = params.lambda1 / params.mu
    rho2 = params.lambda2 / params.mu
    rho = rho1 + rho2
    return TrafficSummary(rho1=rho1, rho2=rho2, rho=rho, stable=rho < 1)


def require_stable(params, operation=None):
    """Validate ``params`` and refuse ``rho >= 1``; returns the summary."""
    summary = validate(params)
    if not summary.stable:
        logger.debug("refusing %s for rho=%s", operation, summary.rho)
        raise StabilityError(summary.rho, operation=operation)
    return summary


def is_valid_state(state):
    """Return ``True`` iff the phase constraints of ``state`` hold."""
    n1, n2, phase = state.n1, state.n2, state.phase
    if n1 < 0 or n2 < 0:
        return False
    if phase == ServerPhase.FREE:
        return n1 == 0 and n2 == 0
    if phase == ServerPhase.SERVING_CLASS1:
        return n1 >= 1
    if phase == ServerPhase.SERVING_CLASS2:
        return n2 >= 1
    return False
