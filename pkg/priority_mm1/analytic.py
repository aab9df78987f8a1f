"""
Closed-form engine for the two-class non-preemptive priority M/M/1 queue.

The joint generating function of the class counts is split by server phase::

    F(z1, z2) = F1(z1, z2) + F2(z1, z2) + p000

where ``F1`` collects states with a class-1 customer in service and ``F2``
states with a class-2 customer in service. Both are expressed through the
boundary function ``F0_2(z2) = sum_j p(0, j, 2) z2**j``, which is pinned down
by requiring the numerator of ``F1`` to vanish at the in-disk root ``f(z2)``
of the characteristic quadratic

    lambda1 * z**2 - (lambda1 + lambda2 * (1 - z2) + mu) * z + mu = 0

All arguments are real and restricted to ``[0, 1]``; there the discriminant
is at least ``(mu - lambda1)**2`` so no complex arithmetic is needed.
"""
import logging
import math
from dataclasses import dataclass

from .conf import settings
from .exceptions import DomainError
from .model import require_stable
from .utils import richardson_derivative

logger = logging.getLogger(__name__)

#: Base step of the extrapolated derivative of the boundary function.
BOUNDARY_DERIVATIVE_STEP = 1e-3

#: Base step of the extrapolated derivatives of the root ``f``.
ROOT_DERIVATIVE_STEP = 1e-4

#: Base step of the extrapolated derivatives of the joint PGF.
PGF_DERIVATIVE_STEP = 1e-3

VARIANT_PAPER = "paper"
VARIANT_NUMERIC = "numeric"
VARIANT_SERIES = "series"
BOUNDARY_DERIVATIVE_VARIANTS = (VARIANT_PAPER, VARIANT_NUMERIC, VARIANT_SERIES)

ROUTE_CLOSED_FORM = "closed_form"
ROUTE_CONSERVATION = "conservation"
ROUTE_PGF_DERIVATIVE = "pgf_derivative"
ROUTE_PAPER = "paper"
ROUTE_PRIORITY_FORMULA = "priority_formula"
CLASS1_ROUTES = (ROUTE_CLOSED_FORM, ROUTE_PGF_DERIVATIVE)
CLASS2_ROUTES = (
    ROUTE_CONSERVATION,
    ROUTE_PGF_DERIVATIVE,
    ROUTE_PAPER,
    ROUTE_PRIORITY_FORMULA,
)


@dataclass(frozen=True)
class RootInfo:
    """
    The in-disk root ``f`` of the characteristic quadratic at ``z2``.

    ``complement`` is ``1 - f`` computed without cancellation; ``residual`` is
    the absolute value of the quadratic at ``f``.
    """

    z2: float
    f: float
    residual: float
    complement: float


@dataclass(frozen=True)
class ServerOccupancy:
    p_class1: float
    p_class2: float
    p_free: float


@dataclass(frozen=True)
class MeanLengths:
    l1: float
    l2: float
    l_total: float


@dataclass(frozen=True)
class BoundaryFunctionValues:
    f1: float
    fp1: float
    fpp1: float
    F02_at_1: float
    F02_prime_at_1: float


@dataclass(frozen=True)
class AnalyticMetrics:
    """Everything the closed-form engine reports for one parameter set."""

    params: object
    p000: float
    occupancy: ServerOccupancy
    l1: float
    l2_conservation: float
    l2_pgf_derivative: float
    l2_paper: float
    l2_priority_formula: float
    boundary: BoundaryFunctionValues
    F02_prime_paper: float
    F02_prime_series: float
    w1: float
    w2: float

    @property
    def l_total(self):
        return self.l1 + self.l2_conservation


def _check_unit(name, value, allow_zero=True):
    try:
        finite = math.isfinite(value)
    except TypeError:
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not finite or value < 0.0 or value > 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    if not allow_zero and value == 0.0:
        raise DomainError(f"{name} must be positive, got {value!r}")


def _smaller_quadratic_root(a, b, c):
    """
    Root of ``a x**2 + b x + c`` nearer to zero, for real distinct roots.

    Uses ``q = -(b + sign(b) sqrt(disc)) / 2`` and returns ``c / q`` so that
    the small root never comes from subtracting nearly equal numbers. The
    linear case ``a == 0`` is handled.
    """
    if a == 0.0:
        return -c / b
    disc = b * b - 4.0 * a * c
    sign_b = 1.0 if b >= 0.0 else -1.0
    q = -0.5 * (b + sign_b * math.sqrt(disc))
    return c / q


def root_f(params, z2):
    """
    Return the root of the characteristic quadratic inside the unit disk.

    The product of the two roots is ``mu / lambda1 > 1`` under stability, so
    exactly one of them lies in ``[0, 1]``: the smaller. For ``lambda1 = 0``
    the equation is linear and ``f = mu / B``.
    """
    require_stable(params, "root_f")
    _check_unit("z2", z2)
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu

    w = 1.0 - z2
    b = lambda1 + lambda2 * w + mu
    f = mu / b if lambda1 == 0.0 else _smaller_quadratic_root(lambda1, -b, mu)
    # f(1) = 1 exactly; rounding in the discriminant can overshoot by an ulp
    f = min(f, 1.0)

    # the same root shifted to g = 1 - f:
    # lambda1 g**2 + (mu - lambda1 + lambda2 w) g - lambda2 w = 0, g >= 0
    complement = _smaller_quadratic_root(lambda1, mu - lambda1 + lambda2 * w, -lambda2 * w)
    complement = max(complement, 0.0)

    residual = abs(lambda1 * f * f - b * f + mu)
    if residual > settings.ROOT_TOLERANCE * mu * mu:
        logger.warning("root residual %.3g at z2=%r exceeds tolerance", residual, z2)
    return RootInfo(z2=z2, f=f, residual=residual, complement=complement)


def _f02_at_1(params):
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    # limit of the boundary function at z2 = 1, p000 = (mu - lambda1 - lambda2) / mu
    # substituted; simplifies to lambda2 / (mu + lambda1)
    return mu * lambda2 * params.p000 / ((lambda1 + mu) * (mu - lambda1 - lambda2))


def _f02_over_z2(params, z2):
    """
    ``F0_2(z2) / z2`` away from ``z2 = 1``, finite at ``z2 = 0``.

    At the root, ``lambda1 (1 - f) + lambda2 (1 - z2) + mu = mu / f``, which
    turns the boundary function into
    ``mu z2 (1 - f) p000 / (a f (f - z2))`` with
    ``a = lambda1 + lambda2 (1 - z2) + mu``. ``1 - f`` and
    ``f - z2 = (1 - z2) - (1 - f)`` are formed from the complement so the
    ratio keeps full precision as ``z2`` approaches 1.
    """
    root = root_f(params, z2)
    w = 1.0 - z2
    a = params.lambda1 + params.lambda2 * w + params.mu
    g = root.complement
    return params.mu * g * params.p000 / (a * root.f * (w - g))


def _f02_prime_numeric(params):
    at_one = _f02_at_1(params)

    def boundary(z2):
        if z2 == 1.0:
            return at_one
        return z2 * _f02_over_z2(params, z2)

    return richardson_derivative(boundary, 1.0, BOUNDARY_DERIVATIVE_STEP)


def _f02_prime_paper(params):
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    bracket = (
        lambda1**3
        + lambda1**2 * (3 * lambda2 - mu)
        + mu**3
        + lambda1 * (2 * lambda2**2 * mu - lambda2 * mu - mu**2)
    )
    return (mu * lambda2 * bracket) / (
        (mu + lambda1) ** 2 * (mu - lambda1) * (mu - lambda1 - lambda2)
    )


def _f02_prime_series(params):
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    slack = mu - lambda1 - lambda2
    return _f02_at_1(params) * (
        slack / (mu - lambda1)
        + lambda2 / (mu + lambda1)
        + mu * lambda2 / ((mu - lambda1) * slack)
    )


def F0_2_prime_at_1(params, variant=VARIANT_NUMERIC):
    """
    Derivative of the boundary function at ``z2 = 1``.

    ``"paper"`` evaluates the literal closed form term by term,
    ``"numeric"`` extrapolates one-sided differences of the boundary function
    on steps ``h`` and ``h/2`` (``h = 1e-3``) and ``"series"`` is the exact
    first-order expansion in ``f(1)``, ``f'(1)`` and ``f''(1)``. The literal
    form is not expected to agree with the other two.
    """
    require_stable(params, "F0_2_prime_at_1")
    if variant == VARIANT_PAPER:
        return _f02_prime_paper(params)
    if variant == VARIANT_NUMERIC:
        return _f02_prime_numeric(params)
    if variant == VARIANT_SERIES:
        return _f02_prime_series(params)
    raise ValueError(
        f"variant must be one of {BOUNDARY_DERIVATIVE_VARIANTS}, got {variant!r}"
    )


def boundary_values(params):
    require_stable(params, "boundary_values")
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    return BoundaryFunctionValues(
        f1=root_f(params, 1.0).f,
        fp1=lambda2 / (mu - lambda1),
        fpp1=2.0 * mu * lambda2**2 / (mu - lambda1) ** 3,
        F02_at_1=_f02_at_1(params),
        F02_prime_at_1=_f02_prime_numeric(params),
    )


def root_derivatives_numeric(params):
    """
    ``(f'(1), f''(1))`` by extrapolated backward differences, a check on the
    closed forms in :func:`boundary_values`.
    """
    require_stable(params, "root_derivatives_numeric")

    def minus_complement(z2):
        # f = 1 - g
        return -root_f(params, z2).complement

    return (
        richardson_derivative(minus_complement, 1.0, ROOT_DERIVATIVE_STEP, order=1),
        richardson_derivative(minus_complement, 1.0, ROOT_DERIVATIVE_STEP, order=2),
    )


def _boundary_terms(params, z2):
    """Return ``(F0_2(z2), F0_2(z2) / z2)`` honouring the guard band at 1."""
    if abs(1.0 - z2) < settings.GUARD_BAND:
        value = _f02_at_1(params) + _f02_prime_numeric(params) * (z2 - 1.0)
        return value, value / z2
    over_z2 = _f02_over_z2(params, z2)
    return z2 * over_z2, over_z2


def F0_2(params, z2):
    """
    Boundary function ``sum_j p(0, j, 2) z2**j``.

    Within the guard band around ``z2 = 1`` both numerator and denominator
    vanish; the limit plus a first-order correction is returned there.
    """
    require_stable(params, "F0_2")
    _check_unit("z2", z2)
    return _boundary_terms(params, z2)[0]


def pgf_F2(params, z1, z2):
    """Generating function of the states with a class-2 customer in service."""
    require_stable(params, "pgf_F2")
    _check_unit("z1", z1)
    _check_unit("z2", z2)
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    a = lambda1 + lambda2 * (1.0 - z2) + mu
    denominator = lambda1 * (1.0 - z1) + lambda2 * (1.0 - z2) + mu
    return a * F0_2(params, z2) / denominator


def pgf_F1(params, z1, z2):
    """
    Generating function of the states with a class-1 customer in service.

    The denominator ``lambda1 (1 - z1) + lambda2 (1 - z2) + mu (1 - 1/z1)``
    vanishes at ``z1 = f(z2)``, where the numerator vanishes too. Inside the
    guard band the ratio of ``z1``-derivatives is used, with a first-order
    correction in ``z1 - f(z2)``.
    """
    require_stable(params, "pgf_F1")
    _check_unit("z1", z1, allow_zero=False)
    _check_unit("z2", z2)
    lambda1, lambda2, mu, p000 = params.lambda1, params.lambda2, params.mu, params.p000

    w = 1.0 - z2
    a = lambda1 + lambda2 * w + mu
    f02, f02_over_z2 = _boundary_terms(params, z2)
    r = root_f(params, z2).f

    delta = z1 - r
    if abs(delta) < settings.GUARD_BAND:
        d2 = lambda1 * (1.0 - r) + lambda2 * w + mu
        n1 = a * mu * f02_over_z2 * lambda1 / d2**2 + lambda1 * p000
        n2 = 2.0 * a * mu * f02_over_z2 * lambda1**2 / d2**3
        m1 = mu / r**2 - lambda1
        m2 = -2.0 * mu / r**3
        logger.debug("pgf_F1 guard band at z1=%r, z2=%r", z1, z2)
        return n1 / m1 + delta * (n2 * m1 - n1 * m2) / (2.0 * m1**2)

    d2 = lambda1 * (1.0 - z1) + lambda2 * w + mu
    numerator = (
        a * mu * f02_over_z2 / d2 - a * f02 - (lambda1 * (1.0 - z1) + lambda2 * w) * p000
    )
    return numerator / (d2 - mu / z1)


def pgf_joint(params, z1, z2):
    """
    Joint generating function of ``(N1, N2)``.

    At ``z1 = 0`` only states without class-1 customers contribute, so the
    class-1-in-service part is taken as its limit 0.
    """
    require_stable(params, "pgf_joint")
    _check_unit("z1", z1)
    _check_unit("z2", z2)
    f1 = 0.0 if z1 == 0.0 else pgf_F1(params, z1, z2)
    return f1 + pgf_F2(params, z1, z2) + params.p000


def server_occupancy(params):
    require_stable(params, "server_occupancy")
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    return ServerOccupancy(
        p_class1=lambda1 / mu,
        p_class2=lambda2 / mu,
        p_free=(mu - lambda1 - lambda2) / mu,
    )


def mean_length_class1(params, route=ROUTE_CLOSED_FORM):
    require_stable(params, "mean_length_class1")
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    if route == ROUTE_CLOSED_FORM:
        return lambda1 * (mu + lambda2) / (mu * (mu - lambda1))
    if route == ROUTE_PGF_DERIVATIVE:
        return richardson_derivative(
            lambda z1: pgf_joint(params, z1, 1.0), 1.0, PGF_DERIVATIVE_STEP
        )
    raise ValueError(f"route must be one of {CLASS1_ROUTES}, got {route!r}")


def _l2_paper(params):
    lambda1, lambda2, mu = params.lambda1, params.lambda2, params.mu
    first = (lambda1**2 * lambda2 + mu**3 + lambda1 * (2 * lambda2**2 + mu**2)) / (
        mu**2 * (lambda1 + mu)
    )
    second = (
        mu
        * (
            mu**3
            + lambda1**3
            + lambda1**2 * (3 * lambda2 - mu)
            + lambda1 * (2 * lambda2**2 - mu * lambda2 - mu**2)
        )
        / ((mu**2 - lambda1**2) * (mu - lambda1 - lambda2) ** 2)
    )
    return first + second


def mean_length_class2(params, route=ROUTE_CONSERVATION):
    """
    Mean number of class-2 customers in the system.

    ``"conservation"`` subtracts ``L1`` from the ordinary M/M/1 total
    ``rho / (1 - rho)``: both classes share one exponential server and the
    discipline is work conserving. ``"pgf_derivative"`` differentiates the
    joint PGF numerically, ``"paper"`` evaluates the literal closed form
    verbatim and ``"priority_formula"`` uses the mean-residual-work result
    ``rho2 (1 + rho / ((1 - rho1) (1 - rho)))``.
    """
    summary = require_stable(params, "mean_length_class2")
    rho = summary.rho
    if route == ROUTE_CONSERVATION:
        return rho / (1.0 - rho) - mean_length_class1(params)
    if route == ROUTE_PGF_DERIVATIVE:
        return richardson_derivative(
            lambda z2: pgf_joint(params, 1.0, z2), 1.0, PGF_DERIVATIVE_STEP
        )
    if route == ROUTE_PAPER:
        return _l2_paper(params)
    if route == ROUTE_PRIORITY_FORMULA:
        return summary.rho2 * (1.0 + rho / ((1.0 - summary.rho1) * (1.0 - rho)))
    raise ValueError(f"route must be one of {CLASS2_ROUTES}, got {route!r}")


def mean_lengths(params, route=ROUTE_CONSERVATION):
    l1 = mean_length_class1(params)
    l2 = mean_length_class2(params, route=route)
    return MeanLengths(l1=l1, l2=l2, l_total=l1 + l2)


def mean_sojourn(params):
    """
    Mean time in system per class by Little's law; NaN for a class that
    never arrives.
    """
    l1 = mean_length_class1(params)
    l2 = mean_length_class2(params)
    w1 = l1 / params.lambda1 if params.lambda1 > 0 else math.nan
    w2 = l2 / params.lambda2 if params.lambda2 > 0 else math.nan
    return w1, w2


def evaluate(params):
    """Run every closed-form operation for ``params``."""
    require_stable(params, "evaluate")
    w1, w2 = mean_sojourn(params)
    return AnalyticMetrics(
        params=params,
        p000=params.p000,
        occupancy=server_occupancy(params),
        l1=mean_length_class1(params),
        l2_conservation=mean_length_class2(params, ROUTE_CONSERVATION),
        l2_pgf_derivative=mean_length_class2(params, ROUTE_PGF_DERIVATIVE),
        l2_paper=mean_length_class2(params, ROUTE_PAPER),
        l2_priority_formula=mean_length_class2(params, ROUTE_PRIORITY_FORMULA),
        boundary=boundary_values(params),
        F02_prime_paper=F0_2_prime_at_1(params, VARIANT_PAPER),
        F02_prime_series=F0_2_prime_at_1(params, VARIANT_SERIES),
        w1=w1,
        w2=w2,
    )
