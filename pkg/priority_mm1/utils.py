import math


def one_sided_derivative(func, x, h, order=1):
    """
    Backward finite difference of ``func`` at ``x`` with step ``h``.

    Only points ``<= x`` are evaluated, so functions defined on ``[0, 1]`` can
    be differentiated at 1. ``order`` is 1 or 2.
    """
    if order == 1:
        return (func(x) - func(x - h)) / h
    if order == 2:
        return (func(x) - 2.0 * func(x - h) + func(x - 2.0 * h)) / (h * h)
    raise ValueError("order must be 1 or 2")


def richardson_derivative(func, x, h, order=1):
    """
    Richardson-extrapolated one-sided derivative on steps ``h`` and ``h/2``.

    Both backward stencils have a leading error linear in ``h``, which the
    combination ``2 D(h/2) - D(h)`` cancels.
    """
    coarse = one_sided_derivative(func, x, h, order=order)
    fine = one_sided_derivative(func, x, h / 2.0, order=order)
    return 2.0 * fine - coarse


def round_significant(value, digits=9):
    """
    Return ``value`` rounded to ``digits`` significant digits.

    ``None`` and non-finite values are returned unchanged.
    """
    if value is None or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")
