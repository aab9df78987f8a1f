import logging
import math
import numbers

from .utils import round_significant

logger = logging.getLogger(__name__)


def is_missing(value):
    """``None`` and NaN have no export representation."""
    if value is None:
        return True
    return isinstance(value, numbers.Real) and not isinstance(value, bool) and math.isnan(value)


class Widget:
    """
    A Widget renders result values as their export representations.
    """

    def __init__(self, coerce_to_string=True):
        """
        :param coerce_to_string: If True, :meth:`~priority_mm1.widgets.Widget.render`
          will return a string representation of the value, otherwise a
          JSON-compatible python value is returned.
        """
        self.coerce_to_string = coerce_to_string

    def render(self, value):
        """
        Returns an export representation of a python value.

        :return: By default, this value will be a string, with ``None`` values returned
          as empty strings.
        """
        if self.coerce_to_string:
            return "" if value is None else str(value)
        return value


class NumberWidget(Widget):
    """
    Widget for numeric values. NaN renders like ``None``.
    """

    def render(self, value):
        if is_missing(value) or not isinstance(value, numbers.Number):
            return "" if self.coerce_to_string else None
        if self.coerce_to_string:
            return str(value)
        return value


class FloatWidget(NumberWidget):
    """
    Widget for float values, rendered with ``digits`` significant digits.
    """

    def __init__(self, coerce_to_string=True, digits=9):
        super().__init__(coerce_to_string=coerce_to_string)
        self.digits = digits

    def render(self, value):
        if is_missing(value) or not isinstance(value, numbers.Real):
            return "" if self.coerce_to_string else None
        value = float(value)
        if not math.isfinite(value):
            return str(value) if self.coerce_to_string else None
        if self.coerce_to_string:
            return f"{value:.{self.digits}g}"
        return round_significant(value, self.digits)


class IntegerWidget(NumberWidget):
    """
    Widget for integer values.
    """

    def render(self, value):
        if is_missing(value) or not isinstance(value, numbers.Number):
            return "" if self.coerce_to_string else None
        return str(int(value)) if self.coerce_to_string else int(value)


class CharWidget(Widget):
    """
    Widget for text values.
    """

    def render(self, value):
        if self.coerce_to_string:
            return "" if value is None else str(value)
        return value


class BooleanWidget(Widget):
    """
    Widget for flags.

    ``True`` renders as ``true`` and ``False`` as ``false``; ``None`` renders
    as an empty string. :meth:`clean` accepts the common spellings used in
    configuration files.
    """

    TRUE_VALUES = ["true", "1", 1, True, "TRUE", "True", "yes", "on"]
    FALSE_VALUES = ["false", "0", 0, False, "FALSE", "False", "no", "off"]
    NULL_VALUES = ["", None, "null", "NULL", "none", "NONE", "None"]

    def clean(self, value, **kwargs):
        if isinstance(value, str):
            value = value.strip()
        if value in self.NULL_VALUES:
            return None
        if value in self.TRUE_VALUES:
            return True
        if value in self.FALSE_VALUES:
            return False
        raise ValueError(f"not a boolean: {value!r}")

    def render(self, value):
        if self.coerce_to_string is False:
            return value
        if value in self.NULL_VALUES or type(value) is not bool:
            return ""
        return self.TRUE_VALUES[0] if value else self.FALSE_VALUES[0]
