from collections.abc import Mapping

from . import widgets
from .exceptions import FieldError


class Field:
    """
    ``Field`` represents a mapping between a result object and one column of
    its export.

    :param attribute: A string of either an attribute, a mapping key or a
        callable of the object. ``__`` separates the steps of a path, e.g.
        ``"occupancy__p_free"``.

    :param column_name: An optional column name for the column that represents
        this field in the export.

    :param widget: Defines a widget that will be used to represent this
        field's data in the export.

    :param default: Returned by :meth:`get_value` when the path ends in ``None``.

    :param dehydrate_method: Lets you choose your own method for dehydration rather
        than using `dehydrate_{field_name}` syntax.
    """

    def __init__(
        self,
        attribute=None,
        column_name=None,
        widget=None,
        default=None,
        dehydrate_method=None,
    ):
        self.attribute = attribute
        self.default = default
        self.column_name = column_name
        if not widget:
            widget = widgets.Widget()
        self.widget = widget
        self.dehydrate_method = dehydrate_method

    def __repr__(self):
        """
        Displays the module, class and name of the field.
        """
        path = "%s.%s" % (self.__class__.__module__, self.__class__.__name__)
        column_name = getattr(self, "column_name", None)
        if column_name is not None:
            return "<%s: %s>" % (path, column_name)
        return "<%s>" % path

    def get_value(self, obj):
        """
        Returns the value found at the end of the attribute path.
        """
        if self.attribute is None:
            return None

        value = obj
        for attr in self.attribute.split("__"):
            if isinstance(value, Mapping):
                value = value.get(attr)
            else:
                value = getattr(value, attr, None)
            if value is None:
                return self.default

        if callable(value):
            value = value()
        return value

    def export(self, obj):
        """
        Returns value from the provided object converted to export
        representation.
        """
        value = self.get_value(obj)
        return self.widget.render(value)

    def get_dehydrate_method(self, field_name=None):
        """
        Returns method name to be used for dehydration of the field.
        Defaults to `dehydrate_{field_name}`
        """
        DEFAULT_DEHYDRATE_METHOD_PREFIX = "dehydrate_"

        if not self.dehydrate_method and not field_name:
            raise FieldError("Both dehydrate_method and field_name are not supplied.")

        return self.dehydrate_method or DEFAULT_DEHYDRATE_METHOD_PREFIX + field_name
