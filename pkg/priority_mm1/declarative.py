import logging
from collections import OrderedDict
from copy import deepcopy

from .exceptions import FieldError
from .fields import Field
from .options import ResourceOptions

logger = logging.getLogger(__name__)


class DeclarativeMetaclass(type):
    def __new__(cls, name, bases, attrs):
        def _load_meta_options(base_, meta_):
            options = getattr(base_, "Meta", None)

            for option in [
                option
                for option in dir(options)
                if not option.startswith("_") and hasattr(options, option)
            ]:
                setattr(meta_, option, getattr(options, option))

        declared_fields = []
        meta = ResourceOptions()

        # If this class is subclassing another Resource, add that Resource's
        # fields. Note that we loop over the bases in *reverse*. This is
        # necessary in order to preserve the correct order of fields.
        for base in bases[::-1]:
            if hasattr(base, "fields"):
                declared_fields = list(base.fields.items()) + declared_fields
                # If there are any parent classes, set those options first
                for parent in base.__bases__:
                    _load_meta_options(parent, meta)
                _load_meta_options(base, meta)

        # Add direct fields
        for field_name, obj in attrs.copy().items():
            if isinstance(obj, Field):
                field = attrs.pop(field_name)
                if not field.column_name:
                    field.column_name = field_name
                declared_fields.append((field_name, field))

        new_class = super().__new__(cls, name, bases, attrs)
        _load_meta_options(new_class, meta)
        new_class._meta = meta

        fields = OrderedDict(declared_fields)
        if meta.fields is not None:
            fields = OrderedDict(
                (field_name, field)
                for field_name, field in fields.items()
                if field_name in meta.fields or field.column_name in meta.fields
            )
        if meta.exclude:
            fields = OrderedDict(
                (field_name, field)
                for field_name, field in fields.items()
                if field_name not in meta.exclude
            )

        for field_name, kwargs in (meta.widgets or {}).items():
            if field_name not in fields:
                logger.debug("widget options for undeclared field %s", field_name)
                raise FieldError(f"{name}: no field named '{field_name}' for widget options")
            field = fields[field_name] = deepcopy(fields[field_name])
            for key, value in kwargs.items():
                setattr(field.widget, key, value)

        new_class.fields = fields
        return new_class
