import json
import logging

import tablib
from tablib.formats import registry

from ..utils import round_significant

logger = logging.getLogger(__name__)


class Format:
    """Renders an :class:`~priority_mm1.results.ExportDocument` as text."""

    #: value of the ``--format`` option
    name = None

    def export_document(self, document, **kwargs):
        """
        Returns format representation for given document.
        """
        raise NotImplementedError()

    @classmethod
    def is_available(cls):
        return True


class TablibFormat(Format):
    TABLIB_MODULE = None

    def get_format(self):
        """
        Import and returns tablib module.
        """
        if not self.TABLIB_MODULE:
            raise AttributeError("TABLIB_MODULE must be defined")
        key = self.TABLIB_MODULE.split(".")[-1].replace("_", "")
        return registry.get_format(key)

    @classmethod
    def is_available(cls):
        try:
            cls().get_format()
        except (tablib.core.UnsupportedFormat, ImportError):
            return False
        return True

    def get_title(self):
        return self.get_format().title

    def export_data(self, dataset, **kwargs):
        return dataset.export(self.get_title(), **kwargs)

    def export_datasets(self, document):
        return [
            section.resource.export(section.objects) for section in document.sections
        ]


class CSV(TablibFormat):
    """
    Comma separated tables, ``.`` decimals, header row always present.
    Further sections follow the metrics table after a blank line.
    """

    name = "csv"
    TABLIB_MODULE = "tablib.formats._csv"

    def export_document(self, document, **kwargs):
        kwargs.setdefault("lineterminator", "\n")
        tables = [self.export_data(dataset, **kwargs) for dataset in self.export_datasets(document)]
        return "\n".join(tables)


class TEXT(TablibFormat):
    """Aligned tables for reading in a terminal; not meant for parsing."""

    name = "text"
    TABLIB_MODULE = "tablib.formats._cli"

    def export_document(self, document, **kwargs):
        kwargs.setdefault("tablefmt", "simple")
        kwargs.setdefault("disable_numparse", True)
        parts = []
        if document.params is not None:
            parts.append(f"{document.engine}: {document.params}")
        for dataset in self.export_datasets(document):
            parts.append(f"[{dataset.title}]")
            parts.append(self.export_data(dataset, **kwargs))
        if document.diagnostics:
            parts.append("[diagnostics]")
            parts.extend(f"{key}: {_text_value(value)}" for key, value in document.diagnostics.items())
        return "\n".join(parts) + "\n"


def _text_value(value):
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        return round_significant(value) if value == value else None
    if isinstance(value, dict):
        return {key: _json_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(item) for item in value]
    return value


class JSON(Format):
    """
    The schema-stable document ``{params, engine, metrics, diagnostics}``.

    ``metrics`` holds the first section: one mapping for a single object, a
    mapping keyed by ``Meta.json_key`` when the resource declares one, and a
    list of mappings otherwise. Columns listed in ``Meta.diagnostics`` and any
    further sections are reported under ``diagnostics``.
    """

    name = "json"

    def _section_rows(self, section):
        resource = section.resource.__class__(coerce_to_string=False)
        dataset = resource.export(section.objects)
        return resource, [dict(zip(dataset.headers, row)) for row in dataset]

    def export_document(self, document, **kwargs):
        resource, rows = self._section_rows(document.main)
        diagnostics = {}
        moved = resource.get_diagnostic_columns()
        if moved:
            for row in rows:
                for column in moved:
                    diagnostics[column] = row.pop(column)

        key = resource._meta.json_key
        if key is not None:
            metrics = {row.pop(key): row for row in rows}
        elif len(rows) == 1:
            metrics = rows[0]
        else:
            metrics = rows

        diagnostics.update(_json_value(document.diagnostics))
        for section in document.sections[1:]:
            extra, extra_rows = self._section_rows(section)
            diagnostics[extra.get_display_name()] = extra_rows

        params = document.params.as_dict() if document.params is not None else None
        payload = {
            "params": _json_value(params),
            "engine": document.engine,
            "metrics": metrics,
            "diagnostics": diagnostics,
        }
        kwargs.setdefault("indent", 2)
        return json.dumps(payload, **kwargs) + "\n"


#: Output formats by their ``--format`` name.
DEFAULT_FORMATS = {fmt.name: fmt for fmt in (JSON, CSV, TEXT) if fmt.is_available()}


def get_format(name):
    try:
        return DEFAULT_FORMATS[name]()
    except KeyError:
        raise ValueError(f"unknown format {name!r}; choose from {sorted(DEFAULT_FORMATS)}")
