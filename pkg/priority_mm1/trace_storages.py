import json
import os
import tempfile
from uuid import uuid4


class BaseTraceStorage:
    """
    Sink for simulator event records.

    A record is a flat ``dict`` (time, event, class, customer id and the state
    after the event). Storages keep records in arrival order.
    """

    def __init__(self, **kwargs):
        self.name = kwargs.get("name", None)
        self.encoding = kwargs.get("encoding", "utf-8")

    def save(self, record):
        raise NotImplementedError

    def read(self):
        raise NotImplementedError

    def remove(self):
        raise NotImplementedError

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class TempFolderTraceStorage(BaseTraceStorage):
    """Line-delimited JSON file in the system temp folder."""

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.folder = kwargs.get("folder", None)
        self._file = None

    def save(self, record):
        if self._file is None:
            self._file = self._open(mode="a")
        self._file.write(json.dumps(record, sort_keys=True))
        self._file.write("\n")

    def read(self):
        self.close()
        if not self.name:
            return []
        with self._open(mode="r") as file:
            return [json.loads(line) for line in file if line.strip()]

    def remove(self):
        self.close()
        if self.name and os.path.exists(self.get_full_path()):
            os.remove(self.get_full_path())

    def close(self):
        if self._file is not None:
            self._file.close()
            self._file = None

    def get_full_path(self):
        return os.path.join(self.folder or tempfile.gettempdir(), self.name)

    def _open(self, mode="r"):
        if not self.name:
            self.name = f"priority-mm1-trace-{uuid4().hex}.jsonl"
        return open(self.get_full_path(), mode, encoding=self.encoding)


class MemoryTraceStorage(BaseTraceStorage):
    """
    Keeps records in a list. Convenient for tests and audits of short runs;
    a long replication produces millions of records.
    """

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.records = []

    def save(self, record):
        self.records.append(dict(record))

    def read(self):
        return list(self.records)

    def remove(self):
        self.records = []
