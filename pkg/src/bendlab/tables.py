"""Result tables: named columns, CSV serialization, atomic writes."""

from __future__ import annotations

import os
import tempfile

from .errors import ConfigError


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int,)):
        return str(v)
    if isinstance(v, str):
        return v
    return "%.9g" % float(v)


class ResultTable:
    """Columns of reals/ints/bools/strings; complex columns split as re/im."""

    def __init__(self):
        self.names: list[str] = []
        self.columns: dict[str, list] = {}

    def add_column(self, name: str, values):
        values = list(values)
        if self.names and len(values) != self.n_rows:
            raise ConfigError(
                f"column {name!r} has {len(values)} rows, table has {self.n_rows}"
            )
        if any(isinstance(v, complex) for v in values):
            self.add_column(name + "_re", [complex(v).real for v in values])
            self.add_column(name + "_im", [complex(v).imag for v in values])
            return
        self.names.append(name)
        self.columns[name] = values

    @property
    def n_rows(self) -> int:
        return len(self.columns[self.names[0]]) if self.names else 0

    def column(self, name: str) -> list:
        return self.columns[name]

    def to_csv(self) -> str:
        lines = [",".join(self.names)]
        for i in range(self.n_rows):
            lines.append(",".join(_fmt(self.columns[n][i]) for n in self.names))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str):
        atomic_write(path, self.to_csv())

    def passed(self) -> bool:
        """True when every *_pass column is all-true (vacuously true without any)."""
        for name in self.names:
            if name.endswith("_pass") and not all(self.columns[name]):
                return False
        return True


def atomic_write(path: str, text: str):
    """Write via a temporary file and rename, so readers never see partials."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
