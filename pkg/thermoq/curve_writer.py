import json
import logging
import os
import tempfile
from typing import List

import numpy as np
import pandas as pd

from thermoq.analysis import CurveTable, ResultTable
from thermoq.errors import ConfigError, OutputError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
# 17 significant digits identify every double uniquely
FLOAT_FORMAT = "%.17g"


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


class CurveWriter:
    """
    Serialises CurveTables to CSV or JSON and writes them atomically
    (temporary file in the target directory, then rename).
    """

    def __init__(self, fmt: str = "csv"):
        if fmt not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}, got '{fmt}'")
        self.fmt = fmt

    def to_csv_text(self, table: ResultTable) -> str:
        """
        Header row with the column names, comma separated values, '\\n' line endings.

        Return:
            str: the CSV document
        """
        return table.frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    def to_json_text(self, table: ResultTable) -> str:
        document = {"label": table.label, "columns": table.columns, "meta": table.meta}
        return json.dumps(document, indent=2, default=_json_default) + "\n"

    def render(self, table: ResultTable) -> str:
        if self.fmt == "csv":
            return self.to_csv_text(table)
        return self.to_json_text(table)

    @staticmethod
    def from_json_text(text: str, table_type=CurveTable) -> ResultTable:
        document = json.loads(text)
        frame = pd.DataFrame(document["columns"])
        return table_type(label=document["label"], frame=frame, meta=document.get("meta", {}))

    def _atomic_write(self, path: str, text: str):
        directory = os.path.dirname(os.path.abspath(path))
        tmp_path = None
        try:
            os.makedirs(directory, exist_ok=True)
            with tempfile.NamedTemporaryFile(
                "w", dir=directory, delete=False, suffix=".tmp", newline=""
            ) as handle:
                tmp_path = handle.name
                handle.write(text)
            os.replace(tmp_path, path)
        except OSError as e:
            if tmp_path and os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise OutputError(f"could not write {path}: {e}") from e
        logger.info("wrote %s", path)

    def write(self, tables: List[ResultTable], output_path: str) -> List[str]:
        """
        Writes one file per table. A single table goes to output_path itself when it
        carries a file suffix; otherwise output_path is a directory and every table
        becomes <label>.<fmt> inside it.

        Return:
            List[str]: the written paths, in table order
        """
        if len(tables) == 1 and os.path.splitext(output_path)[1]:
            targets = [output_path]
        else:
            targets = [os.path.join(output_path, f"{t.label}.{self.fmt}") for t in tables]
        for table, target in zip(tables, targets):
            self._atomic_write(target, self.render(table))
        return targets
