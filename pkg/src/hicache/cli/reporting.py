"""Output writers for the CLI: CSV tables and versioned JSON documents.

Column order follows the key order of the first row. Floats are written as the shortest
decimal that round-trips, undefined values as empty CSV cells or JSON ``null``.
"""

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from hicache.utils import atomic_write_text, format_float

SCHEMA_VERSION: int = 1


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "" if math.isnan(value) else format_float(value)
    return str(value)


def render_csv(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    """Renders rows as CSV text with a header line."""
    if columns is None:
        columns = list(rows[0]) if rows else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def _json_ready(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    return value


def render_json(document: dict) -> str:
    """Renders a JSON document; non-finite floats become ``null``."""
    return json.dumps(_json_ready(document), indent=2, allow_nan=False) + "\n"


def table_document(command: str, config: dict, rows: Sequence[dict]) -> dict:
    """Versioned JSON envelope of a result table."""
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": config, "rows": rows}


def emit(text: str, path: Optional[Union[str, Path]] = None) -> None:
    """Writes ``text`` atomically to ``path``, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        atomic_write_text(path, text)
