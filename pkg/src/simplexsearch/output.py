"""Small helpers for writing CSV and JSON outputs with a provenance header."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__


def config_hash(config: Any) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def provenance(config: Any) -> list[str]:
    return [f"generated-by simplexsearch {__version__}; config-hash {config_hash(config)}"]


def fmt(x: Any) -> Any:
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        return f"{x:.17g}"
    try:
        import numpy as np

        if isinstance(x, np.floating):
            return f"{float(x):.17g}"
        if isinstance(x, np.integer):
            return int(x)
    except ImportError:  # pragma: no cover
        pass
    return x


def table_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def write_json(path: str | Path, doc: Any) -> Path:
    return write_text(path, json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")


def read_csv_rows(text: str) -> list[dict[str, str]]:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))
