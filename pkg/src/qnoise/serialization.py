"""JSON and CSV output for experiment results."""
import csv
import io
import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np

_logger = logging.getLogger(__name__)


class _ExtendedEncoder(json.JSONEncoder):
    """JSON encoder that handles dataclasses, numpy values and complex numbers."""

    def default(self, o: object) -> object | None:
        if is_dataclass(o) and not isinstance(o, type):
            return asdict(o)

        if isinstance(o, complex | np.complexfloating):
            return {"re": float(o.real), "im": float(o.imag)}

        if isinstance(o, np.generic):
            return o.item()

        if isinstance(o, np.ndarray):
            return o.tolist()

        if isinstance(o, Enum):
            return o.value

        if isinstance(o, Path):
            return str(o)

        return json.JSONEncoder.default(self, o)


def dumps(obj: object) -> str:
    return json.dumps(obj, cls=_ExtendedEncoder, indent=2, sort_keys=True) + "\n"


def write_json(path: Path, obj: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    _logger.info("Wrote %s", path)


def format_float(value: float) -> str:
    """Full-precision decimal text (17 significant digits)."""
    return format(float(value), ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    """CSV with a header row and full-precision numbers."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([format_float(value) for value in row] for row in rows)
    return buffer.getvalue()


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    _logger.info("Wrote %s", path)
