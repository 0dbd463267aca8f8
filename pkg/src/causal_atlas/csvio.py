"""Delimited point I/O: 17 significant digits, stable column layouts."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

from .metric import Event
from .nullflow import NullPath

__all__ = ["fmt17", "read_points_csv", "render_embedding_csv", "nullpath_to_csv",
           "PointFileError"]


class PointFileError(ValueError):
    """A points CSV could not be parsed."""


def fmt17(value: float) -> str:
    return format(float(value), ".17g")


def read_points_csv(text: str) -> list[Event]:
    """Parse a points file with header ``t,x``."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise PointFileError("points file is empty")
    header = [cell.strip().lower() for cell in rows[0]]
    if header[:2] != ["t", "x"]:
        raise PointFileError(f"points file must start with header 't,x', got {rows[0]!r}")
    events = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            events.append(Event(float(row[0]), float(row[1])))
        except (IndexError, ValueError):
            raise PointFileError(f"bad point row {lineno}: {row!r}")
    return events


def render_embedding_csv(events: Sequence[Event], results: Sequence[tuple | None],
                         errors: Sequence[str | None], target: str) -> str:
    """Rows ``t,x,tau,X`` or ``t,x,tau,theta,cover_theta``; failures get an
    error column (added only when some row actually failed)."""
    if target == "minkowski":
        columns = ["t", "x", "tau", "X"]
    else:
        columns = ["t", "x", "tau", "theta", "cover_theta"]
    any_error = any(e is not None for e in errors)
    if any_error:
        columns = columns + ["error"]
    lines = [",".join(columns)]
    n_values = len(columns) - (3 if any_error else 2)
    for event, result, error in zip(events, results, errors):
        cells = [fmt17(event.t), fmt17(event.x)]
        if result is None:
            cells.extend([""] * n_values)
        else:
            cells.extend(fmt17(v) for v in result)
        if any_error:
            cells.append(error or "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def nullpath_to_csv(path: NullPath) -> str:
    """A null path as ``t,x`` rows (start to slice crossing)."""
    lines = ["t,x"]
    lines.extend(f"{fmt17(e.t)},{fmt17(e.x)}" for e in path.events)
    return "\n".join(lines) + "\n"
