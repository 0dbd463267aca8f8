"""Run configuration, tolerance defaults and worker fan-out."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Callable, Iterable, Sequence, TypeVar

__all__ = ["RunConfig", "worker_count", "ordered_map", "ENV_THREADS"]

ENV_THREADS = "CAUSAL_ATLAS_THREADS"

T = TypeVar("T")
U = TypeVar("U")


def worker_count(requested: int | None = None) -> int:
    """Effective worker count; the environment variable caps whatever is asked."""
    n = requested if requested and requested > 0 else 1
    cap = os.environ.get(ENV_THREADS, "")
    if cap.strip():
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def ordered_map(fn: Callable[[T], U], items: Sequence[T], workers: int = 1) -> list[U]:
    """Map with optional thread fan-out; results keep the input order."""
    n = worker_count(workers)
    if n <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass
class RunConfig:
    """Effective configuration of one CLI invocation.

    Precedence is CLI flags over config file over these defaults; tolerances
    follow the module defaults, all strictly positive.
    """

    metric: str | None = None
    command: str | None = None
    points: str | None = None
    target: str = ""    # empty = auto: minkowski on line topology, einstein on circle
    samples: int = 500
    seed: int = 0
    grid: tuple[int, int] = (64, 64)
    margin: float | None = None
    out: str | None = None
    report: str | None = None
    figures: str | None = None
    surface_map: str | None = None
    x_window: tuple[float, float] | None = None
    tol_ode: float = 1e-10
    tol_ode_abs: float = 1e-12
    tol_event: float = 1e-12
    tol_causal: float = 1e-7
    tol_conf: float = 1e-4
    max_steps: int = 100_000
    threads: int = 1

    def __post_init__(self):
        for name in ("tol_ode", "tol_ode_abs", "tol_event", "tol_causal", "tol_conf"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must be an unsigned 64-bit value")
        if self.grid[0] < 2 or self.grid[1] < 2:
            raise ValueError("grid must be at least 2x2")

    def merged(self, overrides: dict) -> "RunConfig":
        """A copy with non-None override values applied."""
        known = {f.name for f in fields(self)}
        data = asdict(self)
        for key, value in overrides.items():
            if key not in known:
                raise ValueError(f"unknown config field {key!r}")
            if value is not None:
                data[key] = value
        if isinstance(data.get("grid"), list):
            data["grid"] = tuple(data["grid"])
        if isinstance(data.get("x_window"), list):
            data["x_window"] = tuple(data["x_window"])
        return RunConfig(**data)

    def dump(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)
