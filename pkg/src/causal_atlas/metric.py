"""Two-dimensional Lorentzian metrics in coordinates adapted to the slice t = 0.

A metric lives on R x R (line topology) or R x S^1 (circle topology, stored in
universal-cover coordinates).  Components are scalar callables g_tt, g_tx, g_xx
of (t, x).  Adapted coordinates are required throughout: g_tt < 0, g_xx > 0 and
Lorentzian signature g_tt * g_xx - g_tx^2 < 0, so every {t = const} slice is
spacelike and t increases along future causal curves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, NamedTuple

from .expressions import CompiledExpression, ExpressionError, parse_expression

__all__ = [
    "Topology",
    "Event",
    "Metric2D",
    "MetricSpecError",
    "DomainError",
    "MetricError",
    "Violation",
    "ValidationReport",
    "parse_metric_spec",
    "metric_from_dict",
    "metric_from_string",
    "render_metric_spec",
    "eval_metric",
    "check_lorentzian",
    "builtin_metric",
    "BUILTIN_NAMES",
    "sampling_window",
    "DEFAULT_X_WINDOW",
]

ScalarField = Callable[[float, float], float]

DEFAULT_X_WINDOW = (-5.0, 5.0)
PERIODICITY_TOL = 1e-9


class MetricError(ValueError):
    """The metric violates the Lorentzian/adapted-coordinate contract at a point."""


class MetricSpecError(ValueError):
    """A metric spec document could not be parsed into a metric."""


class DomainError(ValueError):
    """An event lies outside the metric's domain box."""


class Topology(str, Enum):
    LINE = "line"
    CIRCLE = "circle"


class Event(NamedTuple):
    """A spacetime point.  On circle topology x is a universal-cover value."""

    t: float
    x: float


@dataclass(frozen=True)
class Metric2D:
    g_tt: ScalarField
    g_tx: ScalarField
    g_xx: ScalarField
    topology: Topology
    t_range: tuple[float, float]
    period: float | None = None
    x_range: tuple[float, float] | None = None
    label: str = ""
    spec: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.t_range[0] >= self.t_range[1]:
            raise MetricSpecError(f"empty t_range {self.t_range}")
        if self.topology is Topology.CIRCLE:
            if self.period is None or self.period <= 0:
                raise MetricSpecError("circle topology requires a positive period")
        elif self.period is not None:
            raise MetricSpecError("period only makes sense on circle topology")

    def components(self, t: float, x: float) -> tuple[float, float, float]:
        return self.g_tt(t, x), self.g_tx(t, x), self.g_xx(t, x)

    def contains(self, p: Event) -> bool:
        if not (self.t_range[0] <= p.t <= self.t_range[1]):
            return False
        if self.x_range is not None and not (self.x_range[0] <= p.x <= self.x_range[1]):
            return False
        return math.isfinite(p.t) and math.isfinite(p.x)

    def cover(self) -> "Metric2D":
        """The universal-cover workspace of a circle metric (same components on R^2)."""
        if self.topology is Topology.LINE:
            return self
        return replace(self, topology=Topology.LINE, period=None,
                       label=self.label + "+cover" if self.label else "cover")


def eval_metric(m: Metric2D, p: Event) -> tuple[float, float, float]:
    """Pointwise components at ``p``; raises DomainError outside the domain box."""
    if not m.contains(p):
        raise DomainError(f"event {tuple(p)} outside domain box of {m.label or 'metric'}")
    return m.components(p.t, p.x)


def sampling_window(m: Metric2D, x_window: tuple[float, float] | None = None) -> tuple[float, float]:
    """The x interval used for sampling, grids and diagrams.

    Circle metrics default to one period; line metrics use their x_range when
    bounded, else a fixed symmetric window.
    """
    if x_window is not None:
        return x_window
    if m.topology is Topology.CIRCLE:
        return (0.0, float(m.period))
    if m.x_range is not None:
        return m.x_range
    return DEFAULT_X_WINDOW


# ---------------------------------------------------------------------------
# Validation

class Violation(NamedTuple):
    t: float
    x: float
    code: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    label: str
    n_t: int
    n_x: int
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return f"{self.label or 'metric'}: valid on {self.n_t}x{self.n_x} grid"
        lines = [f"{self.label or 'metric'}: {len(self.violations)} violation(s) "
                 f"on {self.n_t}x{self.n_x} grid"]
        for v in self.violations[:20]:
            lines.append(f"  ({v.t:.6g}, {v.x:.6g}): {v.code}: {v.detail}")
        if len(self.violations) > 20:
            lines.append(f"  ... and {len(self.violations) - 20} more")
        return "\n".join(lines)


def check_lorentzian(m: Metric2D, n_t: int = 64, n_x: int = 64,
                     x_window: tuple[float, float] | None = None) -> ValidationReport:
    """Sample the domain box and report every adapted-coordinate violation.

    Checks signature, g_tt < 0, g_xx > 0 at each node and, on circle topology,
    periodicity of all three components to ``PERIODICITY_TOL``.
    """
    if n_t < 2 or n_x < 2:
        raise ValueError("validation grid must be at least 2x2")
    t0, t1 = m.t_range
    x0, x1 = sampling_window(m, x_window)
    violations: list[Violation] = []
    for i in range(n_t):
        t = t0 + (t1 - t0) * i / (n_t - 1)
        for j in range(n_x):
            x = x0 + (x1 - x0) * j / (n_x - 1)
            try:
                g_tt, g_tx, g_xx = m.components(t, x)
            except (ExpressionError, ValueError) as exc:
                violations.append(Violation(t, x, "evaluation", str(exc)))
                continue
            det = g_tt * g_xx - g_tx * g_tx
            if not det < 0:
                violations.append(Violation(t, x, "signature", f"g_tt*g_xx - g_tx^2 = {det:.6g} >= 0"))
            if not g_tt < 0:
                violations.append(Violation(t, x, "g_tt_sign", f"g_tt = {g_tt:.6g} not negative"))
            if not g_xx > 0:
                violations.append(Violation(t, x, "g_xx_sign", f"g_xx = {g_xx:.6g} not positive"))
            if m.topology is Topology.CIRCLE:
                L = m.period
                for name, fn, val in (("g_tt", m.g_tt, g_tt), ("g_tx", m.g_tx, g_tx),
                                      ("g_xx", m.g_xx, g_xx)):
                    shifted = fn(t, x + L)
                    if abs(shifted - val) > PERIODICITY_TOL * (1.0 + abs(val)):
                        violations.append(Violation(
                            t, x, "periodicity",
                            f"{name}(t, x+L) - {name}(t, x) = {shifted - val:.3g}"))
    return ValidationReport(m.label, n_t, n_x, tuple(violations))


# ---------------------------------------------------------------------------
# Builtins

def _const(value: float) -> ScalarField:
    return lambda t, x: value


def _builtin_minkowski(params: dict) -> Metric2D:
    t_range = params.get("t_range", (-5.0, 5.0))
    return Metric2D(_const(-1.0), _const(0.0), _const(1.0), Topology.LINE,
                    tuple(t_range), x_range=params.get("x_range"),
                    label=params.get("name", "minkowski"))


def _builtin_einstein(params: dict) -> Metric2D:
    t_range = params.get("t_range", (-5.0, 5.0))
    period = params.get("period", 2.0 * math.pi)
    return Metric2D(_const(-1.0), _const(0.0), _const(1.0), Topology.CIRCLE,
                    tuple(t_range), period=float(period),
                    label=params.get("name", "einstein"))


def _builtin_de_sitter(params: dict) -> Metric2D:
    t_range = params.get("t_range", (-5.0, 5.0))
    period = params.get("period", 2.0 * math.pi)

    def g_xx(t, x):
        return math.cosh(t) ** 2

    return Metric2D(_const(-1.0), _const(0.0), g_xx, Topology.CIRCLE,
                    tuple(t_range), period=float(period),
                    label=params.get("name", "de_sitter"))


def _builtin_conformal_flat(params: dict) -> Metric2D:
    if "omega2" not in params:
        raise MetricSpecError("builtin 'conformal_flat' requires an 'omega2' expression")
    omega2 = parse_expression(str(params["omega2"]))
    t_range = params.get("t_range", (-3.0, 3.0))

    def g_tt(t, x):
        return -omega2(t, x)

    def g_xx(t, x):
        return omega2(t, x)

    return Metric2D(g_tt, _const(0.0), g_xx, Topology.LINE, tuple(t_range),
                    x_range=params.get("x_range"),
                    label=params.get("name", "conformal_flat"))


def _builtin_flrw(params: dict) -> Metric2D:
    if "a" not in params:
        raise MetricSpecError("builtin 'flrw' requires an 'a' (scale factor) expression")
    a = parse_expression(str(params["a"]))
    t_range = params.get("t_range", (0.5, 5.0))

    def g_xx(t, x):
        return a(t, x) ** 2

    return Metric2D(_const(-1.0), _const(0.0), g_xx, Topology.LINE, tuple(t_range),
                    x_range=params.get("x_range"),
                    label=params.get("name", "flrw"))


_BUILTINS = {
    "minkowski": _builtin_minkowski,
    "einstein": _builtin_einstein,
    "de_sitter": _builtin_de_sitter,
    "conformal_flat": _builtin_conformal_flat,
    "flrw": _builtin_flrw,
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin_metric(name: str, **params) -> Metric2D:
    if name not in _BUILTINS:
        raise MetricSpecError(f"unknown builtin {name!r} (known: {', '.join(BUILTIN_NAMES)})")
    spec = {"builtin": name, **params}
    m = _BUILTINS[name](params)
    object.__setattr__(m, "spec", _normalize_spec(spec, m))
    return m


# ---------------------------------------------------------------------------
# Spec documents

def _normalize_spec(spec: dict, m: Metric2D) -> dict:
    out = dict(spec)
    out.setdefault("topology", m.topology.value)
    out["t_range"] = list(m.t_range)
    if m.period is not None:
        out["period"] = m.period
    if m.x_range is not None:
        out["x_range"] = list(m.x_range)
    return out


def metric_from_dict(doc: dict) -> Metric2D:
    """Build a metric from a decoded spec document."""
    if not isinstance(doc, dict):
        raise MetricSpecError("metric spec must be a JSON object")
    doc = dict(doc)
    name = doc.pop("name", None)
    if "builtin" in doc:
        builtin = doc.pop("builtin")
        params = {}
        for key in ("t_range", "x_range", "period", "omega2", "a"):
            if key in doc:
                params[key] = doc.pop(key)
        doc.pop("topology", None)
        if doc:
            raise MetricSpecError(f"unknown field(s) in builtin spec: {', '.join(sorted(doc))}")
        if name:
            params["name"] = name
        return builtin_metric(builtin, **params)

    for required in ("g_tt", "g_tx", "g_xx", "topology", "t_range"):
        if required not in doc:
            raise MetricSpecError(f"missing field {required!r} in metric spec")
    try:
        topology = Topology(doc["topology"])
    except ValueError:
        raise MetricSpecError(f"topology must be 'line' or 'circle', got {doc['topology']!r}")
    t_range = tuple(float(v) for v in doc["t_range"])
    if len(t_range) != 2:
        raise MetricSpecError("t_range must be [t_min, t_max]")
    period = doc.get("period")
    if topology is Topology.CIRCLE and period is None:
        raise MetricSpecError("circle topology requires a 'period' field")
    x_range = tuple(float(v) for v in doc["x_range"]) if doc.get("x_range") else None

    exprs = {k: parse_expression(str(doc[k])) for k in ("g_tt", "g_tx", "g_xx")}
    m = Metric2D(exprs["g_tt"], exprs["g_tx"], exprs["g_xx"], topology, t_range,
                 period=float(period) if period is not None else None,
                 x_range=x_range, label=name or "custom")
    _probe_corners(m, exprs)
    spec = {k: str(doc[k]) for k in ("g_tt", "g_tx", "g_xx")}
    spec["topology"] = topology.value
    if name:
        spec["name"] = name
    object.__setattr__(m, "spec", _normalize_spec(spec, m))
    return m


def _probe_corners(m: Metric2D, exprs: dict[str, CompiledExpression]) -> None:
    """Every component must evaluate at the domain corners."""
    xs = m.x_range or sampling_window(m)
    for t in m.t_range:
        for x in xs:
            for name, e in exprs.items():
                try:
                    e(t, x)
                except ExpressionError as exc:
                    raise MetricSpecError(f"{name} fails to evaluate at ({t}, {x}): {exc}")


def parse_metric_spec(text: str) -> Metric2D:
    """Parse a UTF-8 JSON metric spec document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MetricSpecError(f"spec document is not valid JSON: {exc}")
    return metric_from_dict(doc)


def render_metric_spec(m: Metric2D) -> str:
    """Serialize a metric back to its spec document (inverse of parse)."""
    if not m.spec:
        raise MetricSpecError("metric carries no renderable spec (built directly from callables)")
    return json.dumps(m.spec, sort_keys=True)


def metric_from_string(arg: str) -> Metric2D:
    """Resolve a CLI-style metric argument: builtin name with optional k=v params.

    Examples: ``minkowski``, ``de_sitter:t_min=-4,t_max=4``,
    ``conformal_flat:omega2=exp(t)``.
    """
    name, _, tail = arg.partition(":")
    params: dict = {}
    if tail:
        for item in tail.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise MetricSpecError(f"malformed parameter {item!r} (expected k=v)")
            params[key.strip()] = value.strip()
    bounds = {}
    for side in ("t_min", "t_max"):
        if side in params:
            bounds[side] = float(params.pop(side))
    if bounds:
        defaults = {"t_min": -5.0, "t_max": 5.0}
        defaults.update(bounds)
        params["t_range"] = (defaults["t_min"], defaults["t_max"])
    if "period" in params:
        params["period"] = float(params["period"])
    return builtin_metric(name, **params)
