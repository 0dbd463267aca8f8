"""Deterministic SVG line-art diagrams of embedded image regions.

The emitter is a tiny polyline writer with fixed float formatting, so a given
configuration reproduces byte-identical output on one platform.  Null lines
through chosen events are drawn exactly: in every flat target they are
straight 45-degree segments, so only their endpoints are embedded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .embedding import (SurfaceMap, IDENTITY_MAP, TWO_PI, TopologyError, compactify,
                        embed_cylinder, embed_minkowski, embed_noncompact_to_cylinder)
from .metric import Event, Metric2D, Topology, sampling_window
from .nullflow import NullBranch, integrate_on_grid

__all__ = ["SvgCanvas", "render_diagram"]

_STYLE = {
    "boundary": ("#20242c", 1.6, None),
    "lattice": ("#b9bdd0", 0.7, None),
    "slice": ("#d62728", 2.4, None),
    "null": ("#2077b4", 1.2, "6 4"),
    "guide": ("#8a8a8a", 1.0, "2 4"),
}


@dataclass
class SvgCanvas:
    """Collects polylines in data coordinates and serializes them to SVG."""

    width: int = 720
    height: int = 560
    pad: float = 48.0
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    polylines: list = field(default_factory=list)

    def polyline(self, points, style: str) -> None:
        pts = [(float(x), float(y)) for x, y in points if
               math.isfinite(x) and math.isfinite(y)]
        if len(pts) >= 2:
            self.polylines.append((pts, style))

    def _bounds(self):
        xs = [x for pts, _ in self.polylines for x, _ in pts]
        ys = [y for pts, _ in self.polylines for _, y in pts]
        if not xs:
            return (-1.0, 1.0, -1.0, 1.0)
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        dx = (x1 - x0) or 1.0
        dy = (y1 - y0) or 1.0
        return (x0 - 0.02 * dx, x1 + 0.02 * dx, y0 - 0.02 * dy, y1 + 0.02 * dy)

    def tostring(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        sx = (self.width - 2 * self.pad) / (x1 - x0)
        sy = (self.height - 2 * self.pad) / (y1 - y0)

        def px(x: float) -> str:
            return f"{self.pad + (x - x0) * sx:.2f}"

        def py(y: float) -> str:
            return f"{self.height - self.pad - (y - y0) * sy:.2f}"

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">',
            f'<rect width="{self.width}" height="{self.height}" fill="#ffffff"/>',
        ]
        for pts, style in self.polylines:
            stroke, w, dash = _STYLE[style]
            coords = " ".join(f"{px(x)},{py(y)}" for x, y in pts)
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline fill="none" stroke="{stroke}" '
                       f'stroke-width="{w}"{dash_attr} points="{coords}"/>')
        if self.title:
            out.append(f'<text x="{self.pad:.2f}" y="24" font-family="monospace" '
                       f'font-size="14">{self.title}</text>')
        if self.x_label:
            out.append(f'<text x="{self.width / 2:.2f}" y="{self.height - 10:.2f}" '
                       f'font-family="monospace" font-size="12" '
                       f'text-anchor="middle">{self.x_label}</text>')
        if self.y_label:
            out.append(f'<text x="14" y="{self.height / 2:.2f}" font-family="monospace" '
                       f'font-size="12" text-anchor="middle" '
                       f'transform="rotate(-90 14 {self.height / 2:.2f})">{self.y_label}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _linspace(a: float, b: float, n: int) -> list[float]:
    return [a + (b - a) * i / (n - 1) for i in range(n)]


def _split_wrapped(points, period: float):
    """Break a polyline wherever the horizontal coordinate wraps the period."""
    segments = []
    current = [points[0]]
    for prev, cur in zip(points, points[1:]):
        if abs(cur[0] - prev[0]) > 0.5 * period:
            segments.append(current)
            current = [cur]
        else:
            current.append(cur)
    segments.append(current)
    return [seg for seg in segments if len(seg) >= 2]


def render_diagram(m: Metric2D, *, f: SurfaceMap | None = None, target: str = "minkowski",
                   grid: tuple[int, int] = (9, 9), events: list[Event] | None = None,
                   x_window: tuple[float, float] | None = None,
                   curve_samples: int = 41, tol_rel: float = 1e-10,
                   tol_abs: float = 1e-12) -> str:
    """SVG of the embedded image region.

    Draws the embedded domain-box boundary, the highlighted image of the t = 0
    slice, a lattice of constant-t and constant-x image curves, and the exact
    image null lines through the chosen events (default: one box-center event).
    """
    kw = dict(tol_rel=tol_rel, tol_abs=tol_abs)
    if m.topology is Topology.CIRCLE:
        if target == "minkowski":
            raise TopologyError("a circle-topology metric embeds into the cylinder; "
                                "use target 'einstein'")
        mode = "cylinder"
    else:
        mode = "plane" if target == "minkowski" else "compactified"
    fmap = f or IDENTITY_MAP

    def image(p: Event) -> tuple[float, float]:
        if mode == "plane":
            e = embed_minkowski(m, fmap, p, **kw)
            return e.x, e.tau
        if mode == "compactified":
            e = embed_noncompact_to_cylinder(m, fmap, p, **kw)
            return e.cover_theta, e.tau        # signed angle in (-pi, pi)
        e = embed_cylinder(m, p, **kw)
        return e.cover_theta, e.tau

    t0, t1 = m.t_range
    w0, w1 = sampling_window(m, x_window)
    n_t_curves, n_x_curves = max(grid[0], 2), max(grid[1], 2)

    canvas = SvgCanvas(title=f"{m.label or 'metric'} [{mode}]",
                       x_label="theta" if mode != "plane" else "X", y_label="tau")

    def add_curve(points, style):
        if mode == "cylinder":
            pts = [(x % TWO_PI, y) for x, y in points]
            for seg in _split_wrapped(pts, TWO_PI):
                canvas.polyline(seg, style)
        else:
            canvas.polyline(points, style)

    # Lattice of constant-t and constant-x image curves.
    for t in _linspace(t0, t1, n_t_curves):
        add_curve([image(Event(t, x)) for x in _linspace(w0, w1, curve_samples)], "lattice")
    for x in _linspace(w0, w1, n_x_curves):
        add_curve([image(Event(t, x)) for t in _linspace(t0, t1, curve_samples)], "lattice")

    # Domain-box boundary; x edges only exist on line topology.
    for t in (t0, t1):
        add_curve([image(Event(t, x)) for x in _linspace(w0, w1, curve_samples)], "boundary")
    if m.topology is Topology.LINE:
        for x in (w0, w1):
            add_curve([image(Event(t, x)) for t in _linspace(t0, t1, curve_samples)], "boundary")

    # Image of the slice t = 0.
    if t0 <= 0.0 <= t1:
        add_curve([image(Event(0.0, x)) for x in _linspace(w0, w1, curve_samples)], "slice")

    # Null lines: straight 45-degree segments between box-edge images.
    if events is None:
        t_mid = 0.5 * (t0 + t1)
        if abs(t_mid) < 1e-9:
            t_mid = 0.5 * t1
        events = [Event(t_mid, 0.5 * (w0 + w1))]
    for p in events:
        for branch in (NullBranch.MINUS, NullBranch.PLUS):
            bottom = integrate_on_grid(m, p, branch, _linspace(p.t, t0, 33))[-1]
            top = integrate_on_grid(m, p, branch, _linspace(p.t, t1, 33))[-1]
            if mode == "cylinder":
                # interpolate in cover coordinates, then reduce
                a = embed_cylinder(m, bottom, **kw)
                b = embed_cylinder(m, top, **kw)
                pts = [(a.cover_theta + (b.cover_theta - a.cover_theta) * s,
                        a.tau + (b.tau - a.tau) * s) for s in _linspace(0.0, 1.0, 65)]
            else:
                ia, ib = image(bottom), image(top)
                pts = [(ia[0] + (ib[0] - ia[0]) * s, ia[1] + (ib[1] - ia[1]) * s)
                       for s in _linspace(0.0, 1.0, 65)]
            add_curve(pts, "null")

    # Reference geometry of the target.
    if mode == "compactified":
        diamond = [(0.0, math.pi), (math.pi, 0.0), (0.0, -math.pi),
                   (-math.pi, 0.0), (0.0, math.pi)]
        canvas.polyline(diamond, "guide")
    elif mode == "cylinder":
        canvas.polyline([(0.0, t0), (0.0, t1)], "guide")
        canvas.polyline([(TWO_PI, t0), (TWO_PI, t1)], "guide")
    return canvas.tostring()
