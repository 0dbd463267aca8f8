"""Flat-target embeddings built from slice shadows, and their conformal data.

An event is sent to the unique point of 2D Minkowski space casting the same
(slice-mapped) shadow: with shadow [x_l, x_r] and an increasing surface map f,
u = f(x_l), v = f(x_r) give tau = (v - u)/2, X = (u + v)/2 above the slice and
the time-mirrored formula below.  Circle-topology metrics are embedded through
their universal cover with the equivariant map x -> 2 pi x / L and then
projected to the cylinder; an extra conformal compactification step carries
line-topology images onto the cylinder as well.

The Jacobian of the embedding is taken by central finite differences.  Stencil
evaluations reuse one adaptive reference integration per null branch as a
frozen step schedule, so the differenced map is smooth and the derivative is
not polluted by adaptive step-size jitter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .expressions import parse_expression
from .metric import DomainError, Event, Metric2D, Topology
from .nullflow import (MAX_STEPS, TOL_EVENT, TOL_ODE_ABS, TOL_ODE_REL, Direction,
                       NullBranch, integrate_null, integrate_on_grid, shadow_endpoint)
from .shadow import Shadow, ShadowSide, compute_shadow

__all__ = [
    "SurfaceMap",
    "SurfaceMapError",
    "TopologyError",
    "EmbeddingError",
    "MinkowskiEvent",
    "CylinderEvent",
    "IDENTITY_MAP",
    "equivariant_map",
    "surface_map_from_expression",
    "validate_surface_map",
    "embed_minkowski",
    "embed_from_shadow",
    "embed_cylinder",
    "compactify",
    "embed_noncompact_to_cylinder",
    "jacobian",
    "conformal_factor",
    "JACOBIAN_STEP",
    "TOL_CONFORMAL",
    "TWO_PI",
]

TWO_PI = 2.0 * math.pi
JACOBIAN_STEP = 1e-5
TOL_CONFORMAL = 1e-4


class SurfaceMapError(ValueError):
    """The slice map breaks the contract (not strictly increasing / equivariant)."""


class TopologyError(ValueError):
    """Operation applied to a metric of the wrong topology."""


class EmbeddingError(RuntimeError):
    """The embedding produced inconsistent data (broken conformal factor, ...)."""


class MinkowskiEvent(NamedTuple):
    tau: float
    x: float


class CylinderEvent(NamedTuple):
    tau: float
    theta: float        # reduced to [0, 2*pi)
    cover_theta: float  # unreduced cover angle


@dataclass(frozen=True)
class SurfaceMap:
    """Strictly increasing C1 map from slice coordinates to the target x-axis."""

    fn: Callable[[float], float]
    label: str = "custom"

    def __call__(self, x: float) -> float:
        return self.fn(x)


IDENTITY_MAP = SurfaceMap(lambda x: x, "identity")


def equivariant_map(period: float) -> SurfaceMap:
    """The affine map x -> 2 pi x / L used for circle-topology covers."""
    c = TWO_PI / period
    if c == 1.0:
        return SurfaceMap(lambda x: x, "identity")
    return SurfaceMap(lambda x: c * x, f"2*pi*x/{period:g}")


def surface_map_from_expression(source: str) -> SurfaceMap:
    """Build a surface map from an expression in the variable x."""
    expr = parse_expression(source)
    if "t" in expr.variables:
        raise SurfaceMapError(f"surface map {source!r} must depend on x only")
    return SurfaceMap(lambda x: expr(0.0, x), source)


def validate_surface_map(f: SurfaceMap, window: tuple[float, float], *,
                         topology: Topology = Topology.LINE,
                         period: float | None = None,
                         n: int = 100, tol: float = 1e-9) -> None:
    """Check strict monotonicity on ``n`` sample points, plus circle equivariance.

    A strictly decreasing map is rejected explicitly: it would produce the
    anti-causal (order-reversing) twin of the embedding.
    """
    a, b = window
    xs = [a + (b - a) * i / (n - 1) for i in range(n)]
    values = [f(x) for x in xs]
    diffs = [v2 - v1 for v1, v2 in zip(values, values[1:])]
    if all(d < 0 for d in diffs):
        raise SurfaceMapError(
            f"surface map {f.label!r} is strictly decreasing on {window}; it would "
            "realize the anti-causal alternative, so pass an increasing map instead")
    if not all(d > 0 for d in diffs):
        raise SurfaceMapError(f"surface map {f.label!r} is not strictly increasing on {window}")
    if topology is Topology.CIRCLE:
        if not period:
            raise SurfaceMapError("circle topology requires a period for equivariance checks")
        for x in xs:
            err = f(x + period) - f(x) - TWO_PI
            if abs(err) > tol:
                raise SurfaceMapError(
                    f"surface map {f.label!r} is not equivariant: "
                    f"f(x+L) - f(x) - 2*pi = {err:.3g} at x = {x:.6g}")


# ---------------------------------------------------------------------------
# Point embeddings

def embed_from_shadow(shadow: Shadow, f: SurfaceMap) -> MinkowskiEvent:
    """The unique flat event whose (past or future) shadow is the mapped interval."""
    u = f(shadow.x_left)
    v = f(shadow.x_right)
    if u > v:
        raise SurfaceMapError(
            f"surface map {f.label!r} maps x_left above x_right "
            f"({u:.6g} > {v:.6g}); it is not increasing")
    if shadow.side is ShadowSide.PAST_SHADOW:
        return MinkowskiEvent(0.5 * (v - u), 0.5 * (u + v))
    return MinkowskiEvent(0.5 * (u - v), 0.5 * (u + v))


def embed_minkowski(m: Metric2D, f: SurfaceMap | None, p: Event, *,
                    tol_rel: float = TOL_ODE_REL, tol_abs: float = TOL_ODE_ABS,
                    tol_event: float = TOL_EVENT, max_steps: int = MAX_STEPS) -> MinkowskiEvent:
    """Embed an event of a line-topology metric into 2D Minkowski space."""
    if m.topology is not Topology.LINE:
        raise TopologyError("embed_minkowski needs line topology; use embed_cylinder "
                            "or the metric's cover")
    shadow = compute_shadow(m, p, tol_rel=tol_rel, tol_abs=tol_abs,
                            tol_event=tol_event, max_steps=max_steps)
    return embed_from_shadow(shadow, f or IDENTITY_MAP)


def embed_cylinder(m: Metric2D, p: Event, *,
                   tol_rel: float = TOL_ODE_REL, tol_abs: float = TOL_ODE_ABS,
                   tol_event: float = TOL_EVENT, max_steps: int = MAX_STEPS) -> CylinderEvent:
    """Embed an event of a circle-topology metric into the flat cylinder.

    Works in the universal cover with the equivariant surface map.  The cover
    coordinate is reduced to [0, L) first and the winding number re-applied to
    the image, so images of p and p + (0, L) coincide exactly after reduction.
    """
    if m.topology is not Topology.CIRCLE:
        raise TopologyError("embed_cylinder needs circle topology")
    L = m.period
    k = math.floor(p.x / L)
    x_red = p.x - k * L
    image = embed_minkowski(m.cover(), equivariant_map(L), Event(p.t, x_red),
                            tol_rel=tol_rel, tol_abs=tol_abs, tol_event=tol_event,
                            max_steps=max_steps)
    theta = image.x - TWO_PI * math.floor(image.x / TWO_PI)
    return CylinderEvent(image.tau, theta, theta + TWO_PI * k)


def compactify(a: MinkowskiEvent) -> CylinderEvent:
    """Conformally carry a Minkowski event onto the cylinder.

    In null coordinates u = tau - X, v = tau + X each half-line is bent by
    2*arctan, which maps the full plane onto the open diamond
    |tau'| + |theta'| < pi; the x-axis goes to the circle minus one point.
    """
    u = a.tau - a.x
    v = a.tau + a.x
    bent_v = 2.0 * math.atan(v)
    bent_u = 2.0 * math.atan(u)
    tau = 0.5 * (bent_v + bent_u)
    cover_theta = 0.5 * (bent_v - bent_u)
    theta = cover_theta - TWO_PI * math.floor(cover_theta / TWO_PI)
    return CylinderEvent(tau, theta, cover_theta)


def embed_noncompact_to_cylinder(m: Metric2D, f: SurfaceMap | None, p: Event,
                                 **kwargs) -> CylinderEvent:
    """Embed a line-topology metric into the cylinder via Minkowski space."""
    if m.topology is not Topology.LINE:
        raise TopologyError("embed_noncompact_to_cylinder needs line topology")
    return compactify(embed_minkowski(m, f, p, **kwargs))


# ---------------------------------------------------------------------------
# Jacobian by central differences on a frozen step schedule

def _frozen_endpoint_evaluator(m: Metric2D, p: Event, branch: NullBranch, h_t: float,
                               tol_rel: float, tol_abs: float, tol_event: float,
                               max_steps: int) -> Callable[[float, float], float]:
    """Endpoint map (t0, x0) -> slice crossing, smooth across a FD stencil at p.

    One adaptive run from p fixes the step schedule; stencil starts reuse it,
    linearly rescaled to their own span.  Near the slice (|p.t| <= 2 h_t) the
    spans are tiny and plain adaptive runs are accurate enough.
    """
    kw = dict(tol_rel=tol_rel, tol_abs=tol_abs, tol_event=tol_event, max_steps=max_steps)
    if abs(p.t) <= 2.0 * h_t:
        def evaluate(t0: float, x0: float) -> float:
            return shadow_endpoint(m, Event(t0, x0), branch, **kw)
        return evaluate

    direction = Direction.TOWARD_PAST if p.t > 0 else Direction.TOWARD_FUTURE
    reference = integrate_null(m, p, branch, direction, **kw)
    ref_ts = np.array([e.t for e in reference.events])
    ref_t0 = p.t

    def evaluate(t0: float, x0: float) -> float:
        if abs(t0) <= tol_event:
            return x0
        grid = ref_ts * (t0 / ref_t0)
        return integrate_on_grid(m, Event(t0, x0), branch, grid)[-1].x

    return evaluate


def jacobian(m: Metric2D, f: SurfaceMap | None, p: Event, h: float = JACOBIAN_STEP, *,
             tol_rel: float = TOL_ODE_REL, tol_abs: float = TOL_ODE_ABS,
             tol_event: float = TOL_EVENT, tol_causal: float = 1e-7,
             max_steps: int = MAX_STEPS) -> np.ndarray:
    """2x2 derivative of the embedding map at ``p`` by central finite differences.

    Line topology differentiates the Minkowski embedding; circle topology the
    cover-to-cover map (tau, cover_theta), which shares its derivative with the
    cylinder embedding.
    """
    if m.topology is Topology.CIRCLE:
        work = m.cover()
        fmap = equivariant_map(m.period)
    else:
        work = m
        fmap = f or IDENTITY_MAP
    h_t = h * (1.0 + abs(p.t))
    h_x = h * (1.0 + abs(p.x))
    for probe in (Event(p.t + 2 * h_t, p.x), Event(p.t - 2 * h_t, p.x)):
        if not work.contains(probe):
            raise DomainError(f"jacobian stencil at {tuple(p)} leaves the domain box; "
                              "move the point at least 2h from the boundary")

    kw = dict(tol_rel=tol_rel, tol_abs=tol_abs, tol_event=tol_event, max_steps=max_steps)
    ev_minus = _frozen_endpoint_evaluator(work, p, NullBranch.MINUS, h_t, **kw)
    ev_plus = _frozen_endpoint_evaluator(work, p, NullBranch.PLUS, h_t, **kw)

    def embed_point(t0: float, x0: float) -> tuple[float, float]:
        if abs(t0) <= tol_event:
            u = v = fmap(x0)
        else:
            a = ev_minus(t0, x0)
            b = ev_plus(t0, x0)
            u, v = fmap(min(a, b)), fmap(max(a, b))
            if u > v:
                raise SurfaceMapError(f"surface map {fmap.label!r} is not increasing "
                                      f"near x = {x0:.6g}")
        if t0 >= 0.0:
            return 0.5 * (v - u), 0.5 * (u + v)
        return 0.5 * (u - v), 0.5 * (u + v)

    width = abs(ev_plus(p.t, p.x) - ev_minus(p.t, p.x)) if abs(p.t) > tol_event else 0.0
    if abs(p.t) > tol_event and width < tol_causal:
        warnings.warn(f"shadow of {tuple(p)} is near-degenerate (width {width:.3g}); "
                      "finite differences may be ill-conditioned", stacklevel=2)

    f_tp = embed_point(p.t + h_t, p.x)
    f_tm = embed_point(p.t - h_t, p.x)
    f_xp = embed_point(p.t, p.x + h_x)
    f_xm = embed_point(p.t, p.x - h_x)
    return np.array([
        [(f_tp[0] - f_tm[0]) / (2 * h_t), (f_xp[0] - f_xm[0]) / (2 * h_x)],
        [(f_tp[1] - f_tm[1]) / (2 * h_t), (f_xp[1] - f_xm[1]) / (2 * h_x)],
    ])


ETA = np.diag([-1.0, 1.0])


def conformal_ratios(G: np.ndarray, g_tt: float, g_tx: float, g_xx: float) -> tuple[float, float]:
    """Conformal factor and residual from a pulled-back flat metric G vs g.

    The factor is the mean of the tt and xx component ratios; the residual is
    the largest relative deviation of any component ratio from it.  When g_tx
    vanishes the off-diagonal is checked against zero on the natural scale, so
    shear leaks are still caught.
    """
    r_tt = G[0, 0] / g_tt
    r_xx = G[1, 1] / g_xx
    omega2 = 0.5 * (r_tt + r_xx)
    if not omega2 > 0.0:
        raise EmbeddingError(f"conformal factor {omega2:.6g} is not positive; "
                             "the embedding is broken at this point")
    deviations = [abs(r_tt - omega2), abs(r_xx - omega2)]
    if abs(g_tx) > 1e-12:
        deviations.append(abs(G[0, 1] / g_tx - omega2))
    else:
        deviations.append(abs(G[0, 1]) / math.sqrt(abs(g_tt) * g_xx))
    return float(omega2), float(max(deviations) / omega2)


def conformal_factor(m: Metric2D, f: SurfaceMap | None, p: Event,
                     h: float = JACOBIAN_STEP, **kwargs) -> tuple[float, float]:
    """Conformal factor Omega^2 of the embedding at ``p`` and its residual.

    Pulls the flat target metric back through the finite-difference Jacobian
    and compares it to Omega^2 times the source metric; the embedding is
    conformal at ``p`` iff the residual is below the conformality tolerance.
    """
    J = jacobian(m, f, p, h, **kwargs)
    G = J.T @ ETA @ J
    g_tt, g_tx, g_xx = m.components(p.t, p.x)
    return conformal_ratios(G, g_tt, g_tx, g_xx)
