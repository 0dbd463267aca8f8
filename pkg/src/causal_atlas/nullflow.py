"""Null directions and null-curve integration down to the slice t = 0.

At every point the two null directions solve g_xx l^2 + 2 g_tx l + g_tt = 0
with l = dx/dt; adapted coordinates force real roots of opposite sign.  Null
curves are integrated with t as the parameter, so reaching the slice is plain
stepping to t = 0: the controller clamps the final step onto the slice instead
of overshooting and refining.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .metric import DomainError, Event, Metric2D, MetricError, Topology

__all__ = [
    "NullBranch",
    "Direction",
    "NullPath",
    "IntegrationError",
    "null_slopes",
    "integrate_null",
    "integrate_on_grid",
    "shadow_endpoint",
    "TOL_ODE_REL",
    "TOL_ODE_ABS",
    "TOL_EVENT",
    "MAX_STEPS",
]

TOL_ODE_REL = 1e-10
TOL_ODE_ABS = 1e-12
TOL_EVENT = 1e-12
MAX_STEPS = 100_000


class IntegrationError(RuntimeError):
    """A null curve failed to reach the slice inside the step/domain budget."""


class NullBranch(Enum):
    MINUS = "minus"   # root l- < 0
    PLUS = "plus"     # root l+ > 0


class Direction(Enum):
    TOWARD_PAST = "toward_past"
    TOWARD_FUTURE = "toward_future"


@dataclass(frozen=True)
class NullPath:
    events: tuple[Event, ...]
    branch: NullBranch
    direction: Direction
    n_rejected: int = 0

    @property
    def start(self) -> Event:
        return self.events[0]

    @property
    def terminal(self) -> Event:
        return self.events[-1]


def null_slopes(m: Metric2D, p: Event, check_domain: bool = True) -> tuple[float, float]:
    """Both roots (l-, l+) of the null-cone quadratic at ``p``.

    Uses the cancellation-free quadratic formula: the larger-magnitude root is
    computed directly, the other from the root product g_tt / g_xx.
    """
    if check_domain and not m.contains(p):
        raise DomainError(f"event {tuple(p)} outside domain box")
    g_tt, g_tx, g_xx = m.components(p.t, p.x)
    return _slopes_from_components(g_tt, g_tx, g_xx, p)


def _slopes_from_components(g_tt: float, g_tx: float, g_xx: float,
                            p: Event) -> tuple[float, float]:
    disc = g_tx * g_tx - g_tt * g_xx
    if not disc > 0.0 or not g_xx != 0.0:
        raise MetricError(f"no real null directions at {tuple(p)} (discriminant {disc:.3g})")
    sd = math.sqrt(disc)
    if g_tx <= 0.0:
        lam_plus = (-g_tx + sd) / g_xx
        lam_minus = (g_tt / g_xx) / lam_plus
    else:
        lam_minus = (-g_tx - sd) / g_xx
        lam_plus = (g_tt / g_xx) / lam_minus
    if not (lam_minus < 0.0 < lam_plus):
        raise MetricError(f"null slopes {lam_minus:.3g}, {lam_plus:.3g} at {tuple(p)} "
                          "are not of opposite sign (metric not adapted)")
    return lam_minus, lam_plus


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) pair, scalar form with FSAL.

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights equal the last tableau row (FSAL); error weights are b5 - b4.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _dopri_step(f, t, x, h, k1):
    """One 5(4) step from (t, x); returns (x5, err, k7) with k7 = f at the new point."""
    k = [k1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    for i in range(1, 7):
        a = _A[i]
        acc = 0.0
        for j in range(i):
            acc += a[j] * k[j]
        k[i] = f(t + _C[i] * h, x + h * acc)
    x5 = x + h * (_A[6][0] * k[0] + _A[6][2] * k[2] + _A[6][3] * k[3]
                  + _A[6][4] * k[4] + _A[6][5] * k[5])
    err = h * (_E[0] * k[0] + _E[2] * k[2] + _E[3] * k[3]
               + _E[4] * k[4] + _E[5] * k[5] + _E[6] * k[6])
    return x5, err, k[6]


def _slope_fn(m: Metric2D, branch: NullBranch):
    g_tt, g_tx, g_xx = m.g_tt, m.g_tx, m.g_xx
    plus = branch is NullBranch.PLUS

    def f(t, x):
        lam_minus, lam_plus = _slopes_from_components(g_tt(t, x), g_tx(t, x), g_xx(t, x),
                                                      Event(t, x))
        return lam_plus if plus else lam_minus

    return f


def _check_x_bounds(m: Metric2D, t: float, x: float):
    if m.topology is Topology.LINE and m.x_range is not None:
        if not (m.x_range[0] <= x <= m.x_range[1]):
            raise IntegrationError(
                f"null curve left the domain box in x at ({t:.6g}, {x:.6g})")


def integrate_null(m: Metric2D, start: Event, branch: NullBranch, direction: Direction,
                   *, tol_rel: float = TOL_ODE_REL, tol_abs: float = TOL_ODE_ABS,
                   tol_event: float = TOL_EVENT, max_steps: int = MAX_STEPS) -> NullPath:
    """Integrate dx/dt = l_branch(t, x) from ``start`` to its crossing of t = 0.

    ``direction`` must point toward the slice: toward_past needs start.t >= 0,
    toward_future needs start.t <= 0.  The returned path records every accepted
    step; its terminal event lies on the slice to within ``tol_event``.
    """
    if not m.contains(start):
        raise DomainError(f"start event {tuple(start)} outside domain box")
    t0, x0 = start
    if direction is Direction.TOWARD_PAST and t0 < -tol_event:
        raise ValueError("toward_past requires start.t >= 0")
    if direction is Direction.TOWARD_FUTURE and t0 > tol_event:
        raise ValueError("toward_future requires start.t <= 0")

    events = [Event(t0, x0)]
    if abs(t0) <= tol_event:
        return NullPath(tuple(events), branch, direction)

    f = _slope_fn(m, branch)
    t, x = t0, x0
    h = (0.0 - t0) / 16.0
    k1 = f(t, x)
    n_rejected = 0
    for _ in range(max_steps):
        clamped = (t + h) * t0 <= 0.0    # this step reaches or passes the slice
        if clamped:
            h = 0.0 - t
        x_new, err, k_last = _dopri_step(f, t, x, h, k1)
        scale = tol_abs + tol_rel * max(abs(x), abs(x_new))
        err_norm = abs(err) / scale
        if err_norm <= 1.0:
            t = 0.0 if clamped else t + h
            x = x_new
            k1 = k_last
            events.append(Event(t, x))
            _check_x_bounds(m, t, x)
            if t == 0.0:
                return NullPath(tuple(events), branch, direction, n_rejected)
        else:
            n_rejected += 1
        factor = 0.9 * err_norm ** -0.2 if err_norm > 0.0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if abs(h) < 1e-15 * (1.0 + abs(t)):
            raise IntegrationError(f"step size underflow at t = {t:.6g}")
    raise IntegrationError(
        f"exceeded {max_steps} steps integrating from {tuple(start)}; "
        "the metric may not be globally hyperbolic on this box")


def integrate_on_grid(m: Metric2D, start: Event, branch: NullBranch,
                      t_grid: Sequence[float]) -> list[Event]:
    """Integrate the slope field over a fixed t grid, one 5th-order step per interval.

    The grid must start at start.t and be strictly monotone.  Used for frozen
    step schedules (smooth stencil evaluations) and for diagram curves.
    """
    f = _slope_fn(m, branch)
    t = float(t_grid[0])
    x = start.x
    out = [Event(t, x)]
    k1 = f(t, x)
    for t_next in t_grid[1:]:
        h = float(t_next) - t
        x, _, k1 = _dopri_step(f, t, x, h, k1)
        t = float(t_next)
        out.append(Event(t, x))
    return out


def shadow_endpoint(m: Metric2D, p: Event, branch: NullBranch,
                    *, tol_rel: float = TOL_ODE_REL, tol_abs: float = TOL_ODE_ABS,
                    tol_event: float = TOL_EVENT, max_steps: int = MAX_STEPS) -> float:
    """The x coordinate where the null curve through ``p`` meets the slice t = 0."""
    if abs(p.t) <= tol_event:
        if not m.contains(p):
            raise DomainError(f"event {tuple(p)} outside domain box")
        return p.x
    direction = Direction.TOWARD_PAST if p.t > 0 else Direction.TOWARD_FUTURE
    path = integrate_null(m, p, branch, direction, tol_rel=tol_rel, tol_abs=tol_abs,
                          tol_event=tol_event, max_steps=max_steps)
    return path.terminal.x
