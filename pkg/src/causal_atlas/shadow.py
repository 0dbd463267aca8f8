"""Cauchy-surface shadows and the causal order decided from them.

An event above the slice casts a past shadow (the slice interval cut by the
two null curves through it); an event below casts a future shadow.  Shadows
are intervals in cover coordinates and encode the causal order completely:
events on opposite sides of the slice are related iff their shadows meet,
events on the same side iff their shadows nest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .metric import DomainError, Event, Metric2D, Topology
from .nullflow import (MAX_STEPS, TOL_EVENT, TOL_ODE_ABS, TOL_ODE_REL, NullBranch,
                       shadow_endpoint)

__all__ = [
    "ShadowSide",
    "Shadow",
    "Relation",
    "CausalRelation",
    "TOL_CAUSAL",
    "compute_shadow",
    "shadows_intersect",
    "causal_order",
    "causal_order_from_shadows",
]

TOL_CAUSAL = 1e-7


class ShadowSide(Enum):
    PAST_SHADOW = "past_shadow"      # cast by an event at t >= 0
    FUTURE_SHADOW = "future_shadow"  # cast by an event at t <= 0


@dataclass(frozen=True)
class Shadow:
    x_left: float
    x_right: float
    side: ShadowSide
    source: Event

    def __post_init__(self):
        if self.x_left > self.x_right:
            raise ValueError(f"inverted shadow [{self.x_left}, {self.x_right}]")

    @property
    def width(self) -> float:
        return self.x_right - self.x_left


class Relation(Enum):
    STRICTLY_BEFORE = "strictly_before"
    STRICTLY_AFTER = "strictly_after"
    COINCIDENT = "coincident"
    SPACELIKE = "spacelike"

    def mirror(self) -> "Relation":
        if self is Relation.STRICTLY_BEFORE:
            return Relation.STRICTLY_AFTER
        if self is Relation.STRICTLY_AFTER:
            return Relation.STRICTLY_BEFORE
        return self


@dataclass(frozen=True)
class CausalRelation:
    """How the first event relates to the second, with cone-proximity data.

    ``boundary_distance`` is the margin of the deciding comparison in slice
    coordinates; ``boundary_flag`` marks decisions within tol_causal of the
    null cone, where the verdict should not be trusted blindly.
    """

    tag: Relation
    boundary_flag: bool = False
    boundary_distance: float = math.inf

    def mirrored(self) -> "CausalRelation":
        return CausalRelation(self.tag.mirror(), self.boundary_flag, self.boundary_distance)

    @property
    def related(self) -> bool:
        return self.tag in (Relation.STRICTLY_BEFORE, Relation.STRICTLY_AFTER)


def compute_shadow(m: Metric2D, p: Event, *, tol_rel: float = TOL_ODE_REL,
                   tol_abs: float = TOL_ODE_ABS, tol_event: float = TOL_EVENT,
                   max_steps: int = MAX_STEPS) -> Shadow:
    """The slice interval cut by the two null curves through ``p``.

    Degenerates to the single point {p.x} when p lies on the slice.
    """
    if not m.contains(p):
        raise DomainError(f"event {tuple(p)} outside domain box")
    side = ShadowSide.PAST_SHADOW if p.t >= 0 else ShadowSide.FUTURE_SHADOW
    if abs(p.t) <= tol_event:
        return Shadow(p.x, p.x, side, p)
    kw = dict(tol_rel=tol_rel, tol_abs=tol_abs, tol_event=tol_event, max_steps=max_steps)
    a = shadow_endpoint(m, p, NullBranch.MINUS, **kw)
    b = shadow_endpoint(m, p, NullBranch.PLUS, **kw)
    return Shadow(min(a, b), max(a, b), side, p)


def _deck_candidates(offset: float, span: float, period: float) -> range:
    """Integer deck translates k with |k*L - offset| possibly within span."""
    k0 = round(offset / period)
    reach = int(math.ceil(span / period)) + 1
    return range(k0 - reach, k0 + reach + 1)


def _interval_margin(a_left: float, a_right: float, b_left: float, b_right: float) -> float:
    """Signed intersection margin: >= 0 iff the intervals meet.

    min(a_right - b_left, b_right - a_left) measures the distance to the
    nearer separation, and stays positive for a point strictly inside an
    interval (unlike the overlap length, which degenerates to zero there).
    """
    return min(a_right - b_left, b_right - a_left)


def _overlap_margin(a: Shadow, b: Shadow, topology: Topology,
                    period: float | None) -> float:
    """Largest intersection margin of a with any deck translate of b."""
    if topology is Topology.LINE:
        return _interval_margin(a.x_left, a.x_right, b.x_left, b.x_right)
    center_a = 0.5 * (a.x_left + a.x_right)
    center_b = 0.5 * (b.x_left + b.x_right)
    span = 0.5 * (a.width + b.width)
    best = -math.inf
    for k in _deck_candidates(center_a - center_b, span, period):
        shift = k * period
        best = max(best, _interval_margin(a.x_left, a.x_right,
                                          b.x_left + shift, b.x_right + shift))
    return best


def _containment_margin(inner: Shadow, outer: Shadow, topology: Topology,
                        period: float | None) -> float:
    """Largest slack with which a deck translate of inner nests inside outer."""
    if topology is Topology.LINE:
        return min(inner.x_left - outer.x_left, outer.x_right - inner.x_right)
    center_i = 0.5 * (inner.x_left + inner.x_right)
    center_o = 0.5 * (outer.x_left + outer.x_right)
    best = -math.inf
    for k in _deck_candidates(center_o - center_i, outer.width, period):
        shift = k * period
        best = max(best, min(inner.x_left + shift - outer.x_left,
                             outer.x_right - (inner.x_right + shift)))
    return best


def shadows_intersect(a: Shadow, b: Shadow, topology: Topology = Topology.LINE,
                      period: float | None = None) -> bool:
    """Whether a past shadow and a future shadow meet on the slice.

    On circle topology the test runs over deck translates of ``b``; the search
    window is centered on the translate closest to ``a``, so arbitrarily wound
    cover coordinates are handled.
    """
    if {a.side, b.side} != {ShadowSide.PAST_SHADOW, ShadowSide.FUTURE_SHADOW}:
        if a.side == b.side and a.source.t != 0 and b.source.t != 0:
            raise ValueError("intersection criterion needs one past and one future shadow")
    if topology is Topology.CIRCLE and not period:
        raise ValueError("circle topology requires a period")
    return _overlap_margin(a, b, topology, period) >= 0.0


def causal_order_from_shadows(shadow_p: Shadow, shadow_q: Shadow, topology: Topology,
                              period: float | None = None,
                              tol_causal: float = TOL_CAUSAL) -> CausalRelation:
    """Causal order of the source events, decided purely by shadow arithmetic."""
    p, q = shadow_p.source, shadow_q.source
    dt = q.t - p.t
    dx = q.x - p.x
    if topology is Topology.CIRCLE:
        dx = dx - period * round(dx / period)
    if abs(dt) <= tol_causal and abs(dx) <= tol_causal:
        return CausalRelation(Relation.COINCIDENT, False, math.hypot(dt, dx))

    if p.t <= 0.0 <= q.t or q.t <= 0.0 <= p.t:
        # Opposite sides (or on the slice): intersection criterion.
        margin = _overlap_margin(shadow_p, shadow_q, topology, period)
        flag = abs(margin) <= tol_causal
        if margin >= 0.0:
            tag = Relation.STRICTLY_BEFORE if p.t <= q.t else Relation.STRICTLY_AFTER
            return CausalRelation(tag, flag, abs(margin))
        return CausalRelation(Relation.SPACELIKE, flag, abs(margin))

    # Same side: nesting criterion on same-type shadows.
    m_pq = _containment_margin(shadow_p, shadow_q, topology, period)  # p nests in q
    m_qp = _containment_margin(shadow_q, shadow_p, topology, period)
    margin = max(m_pq, m_qp)
    flag = abs(margin) <= tol_causal
    if margin < 0.0:
        return CausalRelation(Relation.SPACELIKE, flag, abs(margin))
    if shadow_p.side is ShadowSide.PAST_SHADOW:
        # Above the slice: the nested past shadow belongs to the earlier event.
        tag = Relation.STRICTLY_BEFORE if m_pq >= m_qp else Relation.STRICTLY_AFTER
    else:
        # Below the slice: the nested future shadow belongs to the later event.
        tag = Relation.STRICTLY_AFTER if m_pq >= m_qp else Relation.STRICTLY_BEFORE
    return CausalRelation(tag, flag, abs(margin))


def causal_order(m: Metric2D, p: Event, q: Event, *, tol_causal: float = TOL_CAUSAL,
                 tol_rel: float = TOL_ODE_REL, tol_abs: float = TOL_ODE_ABS,
                 tol_event: float = TOL_EVENT, max_steps: int = MAX_STEPS) -> CausalRelation:
    """Causal order of two events of ``m`` via their slice shadows."""
    kw = dict(tol_rel=tol_rel, tol_abs=tol_abs, tol_event=tol_event, max_steps=max_steps)
    shadow_p = compute_shadow(m, p, **kw)
    shadow_q = compute_shadow(m, q, **kw)
    return causal_order_from_shadows(shadow_p, shadow_q, m.topology, m.period,
                                     tol_causal=tol_causal)
