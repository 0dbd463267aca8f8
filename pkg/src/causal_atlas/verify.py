"""Independent causal oracles and the property harness.

The grid oracle realizes causal reachability by a completely different route
than the shadow method: local null slopes on a lattice, layer-to-layer edges
within a slope window, and a layered breadth-first closure.  Agreement between
the two is therefore evidence, not tautology.  A signed slope margin makes the
oracle one-sidedly over- or under-approximating, so a +/- margin pair brackets
the truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .embedding import (EmbeddingError, IDENTITY_MAP, SurfaceMap, CylinderEvent,
                        MinkowskiEvent, TOL_CONFORMAL, TWO_PI, conformal_ratios,
                        embed_cylinder, embed_from_shadow, equivariant_map, jacobian)
from .metric import Event, Metric2D, Topology, sampling_window
from .nullflow import NullBranch, null_slopes
from .shadow import (CausalRelation, Relation, TOL_CAUSAL, causal_order_from_shadows,
                     compute_shadow)

__all__ = [
    "MapClass",
    "NonConformalMapError",
    "DegenerateMapError",
    "ProbeDisagreementError",
    "minkowski_order",
    "cylinder_order",
    "GridOracle",
    "build_grid_oracle",
    "OracleVerdict",
    "VerificationReport",
    "check_order_preservation",
    "classify_conformal_map",
    "null_residuals",
]


class NonConformalMapError(ValueError):
    """The supplied map is not conformal between the given metrics."""


class DegenerateMapError(ValueError):
    """The map's Jacobian is singular at a probe point."""


class ProbeDisagreementError(RuntimeError):
    """Probe points disagreed where the theory demands a constant verdict."""


class MapClass(Enum):
    CAUSAL = "causal"
    ANTI_CAUSAL = "anti_causal"


# ---------------------------------------------------------------------------
# Flat-target causal orders

def minkowski_order(a: MinkowskiEvent, b: MinkowskiEvent,
                    tol_causal: float = TOL_CAUSAL) -> CausalRelation:
    """Causal order of two flat-plane events (first relative to second)."""
    dtau = b.tau - a.tau
    dx = b.x - a.x
    if abs(dtau) <= tol_causal and abs(dx) <= tol_causal:
        return CausalRelation(Relation.COINCIDENT, False, math.hypot(dtau, dx))
    margin = abs(dtau) - abs(dx)
    flag = abs(margin) <= tol_causal
    if margin >= 0.0:
        tag = Relation.STRICTLY_BEFORE if dtau > 0 else Relation.STRICTLY_AFTER
        return CausalRelation(tag, flag, abs(margin))
    return CausalRelation(Relation.SPACELIKE, flag, abs(margin))


def cylinder_order(a: CylinderEvent, b: CylinderEvent,
                   tol_causal: float = TOL_CAUSAL) -> CausalRelation:
    """Causal order on the flat cylinder, minimized over deck translates."""
    dtau = b.tau - a.tau
    dth = b.cover_theta - a.cover_theta
    dist = abs(dth - TWO_PI * round(dth / TWO_PI))
    if abs(dtau) <= tol_causal and dist <= tol_causal:
        return CausalRelation(Relation.COINCIDENT, False, math.hypot(dtau, dist))
    margin = abs(dtau) - dist
    flag = abs(margin) <= tol_causal
    if margin >= 0.0:
        tag = Relation.STRICTLY_BEFORE if dtau > 0 else Relation.STRICTLY_AFTER
        return CausalRelation(tag, flag, abs(margin))
    return CausalRelation(Relation.SPACELIKE, flag, abs(margin))


# ---------------------------------------------------------------------------
# Grid oracle

class OracleVerdict(NamedTuple):
    tag: Relation
    snap_distance: float


@dataclass
class GridOracle:
    """Discrete causal reachability on an n_t x n_x lattice.

    Edges run from each node to the nodes of the next time layer whose
    connecting slope lies in [l_minus - margin, l_plus + margin]; queries close
    this relation by a layered sweep.  A positive margin over-approximates the
    causal relation, a negative one under-approximates it.
    """

    topology: Topology
    period: float | None
    margin: float
    t_nodes: np.ndarray
    x_nodes: np.ndarray
    lo_idx: np.ndarray  # (n_t-1, n_x) target index windows on the next layer
    hi_idx: np.ndarray
    label: str = ""

    @property
    def n_t(self) -> int:
        return len(self.t_nodes)

    @property
    def n_x(self) -> int:
        return len(self.x_nodes)

    def node_event(self, i: int, j: int) -> Event:
        return Event(float(self.t_nodes[i]), float(self.x_nodes[j]))

    def snap(self, e: Event) -> tuple[int, int, float]:
        """Nearest lattice node and the snap distance."""
        t0 = float(self.t_nodes[0])
        dt = float(self.t_nodes[1] - self.t_nodes[0])
        i = int(np.clip(round((e.t - t0) / dt), 0, self.n_t - 1))
        dx = float(self.x_nodes[1] - self.x_nodes[0])
        if self.topology is Topology.CIRCLE:
            L = self.period
            x_red = e.x - L * math.floor(e.x / L)
            j = int(round(x_red / dx)) % self.n_x
            d = abs(x_red - float(self.x_nodes[j]))
            d = min(d, L - d)
        else:
            x0 = float(self.x_nodes[0])
            j = int(np.clip(round((e.x - x0) / dx), 0, self.n_x - 1))
            d = abs(e.x - float(self.x_nodes[j]))
        return i, j, math.hypot(e.t - float(self.t_nodes[i]), d)

    def _propagate(self, layer: int, frontier: np.ndarray) -> np.ndarray:
        js = np.nonzero(frontier)[0]
        lo = self.lo_idx[layer, js]
        hi = self.hi_idx[layer, js]
        keep = lo <= hi
        lo, hi = lo[keep], hi[keep]
        n = self.n_x
        diff = np.zeros(n + 1, dtype=np.int64)
        if self.topology is Topology.CIRCLE:
            lo_m = np.mod(lo, n)
            hi_m = np.mod(hi, n)
            wrap = lo_m > hi_m
            np.add.at(diff, lo_m[~wrap], 1)
            np.add.at(diff, hi_m[~wrap] + 1, -1)
            if wrap.any():
                np.add.at(diff, lo_m[wrap], 1)
                diff[n] -= int(wrap.sum())      # segment [lo_m, n-1]
                diff[0] += int(wrap.sum())      # segment [0, hi_m]
                np.add.at(diff, hi_m[wrap] + 1, -1)
        else:
            np.add.at(diff, lo, 1)
            np.add.at(diff, hi + 1, -1)
        return np.cumsum(diff[:-1]) > 0

    def reachable(self, src: tuple[int, int], dst: tuple[int, int]) -> bool:
        """Directed reachability from a lower-layer node to a higher-layer node."""
        (i0, j0), (i1, j1) = src, dst
        if i0 >= i1:
            raise ValueError("source must lie on an earlier time layer")
        frontier = np.zeros(self.n_x, dtype=bool)
        frontier[j0] = True
        for layer in range(i0, i1):
            frontier = self._propagate(layer, frontier)
            if not frontier.any():
                return False
        return bool(frontier[j1])

    def relation_nodes(self, a: tuple[int, int], b: tuple[int, int]) -> Relation:
        if a == b:
            return Relation.COINCIDENT
        if a[0] == b[0]:
            return Relation.SPACELIKE
        if a[0] < b[0]:
            return Relation.STRICTLY_BEFORE if self.reachable(a, b) else Relation.SPACELIKE
        return Relation.STRICTLY_AFTER if self.reachable(b, a) else Relation.SPACELIKE

    def relation(self, a: Event, b: Event) -> OracleVerdict:
        ia, ja, da = self.snap(a)
        ib, jb, db = self.snap(b)
        return OracleVerdict(self.relation_nodes((ia, ja), (ib, jb)), max(da, db))


def build_grid_oracle(m: Metric2D, n_t: int = 64, n_x: int = 64,
                      margin: float | None = None,
                      x_window: tuple[float, float] | None = None) -> GridOracle:
    """Construct the lattice oracle; ``margin=None`` uses one cell's slope increment.

    A negative margin narrows the cone windows and yields the under-approximating
    twin used for bracketing.
    """
    if n_t < 16 or n_x < 16:
        raise ValueError("oracle lattice must be at least 16x16")
    t0, t1 = m.t_range
    t_nodes = np.linspace(t0, t1, n_t)
    if m.topology is Topology.CIRCLE:
        x_nodes = np.linspace(0.0, m.period, n_x, endpoint=False)
        dx = m.period / n_x
    else:
        w0, w1 = sampling_window(m, x_window)
        x_nodes = np.linspace(w0, w1, n_x)
        dx = float(x_nodes[1] - x_nodes[0])
    dt = float(t_nodes[1] - t_nodes[0])
    if margin is None:
        margin = dx / dt

    lo_idx = np.empty((n_t - 1, n_x), dtype=np.int64)
    hi_idx = np.empty((n_t - 1, n_x), dtype=np.int64)
    x_base = float(x_nodes[0])
    eps = 1e-9
    for i in range(n_t - 1):
        t = float(t_nodes[i])
        for j in range(n_x):
            x = float(x_nodes[j])
            lam_minus, lam_plus = null_slopes(m, Event(t, x), check_domain=False)
            lo_x = x + (lam_minus - margin) * dt
            hi_x = x + (lam_plus + margin) * dt
            lo = math.ceil((lo_x - x_base) / dx - eps)
            hi = math.floor((hi_x - x_base) / dx + eps)
            if m.topology is Topology.CIRCLE:
                if hi - lo + 1 >= n_x:
                    lo, hi = 0, n_x - 1
            else:
                lo = max(lo, 0)
                hi = min(hi, n_x - 1)
            lo_idx[i, j] = lo
            hi_idx[i, j] = hi
    return GridOracle(m.topology, m.period, margin, t_nodes, x_nodes, lo_idx, hi_idx,
                      label=m.label)


# ---------------------------------------------------------------------------
# Null preservation

def null_residuals(m: Metric2D, J: np.ndarray, p: Event) -> tuple[float, float]:
    """Normalized flat-metric residuals of both pushed-forward null vectors."""
    out = []
    for lam in null_slopes(m, p, check_domain=False):
        w = J @ np.array([1.0, lam])
        eta_ww = -w[0] * w[0] + w[1] * w[1]
        out.append(float(abs(eta_ww)) / float(w @ w))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Verification report and the main harness

@dataclass
class VerificationReport:
    metric_label: str
    samples_tested: int
    agreements: int
    disagreements: list[dict]
    boundary_exclusions: int
    max_null_residual: float
    max_conformality_residual: float
    properties: dict[str, bool]
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.properties.values())

    def to_dict(self) -> dict:
        return {
            "metric_label": self.metric_label,
            "samples_tested": int(self.samples_tested),
            "agreements": int(self.agreements),
            "disagreements": self.disagreements,
            "boundary_exclusions": int(self.boundary_exclusions),
            "max_null_residual": float(self.max_null_residual),
            "max_conformality_residual": float(self.max_conformality_residual),
            "properties": {k: bool(v) for k, v in self.properties.items()},
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [
            ("metric", self.metric_label),
            ("samples tested", str(self.samples_tested)),
            ("agreements", str(self.agreements)),
            ("disagreements", str(len(self.disagreements))),
            ("boundary-band exclusions", str(self.boundary_exclusions)),
            ("max null residual", f"{self.max_null_residual:.3e}"),
            ("max conformality residual", f"{self.max_conformality_residual:.3e}"),
        ]
        for name, ok in sorted(self.properties.items()):
            rows.append((f"property {name}", "pass" if ok else "FAIL"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _sample_events(rng: np.random.Generator, m: Metric2D, n: int,
                   x_window: tuple[float, float] | None, shrink: float = 0.0) -> list[Event]:
    t0, t1 = m.t_range
    pad = shrink * (t1 - t0)
    w0, w1 = sampling_window(m, x_window)
    ts = rng.uniform(t0 + pad, t1 - pad, n)
    xs = rng.uniform(w0, w1, n)
    return [Event(float(t), float(x)) for t, x in zip(ts, xs)]


def _image_order(m: Metric2D, f: SurfaceMap, shadow_p, shadow_q,
                 tol_causal: float) -> CausalRelation:
    """Flat order of the two embedded images, from precomputed shadows."""
    if m.topology is Topology.CIRCLE:
        fmap = equivariant_map(m.period)
        img_p = embed_from_shadow(shadow_p, fmap)
        img_q = embed_from_shadow(shadow_q, fmap)
        a = CylinderEvent(img_p.tau, img_p.x % TWO_PI, img_p.x)
        b = CylinderEvent(img_q.tau, img_q.x % TWO_PI, img_q.x)
        return cylinder_order(a, b, tol_causal)
    return minkowski_order(embed_from_shadow(shadow_p, f),
                           embed_from_shadow(shadow_q, f), tol_causal)


def check_order_preservation(m: Metric2D, f: SurfaceMap | None = None,
                             n_samples: int = 500, seed: int = 0, *,
                             x_window: tuple[float, float] | None = None,
                             oracles: tuple[GridOracle, GridOracle] | None = None,
                             n_oracle_pairs: int = 200,
                             n_residual_samples: int = 64,
                             tol_causal: float = TOL_CAUSAL,
                             tol_conf: float = TOL_CONFORMAL,
                             null_residual_bound: float = 1e-5,
                             tol_rel: float = 1e-10, tol_abs: float = 1e-12,
                             map_fn: Callable[[Event], list[Event]] | None = None,
                             ) -> VerificationReport:
    """Sample event pairs and verify the embedding is a causal isomorphism.

    Compares the shadow order against the flat order of the embedded images
    (boundary-band pairs excluded), optionally brackets the verdicts between an
    under- and an over-approximating grid oracle, and sweeps null-preservation
    and conformality residuals at a subsample of interior events.
    """
    rng = np.random.default_rng(seed)
    f = f or IDENTITY_MAP
    kw = dict(tol_rel=tol_rel, tol_abs=tol_abs)

    events = _sample_events(rng, m, 2 * n_samples, x_window)
    shadows = [compute_shadow(m, e, **kw) for e in events]
    agreements = 0
    exclusions = 0
    disagreements: list[dict] = []
    for idx in range(n_samples):
        sh_p, sh_q = shadows[2 * idx], shadows[2 * idx + 1]
        rel_shadow = causal_order_from_shadows(sh_p, sh_q, m.topology, m.period, tol_causal)
        rel_image = _image_order(m, f, sh_p, sh_q, tol_causal)
        if rel_shadow.boundary_flag or rel_image.boundary_flag:
            exclusions += 1
        elif rel_shadow.tag is rel_image.tag:
            agreements += 1
        else:
            disagreements.append({
                "pair": idx,
                "p": list(sh_p.source),
                "q": list(sh_q.source),
                "shadow_verdict": rel_shadow.tag.value,
                "image_verdict": rel_image.tag.value,
                "shadow_boundary_distance": rel_shadow.boundary_distance,
                "image_boundary_distance": rel_image.boundary_distance,
            })

    properties = {"order_isomorphism": not disagreements}
    details: dict = {
        "seed": seed,
        "boundary_band_fraction": exclusions / n_samples if n_samples else 0.0,
    }

    if oracles is not None:
        under, over = oracles
        violations = []
        checked = 0
        for _ in range(n_oracle_pairs):
            ia, ib = sorted(int(v) for v in rng.integers(0, under.n_t, 2))
            ja, jb = (int(v) for v in rng.integers(0, under.n_x, 2))
            a, b = (ia, ja), (ib, jb)
            rel = causal_order_from_shadows(
                compute_shadow(m, under.node_event(*a), **kw),
                compute_shadow(m, under.node_event(*b), **kw),
                m.topology, m.period, tol_causal)
            tag_under = under.relation_nodes(a, b)
            tag_over = over.relation_nodes(a, b)
            checked += 1
            if tag_under.value.startswith("strictly") and not rel.related \
                    and rel.tag is not Relation.COINCIDENT:
                violations.append({"pair": [a, b], "kind": "under_related_shadow_unrelated",
                                   "shadow_verdict": rel.tag.value})
            if rel.related and not tag_over.value.startswith("strictly"):
                violations.append({"pair": [a, b], "kind": "shadow_related_over_unrelated",
                                   "shadow_verdict": rel.tag.value})
        properties["oracle_bracketing"] = not violations
        details["oracle"] = {
            "pairs_checked": checked,
            "margin_under": under.margin,
            "margin_over": over.margin,
            "violations": violations,
        }

    max_null = 0.0
    max_conf = 0.0
    if n_residual_samples > 0:
        interior = _sample_events(rng, m, n_residual_samples, x_window, shrink=0.02)
        for e in interior:
            J = jacobian(m, f, e, **kw)
            r_minus, r_plus = null_residuals(m, J, e)
            max_null = max(max_null, r_minus, r_plus)
            g_tt, g_tx, g_xx = m.components(e.t, e.x)
            try:
                _, residual = conformal_ratios(J.T @ np.diag([-1.0, 1.0]) @ J,
                                               g_tt, g_tx, g_xx)
            except EmbeddingError:
                residual = math.inf
            max_conf = max(max_conf, residual)
        properties["null_preservation"] = max_null <= null_residual_bound
        properties["conformality"] = max_conf <= tol_conf

    if m.topology is Topology.CIRCLE:
        L = m.period
        worst = 0.0
        exact = True
        for e in _sample_events(rng, m, 50, x_window):
            w = rng.uniform(L, 2 * L)
            p = Event(e.t, w - L)          # exact deck pair: p.x + L == w in floats
            q = Event(e.t, w)
            img_p = embed_cylinder(m, p, **kw)
            img_q = embed_cylinder(m, q, **kw)
            worst = max(worst, abs(img_q.cover_theta - img_p.cover_theta - TWO_PI),
                        abs(img_q.tau - img_p.tau))
            exact = exact and img_q.theta == img_p.theta and img_q.tau == img_p.tau
        properties["deck_equivariance"] = worst <= 1e-8 and exact
        details["deck_shift_error"] = worst

    sample_count = n_samples
    return VerificationReport(
        metric_label=m.label,
        samples_tested=sample_count,
        agreements=agreements,
        disagreements=disagreements,
        boundary_exclusions=exclusions,
        max_null_residual=max_null,
        max_conformality_residual=max_conf,
        properties=properties,
        details=details,
    )


# ---------------------------------------------------------------------------
# Conformal map classification

def _map_jacobian(map_fn: Callable[[Event], Event], p: Event, h: float) -> np.ndarray:
    h_t = h * (1.0 + abs(p.t))
    h_x = h * (1.0 + abs(p.x))
    f_tp = map_fn(Event(p.t + h_t, p.x))
    f_tm = map_fn(Event(p.t - h_t, p.x))
    f_xp = map_fn(Event(p.t, p.x + h_x))
    f_xm = map_fn(Event(p.t, p.x - h_x))
    return np.array([
        [(f_tp[0] - f_tm[0]) / (2 * h_t), (f_xp[0] - f_xm[0]) / (2 * h_x)],
        [(f_tp[1] - f_tm[1]) / (2 * h_t), (f_xp[1] - f_xm[1]) / (2 * h_x)],
    ])


def classify_conformal_map(map_fn: Callable[[Event], Event], m_source: Metric2D,
                           m_target: Metric2D, probe: Event, *,
                           n_probes: int = 10, seed: int = 0, h: float = 1e-5,
                           tol_conf: float = TOL_CONFORMAL,
                           x_window: tuple[float, float] | None = None) -> MapClass:
    """Classify a conformal map as causal or anti-causal.

    Verifies conformality of the finite-difference Jacobian at every probe
    (raising otherwise), pushes the future timelike vector (1, 0) through it,
    and reads the verdict off the sign of the image time component.  Per the
    underlying rigidity the verdict must be probe-independent, so it is
    re-checked at ``n_probes`` extra random probes.
    """
    rng = np.random.default_rng(seed)
    probes = [probe] + _sample_events(rng, m_source, n_probes, x_window, shrink=0.02)
    verdicts = []
    for q in probes:
        J = _map_jacobian(map_fn, q, h)
        image = map_fn(q)
        g_tt, g_tx, g_xx = m_source.components(q.t, q.x)
        G_tt, G_tx, G_xx = m_target.components(image[0], image[1])
        target = np.array([[G_tt, G_tx], [G_tx, G_xx]])
        try:
            _, residual = conformal_ratios(J.T @ target @ J, g_tt, g_tx, g_xx)
        except EmbeddingError as exc:
            raise NonConformalMapError(f"map is not conformal at {tuple(q)}: {exc}")
        if residual > tol_conf:
            raise NonConformalMapError(
                f"map is not conformal at {tuple(q)}: residual {residual:.3e} "
                f"exceeds {tol_conf:.1e}")
        w_t = float(J[0, 0])
        if abs(w_t) < 1e-12 * (1.0 + float(np.abs(J).max())):
            raise DegenerateMapError(f"degenerate Jacobian at {tuple(q)}")
        verdicts.append(MapClass.CAUSAL if w_t > 0 else MapClass.ANTI_CAUSAL)
    if len(set(verdicts)) != 1:
        raise ProbeDisagreementError(
            f"probe verdicts disagree: {[v.value for v in verdicts]}")
    return verdicts[0]
