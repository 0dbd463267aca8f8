"""Command-line surface: check-metric, embed, verify, diagram.

Exit codes: 0 success, 1 input/parse error, 2 configuration or contract error,
3 numerical failure, 4 property failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import RunConfig
from .csvio import PointFileError, read_points_csv, render_embedding_csv
from .diagram import render_diagram
from .embedding import (SurfaceMap, SurfaceMapError, TopologyError, embed_cylinder,
                        embed_minkowski, embed_noncompact_to_cylinder,
                        surface_map_from_expression, validate_surface_map)
from .expressions import ExpressionError
from .metric import (DomainError, Event, Metric2D, MetricError, MetricSpecError,
                     Topology, builtin_metric, check_lorentzian, metric_from_string,
                     parse_metric_spec, sampling_window)
from .nullflow import IntegrationError
from .verify import (DegenerateMapError, MapClass, NonConformalMapError,
                     ProbeDisagreementError, build_grid_oracle,
                     check_order_preservation, classify_conformal_map)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PROPERTY = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-atlas",
        description="Construct and verify flat-target causal embeddings of "
                    "two-dimensional globally hyperbolic metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metric", help="metric spec file or builtin[:k=v,...]")
    common.add_argument("--config", help="JSON file with config fields")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--grid", help="lattice resolution NxM")
    common.add_argument("--margin", type=float)
    common.add_argument("--x-window", dest="x_window",
                        help="sampling window for x as 'a:b' (line topology)")
    common.add_argument("--tol-ode", dest="tol_ode", type=float)
    common.add_argument("--tol-event", dest="tol_event", type=float)
    common.add_argument("--tol-causal", dest="tol_causal", type=float)
    common.add_argument("--tol-conf", dest="tol_conf", type=float)
    common.add_argument("--out", help="output file path")
    common.add_argument("--report", help="JSON report path")
    common.add_argument("--dump-config", action="store_true",
                        help="print the effective config and exit")

    sub.add_parser("check-metric", parents=[common],
                   help="validate the Lorentzian/adapted-coordinate contract")
    p_embed = sub.add_parser("embed", parents=[common],
                             help="embed a CSV of events into a flat target")
    p_embed.add_argument("--points", help="input CSV with header t,x")
    p_embed.add_argument("--target", choices=("minkowski", "einstein"))
    p_verify = sub.add_parser("verify", parents=[common],
                              help="run the causal/conformal property suite")
    p_verify.add_argument("--surface-map", dest="surface_map",
                          help="expression in x for the slice map (line topology)")
    p_verify.add_argument("--figures", help="directory for report figures (PNG)")
    p_diagram = sub.add_parser("diagram", parents=[common],
                               help="emit an SVG diagram of the image region")
    p_diagram.add_argument("--points", help="CSV of events for null lines")
    p_diagram.add_argument("--target", choices=("minkowski", "einstein"))
    return parser


def _parse_grid(text: str) -> tuple[int, int]:
    a, sep, b = text.lower().partition("x")
    if not sep:
        raise ValueError(f"grid must look like 64x64, got {text!r}")
    return int(a), int(b)


def _parse_window(text: str) -> tuple[float, float]:
    a, sep, b = text.partition(":")
    if not sep:
        raise ValueError(f"x window must look like -5:5, got {text!r}")
    return float(a), float(b)


def load_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overlaid by the config file, overlaid by explicit CLI flags."""
    cfg = RunConfig()
    if getattr(args, "config", None):
        text = Path(args.config).read_text(encoding="utf-8")
        try:
            file_values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MetricSpecError(f"config file is not valid JSON: {exc}")
        cfg = cfg.merged(file_values)
    overrides = {}
    for name in ("metric", "points", "target", "samples", "seed", "margin", "out",
                 "report", "figures", "surface_map", "tol_ode", "tol_event",
                 "tol_causal", "tol_conf"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "grid", None):
        overrides["grid"] = _parse_grid(args.grid)
    if getattr(args, "x_window", None):
        overrides["x_window"] = _parse_window(args.x_window)
    overrides["command"] = args.command
    return cfg.merged(overrides)


def load_metric(cfg: RunConfig) -> Metric2D:
    if not cfg.metric:
        raise MetricSpecError("no metric given; pass --metric <path|builtin[:k=v,...]>")
    path = Path(cfg.metric)
    if path.suffix == ".json" or path.exists():
        return parse_metric_spec(path.read_text(encoding="utf-8"))
    return metric_from_string(cfg.metric)


def _resolve_target(cfg: RunConfig, m: Metric2D) -> str:
    """Effective flat target; explicit minkowski is a contract error on circles."""
    if not cfg.target:
        return "einstein" if m.topology is Topology.CIRCLE else "minkowski"
    if cfg.target == "minkowski" and m.topology is Topology.CIRCLE:
        raise TopologyError("circle-topology metrics embed into the cylinder; "
                            "use --target einstein")
    return cfg.target


def _write_or_print(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands

def cmd_check_metric(cfg: RunConfig) -> int:
    m = load_metric(cfg)
    report = check_lorentzian(m, cfg.grid[0], cfg.grid[1], x_window=cfg.x_window)
    print(report.summary())
    if cfg.report:
        doc = {
            "metric_label": report.label,
            "grid": [report.n_t, report.n_x],
            "ok": report.ok,
            "violations": [v._asdict() for v in report.violations],
        }
        Path(cfg.report).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                                    encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_CONFIG


def cmd_embed(cfg: RunConfig) -> int:
    m = load_metric(cfg)
    if not cfg.points:
        raise MetricSpecError("embed needs --points <csv>")
    target = _resolve_target(cfg, m)
    events = read_points_csv(Path(cfg.points).read_text(encoding="utf-8"))
    kw = dict(tol_rel=cfg.tol_ode, tol_abs=cfg.tol_ode_abs, tol_event=cfg.tol_event,
              max_steps=cfg.max_steps)
    results: list[tuple | None] = []
    errors: list[str | None] = []
    for p in events:
        try:
            if target == "minkowski":
                e = embed_minkowski(m, None, p, **kw)
                results.append((e.tau, e.x))
            elif m.topology is Topology.CIRCLE:
                e = embed_cylinder(m, p, **kw)
                results.append((e.tau, e.theta, e.cover_theta))
            else:
                e = embed_noncompact_to_cylinder(m, None, p, **kw)
                results.append((e.tau, e.theta, e.cover_theta))
            errors.append(None)
        except (IntegrationError, DomainError, MetricError) as exc:
            results.append(None)
            errors.append(str(exc))
    text = render_embedding_csv(events, results, errors, target)
    _write_or_print(text, cfg.out)
    return EXIT_NUMERICAL if any(e is not None for e in errors) else EXIT_OK


def _classification_selfcheck() -> bool:
    """Canonical flat-plane map classifications; metric-independent."""
    flat = builtin_metric("minkowski")
    probe = Event(0.3, -0.2)
    cases = [
        (lambda p: p, MapClass.CAUSAL),
        (lambda p: Event(2 * p.t, 2 * p.x), MapClass.CAUSAL),
        (lambda p: Event(p.t * 1.25 + p.x * 0.75, p.t * 0.75 + p.x * 1.25),
         MapClass.CAUSAL),
        (lambda p: Event(-p.t, p.x), MapClass.ANTI_CAUSAL),
    ]
    ok = True
    for fn, expected in cases:
        try:
            ok = ok and classify_conformal_map(fn, flat, flat, probe) is expected
        except (NonConformalMapError, DegenerateMapError, ProbeDisagreementError):
            ok = False
    try:
        classify_conformal_map(lambda p: Event(p.t, 2 * p.x), flat, flat, probe)
        ok = False
    except NonConformalMapError:
        pass
    return ok


def cmd_verify(cfg: RunConfig) -> int:
    m = load_metric(cfg)
    window = sampling_window(m, cfg.x_window)
    f: SurfaceMap | None = None
    if cfg.surface_map:
        if m.topology is Topology.CIRCLE:
            raise SurfaceMapError("circle topology fixes the slice map; "
                                  "--surface-map applies to line topology only")
        f = surface_map_from_expression(cfg.surface_map)
        validate_surface_map(f, window, topology=m.topology, period=m.period)

    oracles = None
    n_t, n_x = cfg.grid
    if n_t >= 16 and n_x >= 16:
        over = build_grid_oracle(m, n_t, n_x, margin=cfg.margin, x_window=cfg.x_window)
        under = build_grid_oracle(m, n_t, n_x, margin=-over.margin, x_window=cfg.x_window)
        oracles = (under, over)

    report = check_order_preservation(
        m, f, n_samples=cfg.samples, seed=cfg.seed, x_window=cfg.x_window,
        oracles=oracles, tol_causal=cfg.tol_causal, tol_conf=cfg.tol_conf,
        tol_rel=cfg.tol_ode, tol_abs=cfg.tol_ode_abs)
    report.properties["classification"] = _classification_selfcheck()

    print(report.table())
    if cfg.report:
        Path(cfg.report).write_text(report.to_json() + "\n", encoding="utf-8")
    if cfg.figures:
        from .figures import save_report_figures
        for p in save_report_figures(cfg.figures, m, f, report, seed=cfg.seed,
                                     x_window=cfg.x_window):
            print(f"figure: {p}")
    if not report.passed:
        failing = sorted(k for k, v in report.properties.items() if not v)
        print(f"property failure: {', '.join(failing)}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_diagram(cfg: RunConfig) -> int:
    m = load_metric(cfg)
    target = _resolve_target(cfg, m)
    events = None
    if cfg.points:
        events = read_points_csv(Path(cfg.points).read_text(encoding="utf-8"))
    svg = render_diagram(m, target=target, grid=cfg.grid, events=events,
                         x_window=cfg.x_window, tol_rel=cfg.tol_ode,
                         tol_abs=cfg.tol_ode_abs)
    out = cfg.out or "diagram.svg"
    _write_or_print(svg, out)
    if out != "-":
        print(f"wrote {out}")
    return EXIT_OK


_COMMANDS = {
    "check-metric": cmd_check_metric,
    "embed": cmd_embed,
    "verify": cmd_verify,
    "diagram": cmd_diagram,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except (MetricSpecError, ExpressionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "dump_config", False):
        print(cfg.dump())
        return EXIT_OK
    try:
        return _COMMANDS[args.command](cfg)
    except (MetricSpecError, ExpressionError, PointFileError, DomainError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegrationError, MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (TopologyError, SurfaceMapError, NonConformalMapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
