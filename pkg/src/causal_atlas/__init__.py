"""Flat-target causal embeddings of two-dimensional globally hyperbolic metrics.

Events are encoded by the slice intervals their null curves cut out of the
Cauchy slice t = 0; matching those intervals against the unique flat event
with the same interval embeds the whole spacetime order-isomorphically (and
conformally) into the Minkowski plane, or into the flat cylinder for circle
topology, with a conformal compactification bridging the two targets.
"""

from .config import ENV_THREADS, RunConfig, ordered_map, worker_count
from .csvio import (PointFileError, fmt17, nullpath_to_csv, read_points_csv,
                    render_embedding_csv)
from .diagram import SvgCanvas, render_diagram
from .embedding import (CylinderEvent, EmbeddingError, IDENTITY_MAP, JACOBIAN_STEP,
                        MinkowskiEvent, SurfaceMap, SurfaceMapError, TOL_CONFORMAL,
                        TopologyError, compactify, conformal_factor, conformal_ratios,
                        embed_cylinder, embed_from_shadow, embed_minkowski,
                        embed_noncompact_to_cylinder, equivariant_map, jacobian,
                        surface_map_from_expression, validate_surface_map)
from .expressions import CompiledExpression, ExpressionError, parse_expression
from .metric import (BUILTIN_NAMES, DomainError, Event, Metric2D, MetricError,
                     MetricSpecError, Topology, ValidationReport, builtin_metric,
                     check_lorentzian, eval_metric, metric_from_dict,
                     metric_from_string, parse_metric_spec, render_metric_spec,
                     sampling_window)
from .nullflow import (Direction, IntegrationError, MAX_STEPS, NullBranch, NullPath,
                       TOL_EVENT, TOL_ODE_ABS, TOL_ODE_REL, integrate_null,
                       integrate_on_grid, null_slopes, shadow_endpoint)
from .shadow import (CausalRelation, Relation, Shadow, ShadowSide, TOL_CAUSAL,
                     causal_order, causal_order_from_shadows, compute_shadow,
                     shadows_intersect)
from .verify import (DegenerateMapError, GridOracle, MapClass, NonConformalMapError,
                     OracleVerdict, ProbeDisagreementError, VerificationReport,
                     build_grid_oracle, check_order_preservation,
                     classify_conformal_map, cylinder_order, minkowski_order,
                     null_residuals)

__version__ = "0.1.0"
