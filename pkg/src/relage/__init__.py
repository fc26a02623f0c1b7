"""relage: numerical relative-ageing comparisons of lifetime distributions.

Decides, for two nonnegative lifetime distributions and a transform level
s, whether one ages faster than the other under five generalized orderings
(sIFR_R, sIFRA_R, sNBU_R, sNBUFR_R, sNBAFR_R), classifies single
distributions into the matching ageing classes, and cross-validates the
construction by Monte Carlo.
"""

from .ageing import (AgeingReport, CLASS_TAGS, ageing_report, classical_name,
                     classify)
from .distributions import (DistributionError, DistributionSpec, affine,
                            evaluate, exponential, from_hazard, from_mrl,
                            from_survival, make_distribution, uniform, weibull)
from .expressions import (DomainError, Expr, ExpressionError, ParseError,
                          UnknownIdentifierError)
from .expressions import evaluate as eval_expression
from .expressions import parse as parse_expression
from .expressions import to_source
from .montecarlo import McConfig, McError, ks_distance_phi, sample_xs, uniforms
from .orderings import (ORDERINGS, OrderingError, OrderVerdict, check_order,
                        implication_chain, phi_h_curve, phi_survival,
                        ratio_curve)
from .reporting import (ComparisonConfig, ComparisonReport, ConfigError,
                        emit_curves, load_config, run_comparison)
from .shapes import SHAPES, ShapeError, ShapeVerdict, check_shape
from .transforms import (DivergentMeanError, GridConfig, TransformError,
                         TransformTable, build_transforms, gen_mean,
                         inv_cum_hazard, query)

__version__ = "0.1.0"

__all__ = [
    "AgeingReport", "CLASS_TAGS", "ageing_report", "classical_name", "classify",
    "DistributionError", "DistributionSpec", "affine", "evaluate",
    "exponential", "from_hazard", "from_mrl", "from_survival",
    "make_distribution", "uniform", "weibull",
    "DomainError", "Expr", "ExpressionError", "ParseError",
    "UnknownIdentifierError", "eval_expression", "parse_expression",
    "to_source",
    "McConfig", "McError", "ks_distance_phi", "sample_xs", "uniforms",
    "ORDERINGS", "OrderingError", "OrderVerdict", "check_order",
    "implication_chain", "phi_h_curve", "phi_survival", "ratio_curve",
    "ComparisonConfig", "ComparisonReport", "ConfigError", "emit_curves",
    "load_config", "run_comparison",
    "SHAPES", "ShapeError", "ShapeVerdict", "check_shape",
    "DivergentMeanError", "GridConfig", "TransformError", "TransformTable",
    "build_transforms", "gen_mean", "inv_cum_hazard", "query",
    "__version__",
]
