"""Monte Carlo cross-validation of the hazard time-change construction.

Sampling uses an explicit counter-based generator (the splitmix64 output
function applied to seed + counter * golden-gamma) rather than a platform
RNG, so streams are reproducible bit-for-bit across runs and machines and
can be partitioned by counter range: sample i always consumes counter i,
so a worker assigned samples [k, k+m) draws counters [k, k+m).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orderings import phi_survival
from .transforms import TransformTable, TransformError, inv_cum_hazard, query

__all__ = ["McConfig", "McError", "uniforms", "sample_xs", "ks_distance_phi"]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class McError(ValueError):
    """Monte Carlo configuration or range failure."""


@dataclass(frozen=True)
class McConfig:
    n: int = 100_000
    seed: int = 1729

    def __post_init__(self):
        if self.n < 1000:
            raise McError("sample count must be at least 1000")


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """count doubles in [0, 1) for counters start..start+count-1."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def sample_xs(table: TransformTable, s: int, cfg: McConfig,
              start: int = 0) -> np.ndarray:
    """cfg.n draws of the level-s variable by inverse-transform sampling.

    u -> x with tbar_s(x) = 1 - u, i.e. cumulative hazard -log(1 - u).
    Draws beyond the table's attainable hazard range (probability at most
    tail_epsilon each) are clamped to the endpoint.
    """
    if not (1 <= s <= table.s_max):
        raise TransformError(f"level s={s} outside [1, {table.s_max}]")
    u = uniforms(cfg.seed, start, cfg.n)
    target = -np.log1p(-u)
    lam_hi = float(table.lam[s][table.trust_hi[s]])
    return inv_cum_hazard(table, s, np.minimum(target, lam_hi))


def ks_distance_phi(tx: TransformTable, ty: TransformTable, s: int,
                    cfg: McConfig) -> float:
    """KS distance between sampled and analytic time-change survival.

    Draws X's level-s variable, pushes each draw through Y's level-s
    cumulative hazard, and compares the empirical distribution against the
    analytic survival of the time change.  Draws beyond Y's tabulated
    hazard range are clamped; more than 0.1% of them is an error.
    """
    x = sample_xs(tx, s, cfg)
    hi_y = ty.xs[ty.trust_hi[s]]
    out_of_range = int(np.count_nonzero(x > hi_y))
    if out_of_range > 0.001 * cfg.n:
        raise McError(
            f"{out_of_range} of {cfg.n} samples beyond the reference "
            "table's hazard range; rebuild with a smaller tail_epsilon")
    z = query(ty, s, "lambda", np.minimum(x, hi_y))
    z.sort()
    analytic_cdf = 1.0 - phi_survival(tx, ty, s, z)
    i = np.arange(1, cfg.n + 1)
    d_plus = np.max(i / cfg.n - analytic_cdf)
    d_minus = np.max(analytic_cdf - (i - 1) / cfg.n)
    return float(max(d_plus, d_minus))
