"""Iterated equilibrium survival transforms on a shared grid.

Level 0 is the density; each further level is the normalized tail integral
of the previous one, so level 1 recovers the survival function and level 2
the classical equilibrium distribution's survival.  Per level the table
stores the transform, its cumulative hazard, hazard rate, and mean residual
life, plus the scalar generalized mean (the normalizer).

Level-by-level identities are kept exact by construction: the level-s tail
integrals feed both the next transform and the level-s MRL, so
r[s] * mrl[s-1] == 1 holds to machine precision on the grid.

Grid spacing is linear up to the median and then advances in equal
cumulative-hazard steps (equal survival log-decrements).  Equal-hazard
spacing keeps the per-step decay of every integrand roughly constant, which
composite Simpson needs; purely geometric spacing under-resolves
distributions whose hazard grows polynomially.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .distributions import DistributionSpec
from .quadrature import fit_exponential_tail, tail_integrals, tail_integrals_fn

__all__ = [
    "GridConfig",
    "TransformTable",
    "TransformError",
    "DivergentMeanError",
    "build_transforms",
    "query",
    "gen_mean",
    "inv_cum_hazard",
]

QUERY_QUANTITIES = ("tbar", "lambda", "r", "mrl")

_TBAR_FLOOR = 1e-300         # keeps log finite; values below are untrusted
_TRUST_FLOOR = 1e-290        # smallest transform value predicates may use
_STEP_CAP = 0.25             # largest trusted per-step cumulative-hazard increment
_MAX_SMAX = 8


class TransformError(ValueError):
    """Table construction or query failure."""


class DivergentMeanError(TransformError):
    """A generalized mean does not converge numerically."""


@dataclass(frozen=True)
class GridConfig:
    """Grid resolution and extent controls.

    tail_epsilon fixes the automatic right endpoint: it is pushed out until
    the deepest requested transform falls below it.  x_max forces the
    endpoint instead (values beyond the numerically trustworthy range are
    floored and excluded from predicates).  x_min_positive is the smallest
    abscissa used by predicates defined only for positive arguments; None
    defaults it to x_max * 1e-9.
    """

    n_points: int = 2001
    tail_epsilon: float = 1e-10
    x_min_positive: Optional[float] = None
    x_max: Optional[float] = None

    def __post_init__(self):
        if self.n_points < 101:
            raise TransformError("n_points must be at least 101")
        if not (0.0 < self.tail_epsilon < 1e-4):
            raise TransformError("tail_epsilon must lie in (0, 1e-4)")
        if self.x_max is not None and self.x_max <= 0:
            raise TransformError("x_max must be positive")


@dataclass(frozen=True, eq=False)
class TransformTable:
    """Tabulated transforms for levels 0..s_max of one distribution."""

    spec: DistributionSpec
    config: GridConfig
    s_max: int
    xs: np.ndarray = field(repr=False)
    tbar: list = field(repr=False)        # tbar[s], s = 0..s_max
    lam: dict = field(repr=False)         # lam[s], s = 1..s_max
    r: dict = field(repr=False)           # r[s], s = 1..s_max
    mrl: dict = field(repr=False)         # mrl[s], s = 1..s_max
    gen_means: np.ndarray = field(repr=False)   # index s = 0..s_max
    trust_hi: dict = field(repr=False)    # last trusted grid index per level
    provenance: dict = field(repr=False)
    _interp: dict = field(repr=False, default_factory=dict)

    @property
    def x_max(self) -> float:
        return float(self.xs[-1])

    @property
    def x_min_positive(self) -> float:
        if self.config.x_min_positive is not None:
            return self.config.x_min_positive
        return self.x_max * 1e-9

    def trusted_slice(self, s: int) -> slice:
        """Grid indices whose level-s values are numerically reliable."""
        return slice(0, self.trust_hi[s] + 1)

    def support_edge(self, s: int) -> int:
        """First grid index with positive level-s cumulative hazard minus one.

        0 except for location-shifted inputs at level 1, where the hazard
        plateau [0, b) is skipped.
        """
        lam = self.lam[s]
        positive = np.nonzero(lam > 0.0)[0]
        if positive.size == 0:
            raise TransformError(f"level {s} cumulative hazard identically zero")
        return max(int(positive[0]) - 1, 0)

    def lam_interp(self, s: int) -> PchipInterpolator:
        key = ("lam", s)
        if key not in self._interp:
            self._interp[key] = PchipInterpolator(self.xs, self.lam[s])
        return self._interp[key]

    def r_interp(self, s: int) -> PchipInterpolator:
        key = ("r", s)
        if key not in self._interp:
            vals = self.r[s]
            finite = np.isfinite(vals)
            if not finite.all():
                # infinite hazard at a support edge (shape < 1 families)
                self._interp[key] = PchipInterpolator(self.xs[finite],
                                                      vals[finite])
            else:
                self._interp[key] = PchipInterpolator(self.xs, vals)
        return self._interp[key]

    def mrl_interp(self, s: int) -> PchipInterpolator:
        key = ("mrl", s)
        if key not in self._interp:
            self._interp[key] = PchipInterpolator(self.xs, self.mrl[s])
        return self._interp[key]


def _level_range(table: TransformTable, s: int, lo: int = 1) -> None:
    if not (lo <= s <= table.s_max):
        raise TransformError(f"level s={s} outside [{lo}, {table.s_max}]")


# ---------------------------------------------------------------------------
# grid construction

def _solve_survival(spec: DistributionSpec, targets: np.ndarray,
                    lo: float, hi: float) -> np.ndarray:
    """Vectorized bisection: x with survival(x) = targets (decreasing)."""
    lo_v = np.full(targets.shape, lo)
    hi_v = np.full(targets.shape, hi)
    for _ in range(60):
        mid = 0.5 * (lo_v + hi_v)
        above = spec.survival(mid) > targets
        lo_v = np.where(above, mid, lo_v)
        hi_v = np.where(above, hi_v, mid)
    return 0.5 * (lo_v + hi_v)


def _find_decrease(spec: DistributionSpec, target: float, label: str) -> float:
    hi = 1.0
    if spec.support_end is not None:
        return spec.support_end * (1.0 - 1e-12)
    for _ in range(80):
        if spec.survival(hi) <= target:
            return hi
        hi *= 2.0
    raise DivergentMeanError(
        f"{label}: survival never drops to {target:g}; tail looks divergent")


def _bridge(start: float, end: float, d0: float) -> np.ndarray:
    """Points between start and end whose gaps double from ~2*d0.

    Smooths spacing discontinuities so the quadrature's error constant
    stays bounded across region junctions.
    """
    pts = []
    d, x = d0, start
    while True:
        d *= 2.0
        if x + 1.5 * d >= end:
            return np.array(pts)
        x += d
        pts.append(x)


def _make_grid(spec: DistributionSpec, cfg: GridConfig, lam_target: float):
    """Head linear to the median, then equal cumulative-hazard steps."""
    n = cfg.n_points
    bracket_hi = _find_decrease(spec, np.exp(-lam_target) * 0.999, spec.label)
    median = float(_solve_survival(spec, np.array([0.5]), 0.0, bracket_hi)[0])
    lam_median = -np.log(float(spec.survival(median)))

    forced = cfg.x_max
    if forced is not None:
        sf_end = max(float(spec.survival(forced)), 1e-280)
        lam_attain = -np.log(sf_end)
        lam_tail_end = min(lam_target, lam_attain)
    else:
        lam_attain = lam_target
        lam_tail_end = lam_target

    n_head = max(51, n // 2)
    n_tail = n - n_head
    n_ext = 0
    lam_ext = lam_tail_end
    if forced is not None and lam_attain > lam_tail_end:
        # extension zone: still hazard-adaptive, coarser, so the barely
        # resolved region cannot pollute tail integrals inside the
        # trusted range; anything beyond it is negligible (< e^-3*lam).
        n_ext = max(32, n_tail // 8)
        n_tail -= n_ext
        lam_ext = min(lam_attain, 3.0 * lam_target)

    levels = np.linspace(lam_median, lam_tail_end, n_tail + 1)[1:]
    tail_hi = bracket_hi if forced is None else forced
    tail = _solve_survival(spec, np.exp(-levels), median, tail_hi)
    head = np.linspace(0.0, median, n_head)
    if 0.0 < spec.support_start < median:
        # a location shift puts a derivative kink at the shift point in
        # every derived curve; pin it to a node
        head = np.union1d(head, [spec.support_start])
    bridge = _bridge(median, tail[0], median / (n_head - 1))
    parts = [head, bridge, tail]
    if n_ext:
        du = levels[1] - levels[0]
        ramp = _bridge(lam_tail_end, lam_ext, du)
        n_rest = max(n_ext - ramp.size, 4)
        rest_lo = ramp[-1] if ramp.size else lam_tail_end
        rest = np.linspace(rest_lo, lam_ext, n_rest + 1)[1:]
        ext_levels = np.concatenate([ramp, rest])
        parts.append(_solve_survival(spec, np.exp(-ext_levels), tail[-1],
                                     tail_hi))

    xs = np.concatenate(parts)
    n_fill = 0
    if forced is not None and xs[-1] < forced * (1.0 - 1e-9):
        # survival flattens (often underflow) before the forced endpoint:
        # pad linearly; the padded region is floored and untrusted.
        n_fill = max(32, n // 16)
        filler = np.linspace(xs[-1], forced, n_fill + 1)[1:]
        xs = np.concatenate([xs, filler])
    elif forced is not None:
        xs[-1] = forced
    xs = np.unique(xs)
    if xs.size < 101:
        raise TransformError("grid collapsed; distribution scale too extreme")
    return xs, median, n_fill


# ---------------------------------------------------------------------------
# build

def build_transforms(spec: DistributionSpec, s_max: int,
                     cfg: GridConfig | None = None) -> TransformTable:
    """Tabulate transforms for levels 0..s_max of ``spec``."""
    if not (1 <= s_max <= _MAX_SMAX):
        raise TransformError(f"s_max must lie in [1, {_MAX_SMAX}]")
    cfg = cfg or GridConfig()

    lam_target = -np.log(cfg.tail_epsilon)
    for attempt in range(40):
        xs, median, n_fill = _make_grid(spec, cfg, lam_target)
        table = _build_on_grid(spec, s_max, cfg, xs, median, n_fill, lam_target)
        if cfg.x_max is not None:
            return table
        deepest = table.tbar[s_max]
        hi = table.trust_hi[s_max]
        if deepest[-1] <= cfg.tail_epsilon or hi < xs.size - 1:
            return table
        lam_target *= 1.35
    raise DivergentMeanError(
        f"{spec.label}: could not reach tail_epsilon at level {s_max}; "
        "generalized means may not all be finite")


def _build_on_grid(spec, s_max, cfg, xs, median, n_fill, lam_target):
    pdf_vals = spec.pdf(xs)
    sf_vals = spec.survival(xs)
    if abs(sf_vals[0] - 1.0) > 1e-9:
        raise TransformError(f"{spec.label}: survival(0) = {sf_vals[0]!r}, expected 1")

    b = spec.support_end
    tbar = [pdf_vals, sf_vals]          # levels 0 and 1 are exact identities
    gen_means = [1.0]                   # integral of the density
    lam, r, mrl, trust_hi = {}, {}, {}, {}
    tail_corrections = []
    fit_window = max(8, xs.size // 10)

    for s in range(1, s_max + 1):
        t_s = tbar[s]
        trusted = int(np.argmin(t_s > _TRUST_FLOOR) - 1) if np.any(
            t_s <= _TRUST_FLOOR) else xs.size - 1
        if trusted < 2:
            raise TransformError(f"{spec.label}: level {s} transform vanished")

        if s == 1:
            # the level-1 transform is the survival evaluator itself, so its
            # tail integrals can use the callable at Gauss-Legendre nodes
            tails = tail_integrals_fn(spec.survival, xs)
        else:
            tails = tail_integrals(xs, t_s)
        if b is not None:
            corr = float(t_s[-1] * (b - xs[-1]) / 2.0)
        else:
            win = slice(max(0, trusted + 1 - fit_window), trusted + 1)
            slope, corr = fit_exponential_tail(xs[win], t_s[win])
            if not np.isfinite(corr):
                raise DivergentMeanError(
                    f"{spec.label}: level {s} tail does not decay "
                    f"(fitted slope {slope:g})")
        total = tails[0] + corr
        if corr > 0.01 * total:
            raise DivergentMeanError(
                f"{spec.label}: level {s} tail correction {corr:g} exceeds 1% "
                f"of the integral {total:g}; generalized mean looks divergent")
        tails = tails + corr
        tail_corrections.append(float(corr))
        gen_means.append(float(tails[0]))

        floored = np.maximum(t_s, _TBAR_FLOOR)
        lam[s] = -np.log(floored)
        with np.errstate(divide="ignore", over="ignore"):
            r[s] = tbar[s - 1] / (gen_means[s - 1] * floored)
        mrl[s] = tails / floored

        # resolution gate: trusted values must also be resolved by the grid
        steps = np.diff(lam[s][:trusted + 1])
        coarse = np.nonzero(steps > _STEP_CAP)[0]
        if coarse.size:
            trusted = min(trusted, int(coarse[0]))
        # correction gate: the boundary layer where the fitted tail
        # correction stops being a sub-1% effect is biased; keep it out of
        # predicates and inversions
        if corr > 0.0:
            deep = np.nonzero(tails < 100.0 * corr)[0]
            if deep.size:
                trusted = min(trusted, max(int(deep[0]) - 1, 2))
        trust_hi[s] = trusted

        sl = np.diff(t_s[:trusted + 1])
        if np.any(sl > 1e-9 * t_s[0]):
            raise TransformError(
                f"{spec.label}: level {s} transform is not nonincreasing; "
                "source evaluators look inconsistent")

        if s < s_max:
            nxt = tails / tails[0]
            nxt[0] = 1.0
            tbar.append(nxt)

    provenance = {
        "median": float(median),
        "x_max": float(xs[-1]),
        "n_points": int(xs.size),
        "n_filler": int(n_fill),
        "lam_target": float(lam_target),
        "tail_corrections": tail_corrections,
    }
    return TransformTable(
        spec=spec, config=cfg, s_max=s_max, xs=xs, tbar=tbar,
        lam=lam, r=r, mrl=mrl, gen_means=np.array(gen_means),
        trust_hi=trust_hi, provenance=provenance,
    )


# ---------------------------------------------------------------------------
# queries

def gen_mean(table: TransformTable, s: int) -> float:
    """Generalized mean (total integral) of the level-s transform."""
    if not (0 <= s <= table.s_max):
        raise TransformError(f"level s={s} outside [0, {table.s_max}]")
    return float(table.gen_means[s])


def query(table: TransformTable, s: int, quantity: str, x):
    """Interpolated level-s quantity at x.

    tbar and lambda share one monotone interpolant (tbar = exp(-lambda));
    mrl at level s is 1 / r at level s+1 wherever that level exists, so the
    reciprocal identity holds pointwise for queried values too.
    """
    if quantity not in QUERY_QUANTITIES:
        raise TransformError(f"unknown quantity {quantity!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > table.x_max * (1 + 1e-12)):
        raise TransformError(
            f"query point outside grid range [0, {table.x_max:g}]")
    if quantity == "tbar":
        _level_range(table, s, lo=0)
        if s == 0:
            vals = table.spec.pdf(arr)
        else:
            vals = np.exp(-table.lam_interp(s)(arr))
    elif quantity == "lambda":
        _level_range(table, s)
        vals = table.lam_interp(s)(arr)
    elif quantity == "r":
        _level_range(table, s)
        vals = table.r_interp(s)(arr)
    else:
        _level_range(table, s)
        if s + 1 <= table.s_max:
            vals = 1.0 / table.r_interp(s + 1)(arr)
        else:
            vals = table.mrl_interp(s)(arr)
    if np.ndim(x) == 0:
        return float(vals)
    return np.asarray(vals, dtype=float)


def inv_cum_hazard(table: TransformTable, s: int, u):
    """x with cumulative hazard Lambda_s(x) = u, to 1e-10 * max(1, u).

    Bisection on the monotone interpolant bracketed by the grid, then Newton
    refinement using the interpolant's own derivative.
    """
    _level_range(table, s)
    scalar = np.ndim(u) == 0
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    hi_idx = table.trust_hi[s]
    lam_hi = float(table.lam[s][hi_idx])
    if np.any(u_arr < 0):
        raise TransformError("cumulative hazard argument must be nonnegative")
    if np.any(u_arr > lam_hi):
        raise TransformError(
            f"cumulative hazard {float(np.max(u_arr)):g} beyond attainable "
            f"maximum {lam_hi:g} at level {s}")

    interp = table.lam_interp(s)
    lam_grid = table.lam[s]
    pos = np.searchsorted(lam_grid[:hi_idx + 1], u_arr, side="left")
    pos = np.clip(pos, 1, hi_idx)
    lo = table.xs[pos - 1].copy()
    hi = table.xs[pos].copy()
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        below = interp(mid) < u_arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    deriv = interp.derivative()
    for _ in range(4):
        d = deriv(x)
        step = np.where(d > 0, (interp(x) - u_arr) / np.where(d > 0, d, 1.0), 0.0)
        x = np.clip(x - step, lo, hi)
    x = np.where(u_arr == 0.0, 0.0, x)
    resid = np.abs(interp(x) - u_arr)
    tol = 1e-10 * np.maximum(1.0, u_arr)
    if np.any(resid > tol):
        worst = float(np.max(resid / np.maximum(tol, 1e-300)))
        raise TransformError(
            f"cumulative-hazard inversion did not converge (residual "
            f"{worst:g}x tolerance)")
    return float(x[0]) if scalar else x
