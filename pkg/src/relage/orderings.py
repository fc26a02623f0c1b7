"""Relative-ageing order checks between two transform tables.

Each of the five orderings asks whether the time-change curve
H(u) = Lambda_X(inverse Lambda_Y)(u) -- the cumulative hazard of X's
level-s variable measured on Y's hazard clock -- lands in a positive
ageing class:

    sIFR_R     H convex             <=>  r_X/r_Y increasing
    sIFRA_R    H star-shaped        <=>  Lambda_X/Lambda_Y increasing (x>0)
    sNBU_R     H super-additive
    sNBUFR_R   r_X/r_Y       >= its value at the support edge
    sNBAFR_R   Lambda ratio  >= the same threshold        (x>0)

The ratio forms are the primary characterizations (cheap, well
conditioned); the geometric H forms are attached as cross-checks where
available.  A decisive disagreement between the two downgrades the verdict
to inconclusive, turning the mathematical equivalences into built-in
self-tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .shapes import ShapeVerdict, check_shape
from .transforms import TransformTable, TransformError, inv_cum_hazard

__all__ = [
    "ORDERINGS",
    "OrderVerdict",
    "OrderingError",
    "phi_survival",
    "check_order",
    "implication_chain",
    "ratio_curve",
    "phi_h_curve",
]

# implication-chain order: each ordering implies all later ones
ORDERINGS = ("sIFR_R", "sIFRA_R", "sNBU_R", "sNBUFR_R", "sNBAFR_R")

_DEFAULT_TOL = 1e-8
_CC_RESOLUTION = 512   # curvature cross-checks subsample to >= range/512 gaps
_CC_TOL_FLOOR = 1e-4   # conditioning floor of interpolated second differences


class OrderingError(ValueError):
    """Incompatible tables or unusable ordering arguments."""


@dataclass(frozen=True)
class OrderVerdict:
    ordering: str
    s: int
    primary: ShapeVerdict
    crosscheck: Optional[ShapeVerdict]
    tolerance: float

    @property
    def kind(self) -> str:
        """Combined verdict: cross-check disagreement forces inconclusive."""
        if (self.crosscheck is not None and self.primary.decisive
                and self.crosscheck.decisive
                and self.crosscheck.kind != self.primary.kind):
            return "inconclusive"
        return self.primary.kind

    @property
    def margin(self) -> float:
        return self.primary.margin

    @property
    def witness(self):
        return self.primary.witness

    def to_dict(self) -> dict:
        return {
            "ordering": self.ordering, "s": self.s, "kind": self.kind,
            "margin": self.margin, "witness": self.primary.to_dict()["witness"],
            "tolerance": self.tolerance, "primary": self.primary.to_dict(),
            "crosscheck": None if self.crosscheck is None
            else self.crosscheck.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "OrderVerdict":
        cc = d.get("crosscheck")
        return OrderVerdict(
            d["ordering"], d["s"], ShapeVerdict.from_dict(d["primary"]),
            None if cc is None else ShapeVerdict.from_dict(cc), d["tolerance"],
        )


def _require_level(tx: TransformTable, ty: TransformTable, s: int) -> None:
    if s < 1 or s > tx.s_max or s > ty.s_max:
        raise OrderingError(
            f"level s={s} not available in both tables "
            f"(s_max {tx.s_max} and {ty.s_max})")


def _predicate_lo(table: TransformTable, s: int) -> float:
    """Smallest abscissa safe for cross-table interpolation at level s.

    The first node with positive cumulative hazard for ordinary tables;
    for location-shifted tables (hazard plateau) the monotone interpolant
    is locally inaccurate across the plateau junction, so two further
    segments are skipped.
    """
    lam = table.lam[s]
    idx = np.nonzero(lam > 0.0)[0]
    if idx.size == 0:
        raise OrderingError("cumulative hazard identically zero")
    fp = int(idx[0])
    if fp >= 2:
        fp = min(fp + 1, table.xs.size - 1)
    return float(table.xs[fp])


def _kink_zone(table: TransformTable) -> tuple[float, float] | None:
    """Open interval around an interior support-start kink, if any.

    Location-shifted distributions have a derivative kink at the shift
    point in every level >= 2 curve; cross-table interpolation inside the
    two adjacent segments is locally first-order and excluded from
    predicate grids (the kink node itself is kept).
    """
    b = table.spec.support_start
    if b <= 0.0:
        return None
    i = int(np.searchsorted(table.xs, b))
    lo = table.xs[max(i - 2, 0)]
    hi = table.xs[min(i + 2, table.xs.size - 1)]
    return float(lo), float(hi)


def _shared_grid(tx: TransformTable, ty: TransformTable, s: int) -> np.ndarray:
    """Union of both tables' nodes on the jointly trusted positive range."""
    lo = max(_predicate_lo(tx, s), _predicate_lo(ty, s), tx.x_min_positive,
             ty.x_min_positive)
    hi = min(tx.xs[tx.trust_hi[s]], ty.xs[ty.trust_hi[s]])
    if hi <= lo:
        raise OrderingError(
            "tables have no overlapping trusted range; grids incompatible")
    grid = np.unique(np.concatenate([tx.xs, ty.xs]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    for table in (tx, ty):
        zone = _kink_zone(table)
        if zone is not None:
            inside = (grid > zone[0]) & (grid < zone[1])
            inside &= grid != table.spec.support_start
            grid = grid[~inside]
    if grid.size < 8:
        raise OrderingError(
            "fewer than 8 shared trusted grid points; grids incompatible")
    return grid


def ratio_curve(tx: TransformTable, ty: TransformTable, s: int,
                quantity: str) -> tuple[np.ndarray, np.ndarray]:
    """(grid, ratio) of level-s hazard rates ("r") or cumulative hazards
    ("lambda") on the shared trusted grid."""
    _require_level(tx, ty, s)
    grid = _shared_grid(tx, ty, s)
    if quantity == "r":
        num = tx.r_interp(s)(grid)
        den = ty.r_interp(s)(grid)
    elif quantity == "lambda":
        num = tx.lam_interp(s)(grid)
        den = ty.lam_interp(s)(grid)
    else:
        raise OrderingError(f"unsupported ratio quantity {quantity!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    ok = np.isfinite(ratio)
    if ok.sum() < 8:
        raise OrderingError("ratio curve is not finite on the shared grid")
    return grid[ok], ratio[ok]


def phi_h_curve(tx: TransformTable, ty: TransformTable, s: int,
                coarse: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """The curve H(u) = Lambda_X(inverse Lambda_Y)(u) sampled at Y's nodes.

    Evaluated without numerical inversion: at u = Lambda_Y(node) the inverse
    is the node itself.  ``coarse`` subsamples nodes with a geometric
    stride, which keeps second-difference noise below curvature signals.
    """
    _require_level(tx, ty, s)
    lo = max(_predicate_lo(tx, s), _predicate_lo(ty, s))
    hi_x = tx.xs[tx.trust_hi[s]]
    lam_y = ty.lam[s]
    idx_hi = ty.trust_hi[s]
    keep = np.nonzero((lam_y[: idx_hi + 1] > 0.0)
                      & (ty.xs[: idx_hi + 1] >= lo)
                      & (ty.xs[: idx_hi + 1] <= hi_x))[0]
    if keep.size < 8:
        raise OrderingError("no usable overlap for the hazard time change")
    u = lam_y[keep]
    h = tx.lam_interp(s)(ty.xs[keep])
    u, first = np.unique(u, return_index=True)
    h = h[first]
    if coarse and u.size > 32:
        # enforce a minimum gap: second differences of interpolated values
        # are unusable below it
        du_min = (u[-1] - u[0]) / _CC_RESOLUTION
        sel = [0]
        last = u[0]
        for k in range(1, u.size):
            if u[k] - last >= du_min:
                sel.append(k)
                last = u[k]
        u, h = u[sel], h[sel]
    # cap where X's hazard explodes on Y's clock (finite-support X): the
    # interpolant is unusable across near-vertical steps
    jumps = np.nonzero(np.diff(h) > 0.5)[0]
    if jumps.size and jumps[0] >= 8:
        u, h = u[: jumps[0] + 1], h[: jumps[0] + 1]
    u = np.concatenate([[0.0], u])
    h = np.concatenate([[0.0], h])
    return u, h


def phi_survival(tx: TransformTable, ty: TransformTable, s: int, x):
    """Survival of Lambda_Y(X_s) at x: tbar_X at (inverse Lambda_Y)(x).

    Equals exp(-H(x)); defined for x up to Y's attainable level-s
    cumulative hazard.
    """
    _require_level(tx, ty, s)
    y = inv_cum_hazard(ty, s, x)
    y = np.minimum(y, tx.x_max)
    vals = np.exp(-tx.lam_interp(s)(y))
    if np.ndim(x) == 0:
        return float(vals)
    return np.asarray(vals, dtype=float)


def _threshold(tx: TransformTable, ty: TransformTable, s: int):
    """NBUFR/NBAFR threshold: the hazard ratio at the support edge.

    For s = 1 this is the density ratio at the left support endpoints,
    evaluated from the distribution specs; for s >= 2 the edge hazards are
    the reciprocal generalized means already tabulated at the origin.
    Returns (value, note); value is NaN when undefined (0/0).
    """
    if s == 1:
        fx = tx.spec.pdf(tx.spec.support_start)
        fy = ty.spec.pdf(ty.spec.support_start)
        if fy == 0.0 and fx == 0.0:
            return float("nan"), "density ratio at the origin undefined (0/0)"
        if fy == 0.0:
            return float("nan"), "reference density vanishes at the origin"
        with np.errstate(divide="ignore"):
            return float(fx / fy), "density ratio at the support edge"
    return float(tx.r[s][0] / ty.r[s][0]), "edge hazard ratio"


def check_order(tx: TransformTable, ty: TransformTable, s: int, ordering: str,
                tol: float = _DEFAULT_TOL, *,
                full_pairs: bool = False) -> OrderVerdict:
    """Decide one relative-ageing ordering at level s (X against Y)."""
    if ordering not in ORDERINGS:
        raise OrderingError(f"unknown ordering {ordering!r}; "
                            f"choose from {ORDERINGS}")
    _require_level(tx, ty, s)

    crosscheck = None
    cc_tol = max(tol, _CC_TOL_FLOOR)
    if ordering == "sIFR_R":
        grid, ratio = ratio_curve(tx, ty, s, "r")
        primary = check_shape(grid, ratio, "increasing", tol)
        cu, ch = phi_h_curve(tx, ty, s, coarse=True)
        crosscheck = check_shape(cu, ch, "convex", cc_tol)
    elif ordering == "sIFRA_R":
        grid, ratio = ratio_curve(tx, ty, s, "lambda")
        primary = check_shape(grid, ratio, "increasing", tol)
        cu, ch = phi_h_curve(tx, ty, s, coarse=True)
        crosscheck = check_shape(cu[1:], ch[1:], "star_shaped", cc_tol)
    elif ordering == "sNBU_R":
        u, h = phi_h_curve(tx, ty, s)
        primary = check_shape(u, h, "super_additive", tol,
                              full_pairs=full_pairs)
    elif ordering == "sNBUFR_R":
        c, note = _threshold(tx, ty, s)
        grid, ratio = ratio_curve(tx, ty, s, "r")
        primary = check_shape(grid, ratio, "at_least", tol, c=c)
        if note:
            primary = ShapeVerdict(primary.shape, primary.kind, primary.margin,
                                   primary.witness, primary.tolerance, note)
    else:  # sNBAFR_R
        c, note = _threshold(tx, ty, s)
        grid, ratio = ratio_curve(tx, ty, s, "lambda")
        primary = check_shape(grid, ratio, "at_least", tol, c=c)
        if note:
            primary = ShapeVerdict(primary.shape, primary.kind, primary.margin,
                                   primary.witness, primary.tolerance, note)
    if (crosscheck is not None and primary.kind == "fails"
            and crosscheck.kind == "holds"):
        # a cross-check that never sampled near the witness cannot refute it
        u_w = float(ty.lam_interp(s)(primary.witness))
        near = np.count_nonzero((cu >= 0.5 * u_w) & (cu <= 2.0 * u_w))
        if near < 3:
            crosscheck = ShapeVerdict(
                crosscheck.shape, "inconclusive", crosscheck.margin, None,
                crosscheck.tolerance,
                note="witness finer than cross-check resolution")
    return OrderVerdict(ordering, s, primary, crosscheck, tol)


def implication_chain(tx: TransformTable, ty: TransformTable, s: int,
                      tol: float = _DEFAULT_TOL) -> tuple[list[OrderVerdict], bool]:
    """All five orderings plus a chain-consistency flag.

    The flag is False iff some ordering decisively holds while one further
    down the chain decisively fails, which can only be a numerical-tolerance
    artifact, never mathematics.
    """
    verdicts = [check_order(tx, ty, s, o, tol) for o in ORDERINGS]
    consistent = True
    for i, up in enumerate(verdicts):
        if up.kind != "holds":
            continue
        for down in verdicts[i + 1:]:
            if down.kind == "fails":
                consistent = False
    return verdicts, consistent
