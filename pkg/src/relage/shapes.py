"""Grid-based shape predicates with margins and witnesses.

Every predicate reduces to "all slacks nonnegative" for some slack family
(consecutive differences, second divided differences, pair defects, ...).
Slacks are normalized by max(1, max|values|) and the verdict is three-way:

    holds         min slack >= 0 (non-strict inequalities are satisfied;
                  exact ties, e.g. constant curves, count as holding)
    fails         min slack < -tolerance (witness attached)
    inconclusive  violation present but within tolerance

The inconclusive band is what keeps boundary cases (proportional hazards,
self-comparison under round-off) from flipping to arbitrary verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = ["ShapeVerdict", "ShapeError", "check_shape", "SHAPES"]

SHAPES = (
    "increasing", "decreasing", "convex", "star_shaped", "antistar_shaped",
    "super_additive", "at_least",
)

Witness = Union[float, Tuple[float, float], None]


class ShapeError(ValueError):
    """Malformed grid or unusable predicate arguments."""


@dataclass(frozen=True)
class ShapeVerdict:
    shape: str
    kind: str                  # "holds" | "fails" | "inconclusive"
    margin: float              # min normalized slack; negative = violation
    witness: Witness
    tolerance: float
    note: str = ""

    @property
    def decisive(self) -> bool:
        return self.kind in ("holds", "fails")

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, tuple):
            w = list(w)
        return {
            "shape": self.shape, "kind": self.kind, "margin": self.margin,
            "witness": w, "tolerance": self.tolerance, "note": self.note,
        }

    @staticmethod
    def from_dict(d: dict) -> "ShapeVerdict":
        w = d.get("witness")
        if isinstance(w, list):
            w = tuple(w)
        return ShapeVerdict(d["shape"], d["kind"], d["margin"], w,
                            d["tolerance"], d.get("note", ""))


def _verdict(shape: str, slacks: np.ndarray, witnesses, tol: float,
             note: str = "") -> ShapeVerdict:
    i = int(np.argmin(slacks))
    margin = float(slacks[i])
    if margin < -tol:
        kind = "fails"
    elif margin >= 0.0:
        kind = "holds"
    else:
        kind = "inconclusive"
    witness = witnesses(i) if kind == "fails" else None
    return ShapeVerdict(shape, kind, margin, witness, tol, note)


def _inconclusive(shape: str, tol: float, note: str) -> ShapeVerdict:
    # margin 0 rather than NaN: reports stay equality-comparable
    return ShapeVerdict(shape, "inconclusive", 0.0, None, tol, note)


def check_shape(xs, ys, shape: str, tol: float, *, c: float | None = None,
                full_pairs: bool = False) -> ShapeVerdict:
    """Decide whether the tabulated curve has the requested shape.

    ``c`` is the threshold for shape "at_least".  ``full_pairs`` switches
    super-additivity from stratified pair sampling to all pairs.
    """
    if shape not in SHAPES:
        raise ShapeError(f"unknown shape {shape!r}")
    if tol <= 0:
        raise ShapeError("tolerance must be positive")
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 3:
        raise ShapeError("need matching 1-d grids with at least 3 points")
    if np.any(np.diff(xs) <= 0):
        raise ShapeError("abscissae must be strictly increasing")
    if np.any(~np.isfinite(xs)) or np.any(~np.isfinite(ys)):
        raise ShapeError("grid values must be finite")
    if shape in ("star_shaped", "antistar_shaped") and xs[0] <= 0:
        raise ShapeError(f"{shape} requires positive abscissae")

    scale = max(1.0, float(np.max(np.abs(ys))))

    if shape in ("increasing", "decreasing"):
        diffs = np.diff(ys) / scale
        if shape == "decreasing":
            diffs = -diffs
        return _verdict(shape, diffs, lambda i: float(xs[i + 1]), tol)

    if shape == "convex":
        dx1 = xs[1:-1] - xs[:-2]
        dx2 = xs[2:] - xs[1:-1]
        s1 = (ys[1:-1] - ys[:-2]) / dx1
        s2 = (ys[2:] - ys[1:-1]) / dx2
        dd = (s2 - s1) / (xs[2:] - xs[:-2])
        return _verdict(shape, dd / scale, lambda i: float(xs[i + 1]), tol)

    if shape in ("star_shaped", "antistar_shaped"):
        ratios = ys / xs
        rscale = max(1.0, float(np.max(np.abs(ratios))))
        diffs = np.diff(ratios) / rscale
        if shape == "antistar_shaped":
            diffs = -diffs
        return _verdict(shape, diffs, lambda i: float(xs[i + 1]), tol)

    if shape == "at_least":
        if c is None:
            raise ShapeError("shape 'at_least' requires threshold c")
        if np.isnan(c):
            return _inconclusive(shape, tol, "threshold undefined (0/0)")
        slacks = (ys - c) / scale if np.isfinite(c) else np.where(
            np.isfinite(ys - c), (ys - c) / scale, np.sign(ys - c) * np.inf)
        return _verdict(shape, slacks, lambda i: float(xs[i]), tol,
                        note=f"threshold {c!r}")

    # super_additive: f(x_i + x_j) >= f(x_i) + f(x_j) with f interpolated.
    # Pairs involving x = 0 are exact ties (f(x+0) = f(x) + f(0) once the
    # curve is anchored at the origin) and are skipped.
    interp = PchipInterpolator(xs, ys)
    first = int(np.argmax(xs > 0.0))
    n = xs.size
    if n - first < 2:
        raise ShapeError("no admissible pairs for super-additivity check")
    limit = xs[-1]
    if full_pairs:
        anchors = np.arange(first, n)
    else:
        spread = np.geomspace(first + 1, n - 1,
                              num=min(n - first, 24 + 8 * int(np.log2(n))))
        anchors = np.unique(np.concatenate([[first], spread.astype(int)]))
    worst = np.inf
    worst_pair = None
    for i in anchors:
        xi = xs[i]
        mask = (xs <= limit - xi) & (xs > 0.0)
        if not np.any(mask):
            continue
        xj = xs[mask]
        slack = (interp(xi + xj) - ys[i] - ys[mask]) / scale
        k = int(np.argmin(slack))
        if slack[k] < worst:
            worst = float(slack[k])
            worst_pair = (float(xi), float(xj[k]))
    if worst_pair is None:
        raise ShapeError("no admissible pairs for super-additivity check")
    slacks = np.array([worst])
    return _verdict("super_additive", slacks, lambda _: worst_pair, tol)
