"""Single-distribution ageing-class membership at each transform level.

The five class predicates applied to the level-s hazard rate r and
cumulative hazard L on the table's trusted grid:

    IFR     r increasing
    IFRA    running average of r increasing, computed as L(x)/x on x > 0
            (identical analytically, and stable when r(0) is infinite)
    NBU     L super-additive
    NBUFR   r >= r at the support edge
    NBAFR   L(x)/x >= r at the support edge

Classes at consecutive levels translate to classical names for the handful
of levels where the classical literature has one (level 2 IFR is DMRL,
level 2 NBAFR is HNBUE, and so on).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .shapes import ShapeVerdict, check_shape
from .transforms import TransformTable, TransformError

__all__ = [
    "CLASS_TAGS",
    "AgeingReport",
    "classify",
    "classical_name",
    "ageing_report",
]

CLASS_TAGS = ("IFR", "IFRA", "NBU", "NBUFR", "NBAFR")

_CLASSICAL = {
    (1, "IFR"): "IFR", (2, "IFR"): "DMRL", (3, "IFR"): "DVRL",
    (1, "IFRA"): "IFRA", (2, "IFRA"): "DMRLHA",
    (1, "NBU"): "NBU",
    (1, "NBUFR"): "NBUFR", (2, "NBUFR"): "NBUE", (3, "NBUFR"): "NDVRL",
    (1, "NBAFR"): "NBAFR", (2, "NBAFR"): "HNBUE",
}

_DEFAULT_TOL = 1e-8


def classical_name(s: int, class_tag: str) -> str | None:
    """Classical ageing-class alias for the level-s class, if one exists."""
    if s < 1:
        raise ValueError("level must be a positive integer")
    if class_tag not in CLASS_TAGS:
        raise ValueError(f"unknown class tag {class_tag!r}")
    return _CLASSICAL.get((s, class_tag))


def classify(table: TransformTable, s: int,
             tol: float = _DEFAULT_TOL) -> dict[str, ShapeVerdict]:
    """Five class verdicts for the level-s variable of one distribution."""
    if not (1 <= s <= table.s_max):
        raise TransformError(f"level s={s} outside [1, {table.s_max}]")
    hi = table.trust_hi[s]
    xs = table.xs[: hi + 1]
    r = table.r[s][: hi + 1]
    lam = table.lam[s][: hi + 1]
    r_edge = float(r[0])

    finite = np.isfinite(r)
    verdicts: dict[str, ShapeVerdict] = {}

    if finite.all():
        verdicts["IFR"] = check_shape(xs, r, "increasing", tol)
    else:
        # infinite edge hazard (e.g. Weibull shape < 1): decreasing at 0
        first = int(np.argmax(finite))
        witness = float(xs[first])
        verdicts["IFR"] = ShapeVerdict(
            "increasing", "fails", float("-inf"), witness, tol,
            note="hazard infinite at the support edge")

    avg = lam[1:] / xs[1:]
    verdicts["IFRA"] = check_shape(xs[1:], avg, "increasing", tol)
    verdicts["NBU"] = check_shape(xs, lam, "super_additive", tol)

    if np.isfinite(r_edge):
        verdicts["NBUFR"] = check_shape(xs[finite], r[finite], "at_least", tol,
                                        c=r_edge)
        verdicts["NBAFR"] = check_shape(xs[1:], avg, "at_least", tol, c=r_edge)
    else:
        for tag, grid in (("NBUFR", xs[1:]), ("NBAFR", xs[1:])):
            verdicts[tag] = ShapeVerdict(
                "at_least", "fails", float("-inf"), float(grid[0]), tol,
                note="edge hazard infinite; threshold unattainable")
    return verdicts


@dataclass(frozen=True)
class AgeingReport:
    """Per-level class verdicts with classical aliases for one distribution."""

    label: str
    s_max: int
    tolerance: float
    verdicts: dict = field(repr=False)   # verdicts[s][tag] -> ShapeVerdict

    def kind(self, s: int, tag: str) -> str:
        return self.verdicts[s][tag].kind

    def to_dict(self) -> dict:
        levels = {}
        for s, tags in self.verdicts.items():
            levels[str(s)] = {
                tag: {
                    **v.to_dict(),
                    "classical": classical_name(s, tag),
                }
                for tag, v in tags.items()
            }
        return {"label": self.label, "s_max": self.s_max,
                "tolerance": self.tolerance, "levels": levels}

    @staticmethod
    def from_dict(d: dict) -> "AgeingReport":
        verdicts = {}
        for s_str, tags in d["levels"].items():
            verdicts[int(s_str)] = {
                tag: ShapeVerdict.from_dict(entry)
                for tag, entry in tags.items()
            }
        return AgeingReport(d["label"], d["s_max"], d["tolerance"], verdicts)


def ageing_report(table: TransformTable,
                  tol: float = _DEFAULT_TOL) -> AgeingReport:
    """Classify at every level the table holds."""
    verdicts = {s: classify(table, s, tol) for s in range(1, table.s_max + 1)}
    return AgeingReport(table.spec.label, table.s_max, tol, verdicts)
