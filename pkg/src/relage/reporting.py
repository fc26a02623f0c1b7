"""Config-driven comparison runs, JSON reports, and CSV curve export.

The config file is JSON with the following keys (unknown keys are rejected
at every level):

    x, y          distribution sources; y optional for classification runs.
                  Each is an object with exactly one of family/hazard/mrl/
                  survival, plus optional params (families), support
                  (survival sources) and label.
    s_max         deepest transform level (default 2)
    grid          n_points / tail_epsilon / x_min_positive / x_max overrides
    tolerance     verdict tolerance (default 1e-8)
    orderings     subset of the five ordering names (default all)
    monte_carlo   {enabled, n, seed}
    out_dir       default output directory for reports and curves

Reports serialize to JSON (schema_version "1"); infinite margins use
Python's non-strict Infinity literal, which round-trips through the
standard json module.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ageing import AgeingReport, ageing_report
from .distributions import DistributionSpec, make_distribution
from .montecarlo import McConfig, ks_distance_phi
from .orderings import (ORDERINGS, OrderVerdict, check_order, phi_h_curve,
                        ratio_curve)
from .transforms import GridConfig, TransformTable, build_transforms

__all__ = [
    "ComparisonConfig",
    "ComparisonReport",
    "ConfigError",
    "load_config",
    "run_comparison",
    "emit_curves",
]

SCHEMA_VERSION = "1"


class ConfigError(ValueError):
    """Malformed configuration file."""


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


_DIST_KEYS = {"family", "params", "hazard", "mrl", "survival", "support", "label"}
_GRID_KEYS = {"n_points", "tail_epsilon", "x_min_positive", "x_max"}
_MC_KEYS = {"enabled", "n", "seed"}
_TOP_KEYS = {"x", "y", "s_max", "grid", "tolerance", "orderings",
             "monte_carlo", "out_dir"}


@dataclass(frozen=True)
class ComparisonConfig:
    x: dict
    y: Optional[dict] = None
    s_max: int = 2
    grid: GridConfig = field(default_factory=GridConfig)
    tolerance: float = 1e-8
    orderings: tuple = ORDERINGS
    mc_enabled: bool = False
    mc: McConfig = field(default_factory=McConfig)
    out_dir: Optional[str] = None

    def __post_init__(self):
        _reject_unknown(self.x, _DIST_KEYS, "distribution x")
        if self.y is not None:
            _reject_unknown(self.y, _DIST_KEYS, "distribution y")
        if not (1 <= self.s_max <= 8):
            raise ConfigError("s_max must lie in [1, 8]")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        bad = [o for o in self.orderings if o not in ORDERINGS]
        if bad:
            raise ConfigError(f"unknown ordering(s) {bad}; choose from {ORDERINGS}")

    def to_dict(self) -> dict:
        g = self.grid
        return {
            "x": self.x, "y": self.y, "s_max": self.s_max,
            "grid": {"n_points": g.n_points, "tail_epsilon": g.tail_epsilon,
                     "x_min_positive": g.x_min_positive, "x_max": g.x_max},
            "tolerance": self.tolerance, "orderings": list(self.orderings),
            "monte_carlo": {"enabled": self.mc_enabled, "n": self.mc.n,
                            "seed": self.mc.seed},
            "out_dir": self.out_dir,
        }

    @staticmethod
    def from_dict(d: dict) -> "ComparisonConfig":
        _reject_unknown(d, _TOP_KEYS, "config")
        if "x" not in d:
            raise ConfigError("config must define distribution 'x'")
        grid_d = dict(d.get("grid") or {})
        _reject_unknown(grid_d, _GRID_KEYS, "grid")
        mc_d = dict(d.get("monte_carlo") or {})
        _reject_unknown(mc_d, _MC_KEYS, "monte_carlo")
        mc_enabled = bool(mc_d.pop("enabled", False))
        orderings = d.get("orderings")
        return ComparisonConfig(
            x=dict(d["x"]), y=None if d.get("y") is None else dict(d["y"]),
            s_max=int(d.get("s_max", 2)),
            grid=GridConfig(**grid_d),
            tolerance=float(d.get("tolerance", 1e-8)),
            orderings=ORDERINGS if orderings is None else tuple(orderings),
            mc_enabled=mc_enabled,
            mc=McConfig(**{k: int(v) for k, v in mc_d.items()}),
            out_dir=d.get("out_dir"),
        )


def load_config(path: str) -> ComparisonConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return ComparisonConfig.from_dict(raw)


@dataclass(frozen=True)
class ComparisonReport:
    """Self-contained run record: settings echo, verdicts, classifications."""

    schema_version: str
    settings: dict = field(repr=False)
    verdicts: dict = field(repr=False)       # direction -> list[OrderVerdict]
    chain_consistent: dict = field(repr=False)  # direction -> {s: bool}
    classifications: dict = field(repr=False)   # role -> AgeingReport
    conclusions: tuple = ()
    monte_carlo: Optional[dict] = None

    @property
    def has_inconclusive(self) -> bool:
        return any(v.kind == "inconclusive"
                   for vs in self.verdicts.values() for v in vs)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "settings": self.settings,
            "verdicts": {d: [v.to_dict() for v in vs]
                         for d, vs in self.verdicts.items()},
            "chain_consistent": {
                d: {str(s): ok for s, ok in flags.items()}
                for d, flags in self.chain_consistent.items()},
            "classifications": {role: rep.to_dict()
                                for role, rep in self.classifications.items()},
            "conclusions": list(self.conclusions),
            "monte_carlo": self.monte_carlo,
        }

    @staticmethod
    def from_dict(d: dict) -> "ComparisonReport":
        return ComparisonReport(
            schema_version=d["schema_version"],
            settings=d["settings"],
            verdicts={k: [OrderVerdict.from_dict(v) for v in vs]
                      for k, vs in d["verdicts"].items()},
            chain_consistent={k: {int(s): ok for s, ok in flags.items()}
                              for k, flags in d["chain_consistent"].items()},
            classifications={k: AgeingReport.from_dict(v)
                             for k, v in d["classifications"].items()},
            conclusions=tuple(d["conclusions"]),
            monte_carlo=d.get("monte_carlo"),
        )

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @staticmethod
    def from_json(text: str) -> "ComparisonReport":
        return ComparisonReport.from_dict(json.loads(text))


def _chain_flag(verdicts: list[OrderVerdict]) -> bool:
    order = {o: i for i, o in enumerate(ORDERINGS)}
    ranked = sorted(verdicts, key=lambda v: order[v.ordering])
    for i, up in enumerate(ranked):
        if up.kind != "holds":
            continue
        if any(down.kind == "fails" for down in ranked[i + 1:]):
            return False
    return True


def _conclusion(label_x: str, label_y: str, s: int,
                kx: str, ky: str) -> str:
    if kx == "holds" and ky == "holds":
        return (f"level {s}: {label_x} and {label_y} have proportional "
                "cumulative hazards (order-equivalent)")
    if kx == "holds":
        return f"{label_x} ages faster at level {s}"
    if ky == "holds":
        return f"{label_y} ages faster at level {s}"
    if kx == "fails" and ky == "fails":
        return f"level {s}: neither dominates the other"
    return f"level {s}: comparison inconclusive"


def run_comparison(cfg: ComparisonConfig, *, return_tables: bool = False):
    """Build specs and tables once, run every requested check.

    Deterministic given the config.  Raises (never emits a partial report)
    if any stage fails.
    """
    spec_x = make_distribution(**{**cfg.x, "label": cfg.x.get("label", "X")})
    tables = {"x": build_transforms(spec_x, cfg.s_max, cfg.grid)}
    if cfg.y is not None:
        spec_y = make_distribution(**{**cfg.y, "label": cfg.y.get("label", "Y")})
        tables["y"] = build_transforms(spec_y, cfg.s_max, cfg.grid)

    verdicts: dict[str, list[OrderVerdict]] = {}
    chain: dict[str, dict[int, bool]] = {}
    conclusions: list[str] = []
    if "y" in tables and cfg.orderings:
        tx, ty = tables["x"], tables["y"]
        for direction, (a, b) in (("x_vs_y", (tx, ty)), ("y_vs_x", (ty, tx))):
            vs = [check_order(a, b, s, o, cfg.tolerance)
                  for s in range(1, cfg.s_max + 1) for o in cfg.orderings]
            verdicts[direction] = vs
            chain[direction] = {
                s: _chain_flag([v for v in vs if v.s == s])
                for s in range(1, cfg.s_max + 1)}
        lead = cfg.orderings[0]
        for s in range(1, cfg.s_max + 1):
            kx = next(v.kind for v in verdicts["x_vs_y"]
                      if v.s == s and v.ordering == lead)
            ky = next(v.kind for v in verdicts["y_vs_x"]
                      if v.s == s and v.ordering == lead)
            conclusions.append(_conclusion(tables["x"].spec.label,
                                           tables["y"].spec.label, s, kx, ky))

    classifications = {role: ageing_report(t, cfg.tolerance)
                       for role, t in tables.items()}

    mc_results = None
    if cfg.mc_enabled and "y" in tables:
        mc_results = {"n": cfg.mc.n, "seed": cfg.mc.seed, "ks": {}}
        for s in range(1, min(2, cfg.s_max) + 1):
            mc_results["ks"][str(s)] = ks_distance_phi(
                tables["x"], tables["y"], s, cfg.mc)

    settings = {
        "config": cfg.to_dict(),
        "resolved": {role: dict(t.provenance) for role, t in tables.items()},
    }
    report = ComparisonReport(
        schema_version=SCHEMA_VERSION,
        settings=settings,
        verdicts=verdicts,
        chain_consistent=chain,
        classifications=classifications,
        conclusions=tuple(conclusions),
        monte_carlo=mc_results,
    )
    if return_tables:
        return report, tables
    return report


def _write_csv(path: str, xs: np.ndarray, ys: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,value\n")
        for a, b in zip(xs, ys):
            fh.write(f"{float(a)!r},{float(b)!r}\n")


def emit_curves(tables: dict[str, TransformTable], out_dir: str,
                orderings: tuple = ORDERINGS) -> list[str]:
    """Write one CSV per curve family; returns the written paths.

    Single-distribution runs write unprefixed files (tbar_s1.csv, ...);
    pair runs prefix the per-distribution files with their role and add the
    hazard/cumulative-hazard ratio curves and the time change h_s*.csv.
    """
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def emit(name: str, xs, ys) -> None:
        path = os.path.join(out_dir, name)
        _write_csv(path, np.asarray(xs), np.asarray(ys))
        written.append(path)

    pair = "y" in tables
    for role, table in tables.items():
        prefix = f"{role}_" if pair else ""
        for s in range(1, table.s_max + 1):
            sl = table.trusted_slice(s)
            xs = table.xs[sl]
            emit(f"{prefix}tbar_s{s}.csv", xs, table.tbar[s][sl])
            emit(f"{prefix}lambda_s{s}.csv", xs, table.lam[s][sl])
            emit(f"{prefix}r_s{s}.csv", xs, table.r[s][sl])
            emit(f"{prefix}mrl_s{s}.csv", xs, table.mrl[s][sl])
    if pair and orderings:
        tx, ty = tables["x"], tables["y"]
        for s in range(1, min(tx.s_max, ty.s_max) + 1):
            grid, rr = ratio_curve(tx, ty, s, "r")
            emit(f"ratio_r_s{s}.csv", grid, rr)
            grid, lr = ratio_curve(tx, ty, s, "lambda")
            emit(f"ratio_lambda_s{s}.csv", grid, lr)
            u, h = phi_h_curve(tx, ty, s)
            emit(f"h_s{s}.csv", u, h)
    return written
