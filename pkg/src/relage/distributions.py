"""Canonical lifetime-distribution objects.

A DistributionSpec bundles four mutually consistent evaluators (pdf,
survival, hazard, mean residual life) built from one of four source forms:
a named family, a hazard expression, an MRL expression, or a survival
expression.  All evaluators are pure and vectorized; specs are immutable
after construction, so concurrent reads are safe.

Derivation identities used for expression sources:

    hazard r  ->  survival(x) = exp(-int_0^x r(t) dt)
    MRL m     ->  hazard r(t) = (1 + m'(t)) / m(t)
                  survival(x) = (m(0)/m(x)) * exp(-int_0^x dt/m(t))
    survival  ->  pdf by central differencing, hazard from d(-log survival)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma as _gamma_fn, gammaincc

from . import expressions
from .quadrature import cumulative_integral, fit_exponential_tail, tail_integrals

__all__ = [
    "DistributionSpec",
    "DistributionError",
    "make_distribution",
    "exponential",
    "weibull",
    "uniform",
    "from_hazard",
    "from_mrl",
    "from_survival",
    "affine",
    "evaluate",
]

QUANTITIES = ("pdf", "survival", "hazard", "mrl")

_DEFAULT_PROBE_HORIZON = 50.0
_N_PROBE = 200


class DistributionError(ValueError):
    """Invalid distribution source or evaluation outside the support."""


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """Lifetime distribution with consistent pdf/survival/hazard/MRL evaluators.

    support_start is positive only for location-shifted specs; survival is
    identically 1 below it.  support_end is None for unbounded supports.
    """

    label: str
    source: str
    support_start: float = 0.0
    support_end: Optional[float] = None
    _pdf: Callable = field(repr=False, default=None)
    _survival: Callable = field(repr=False, default=None)
    _hazard: Callable = field(repr=False, default=None)
    _mrl: Callable = field(repr=False, default=None)

    def pdf(self, x):
        return self._eval(self._pdf, x)

    def survival(self, x):
        return self._eval(self._survival, x)

    def hazard(self, x):
        self._check_interior(x, "hazard")
        return self._eval(self._hazard, x)

    def mrl(self, x):
        self._check_interior(x, "mrl")
        return self._eval(self._mrl, x)

    def _eval(self, fn, x):
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0):
            raise DistributionError(f"{self.label}: negative evaluation point")
        out = fn(arr)
        if np.ndim(x) == 0:
            return float(out)
        return np.asarray(out, dtype=float)

    def _check_interior(self, x, quantity: str) -> None:
        if self.support_end is not None and np.any(np.asarray(x) >= self.support_end):
            raise DistributionError(
                f"{self.label}: {quantity} undefined at or beyond the "
                f"right support endpoint {self.support_end}"
            )


def evaluate(spec: DistributionSpec, quantity: str, x):
    """Evaluate one of pdf/survival/hazard/mrl at x (scalar or ndarray)."""
    if quantity not in QUANTITIES:
        raise DistributionError(f"unknown quantity {quantity!r}")
    return getattr(spec, quantity)(x)


# ---------------------------------------------------------------------------
# numeric helpers

def _derivative(fn, x: np.ndarray) -> np.ndarray:
    """Second-order derivative estimate, one-sided near the origin.

    Step h = max(1e-6, 1e-6 * x) keeps the relative truncation error near
    1e-12 for smooth inputs without leaving the nonnegative domain.
    """
    x = np.asarray(x, dtype=float)
    h = np.maximum(1e-6, 1e-6 * x)
    central = x >= h
    out = np.empty_like(x)
    if np.any(central):
        xc, hc = x[central], h[central]
        out[central] = (fn(xc + hc) - fn(xc - hc)) / (2.0 * hc)
    if np.any(~central):
        xo, ho = x[~central], h[~central]
        out[~central] = (-3.0 * fn(xo) + 4.0 * fn(xo + ho)
                         - fn(xo + 2.0 * ho)) / (2.0 * ho)
    return out


def _cumulative_at(integrand, xs: np.ndarray) -> np.ndarray:
    """int_0^{xs[i]} integrand, for arbitrary nonnegative xs.

    Requested points are merged into a dense backbone so panel nodes land
    exactly on them; 7-point Gauss-Legendre per panel.
    """
    xs = np.asarray(xs, dtype=float)
    flat = xs.reshape(-1)
    hi = float(flat.max(initial=0.0))
    if hi == 0.0:
        return np.zeros_like(xs)
    backbone = np.unique(np.concatenate([np.linspace(0.0, hi, 1025), flat]))
    cum = cumulative_integral(integrand, backbone)
    idx = np.searchsorted(backbone, flat)
    return cum[idx].reshape(xs.shape)


class _TailIntegrator:
    """Tabulated tail integrals of a survival curve, for MRL evaluation."""

    def __init__(self, survival, support_end: Optional[float], label: str):
        if support_end is not None:
            hi = support_end * (1.0 - 1e-9)
        else:
            hi = 1.0
            for _ in range(60):
                if survival(np.array([hi]))[0] <= 1e-13:
                    break
                hi *= 2.0
            else:
                raise DistributionError(
                    f"{label}: survival does not vanish; cannot integrate tails"
                )
        head = np.linspace(0.0, min(1.0, hi / 2), 1025)
        tail = np.geomspace(max(head[-1], 1e-12), hi, 3073)
        xs = np.unique(np.concatenate([head, tail]))
        ys = survival(xs)
        tails = tail_integrals(xs, ys)
        if support_end is None:
            k = max(2, xs.size // 10)
            _, corr = fit_exponential_tail(xs[-k:], ys[-k:])
            if not np.isfinite(corr):
                raise DistributionError(f"{label}: diverging survival tail")
        else:
            corr = ys[-1] * (support_end - xs[-1]) / 2.0
        self.x_hi = hi
        self._interp = PchipInterpolator(xs, tails + corr, extrapolate=False)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x > self.x_hi):
            raise DistributionError(
                f"tail integral requested beyond tabulated range {self.x_hi:g}")
        return self._interp(x)


def _validate_positive(fn, what: str, label: str, horizon: float,
                       allow_zero_at_origin: bool = False) -> None:
    probe = np.linspace(0.0, horizon, _N_PROBE)
    try:
        vals = fn(probe)
    except expressions.DomainError as exc:
        raise DistributionError(f"{label}: {what} expression invalid: {exc}") from exc
    vals = np.asarray(vals, dtype=float)
    bad = ~np.isfinite(vals) | (vals <= 0)
    if allow_zero_at_origin:
        bad[0] = not np.isfinite(vals[0]) or vals[0] < 0
    if np.any(bad):
        where = probe[np.argmax(bad)]
        raise DistributionError(
            f"{label}: non-positive {what} detected on probe grid at x={where:g}")


# ---------------------------------------------------------------------------
# named families

def exponential(rate: float, label: str | None = None) -> DistributionSpec:
    """Exponential lifetime with hazard ``rate``."""
    if rate <= 0:
        raise DistributionError("exponential rate must be positive")
    lam = float(rate)
    return DistributionSpec(
        label=label or f"exponential(rate={lam:g})",
        source=f"family exponential(rate={lam:g})",
        _pdf=lambda x: lam * np.exp(-lam * x),
        _survival=lambda x: np.exp(-lam * x),
        _hazard=lambda x: np.full_like(x, lam),
        _mrl=lambda x: np.full_like(x, 1.0 / lam),
    )


def weibull(shape: float, scale: float, label: str | None = None) -> DistributionSpec:
    """Weibull lifetime; shape < 1 has an infinite hazard at the origin."""
    if shape <= 0 or scale <= 0:
        raise DistributionError("weibull shape and scale must be positive")
    k, lam = float(shape), float(scale)
    g = _gamma_fn(1.0 / k)

    def _sf(x):
        return np.exp(-((x / lam) ** k))

    def _haz(x):
        with np.errstate(divide="ignore"):
            return (k / lam) * (x / lam) ** (k - 1.0)

    def _mrl(x):
        z = (x / lam) ** k
        return (lam / k) * g * gammaincc(1.0 / k, z) * np.exp(z)

    return DistributionSpec(
        label=label or f"weibull(shape={k:g}, scale={lam:g})",
        source=f"family weibull(shape={k:g}, scale={lam:g})",
        _pdf=lambda x: _haz(x) * _sf(x),
        _survival=_sf,
        _hazard=_haz,
        _mrl=_mrl,
    )


def uniform(upper: float, label: str | None = None) -> DistributionSpec:
    """Uniform lifetime on [0, upper]."""
    if upper <= 0:
        raise DistributionError("uniform upper endpoint must be positive")
    b = float(upper)
    return DistributionSpec(
        label=label or f"uniform(0, {b:g})",
        source=f"family uniform(0, {b:g})",
        support_end=b,
        _pdf=lambda x: np.where(x < b, 1.0 / b, 0.0),
        _survival=lambda x: np.clip(1.0 - x / b, 0.0, 1.0),
        _hazard=lambda x: 1.0 / (b - x),
        _mrl=lambda x: (b - x) / 2.0,
    )


# ---------------------------------------------------------------------------
# expression sources

def from_hazard(text: str, label: str | None = None,
                probe_horizon: float = _DEFAULT_PROBE_HORIZON) -> DistributionSpec:
    """Distribution defined by a hazard-rate expression (must be positive)."""
    expr = expressions.parse(text)

    def _haz(x):
        return np.asarray(expressions.evaluate(expr, x), dtype=float)

    _validate_positive(_haz, "hazard", label or text, probe_horizon,
                       allow_zero_at_origin=True)

    def _sf(x):
        return np.clip(np.exp(-_cumulative_at(_haz, x)), 0.0, 1.0)

    spec = DistributionSpec(
        label=label or f"hazard {text!r}",
        source=f"hazard expression {text!r}",
        _pdf=lambda x: _haz(x) * _sf(x),
        _survival=_sf,
        _hazard=_haz,
        _mrl=None,
    )
    return _attach_tail_mrl(spec)


def from_mrl(text: str, label: str | None = None,
             probe_horizon: float = _DEFAULT_PROBE_HORIZON) -> DistributionSpec:
    """Distribution defined by a mean-residual-life expression."""
    expr = expressions.parse(text)

    def _mrl(x):
        return np.asarray(expressions.evaluate(expr, x), dtype=float)

    _validate_positive(_mrl, "MRL", label or text, probe_horizon)

    def _haz(x):
        r = (1.0 + _derivative(_mrl, x)) / _mrl(x)
        return r

    _validate_positive(_haz, "hazard implied by MRL", label or text, probe_horizon)
    m0 = float(_mrl(np.zeros(1))[0])

    def _sf(x):
        inv = lambda t: 1.0 / _mrl(t)
        return np.clip((m0 / _mrl(x)) * np.exp(-_cumulative_at(inv, x)), 0.0, 1.0)

    return DistributionSpec(
        label=label or f"mrl {text!r}",
        source=f"mrl expression {text!r}",
        _pdf=lambda x: _haz(x) * _sf(x),
        _survival=_sf,
        _hazard=_haz,
        _mrl=_mrl,
    )


def from_survival(text: str, label: str | None = None,
                  support_hint: float | None = None,
                  probe_horizon: float = _DEFAULT_PROBE_HORIZON) -> DistributionSpec:
    """Distribution defined by a survival-function expression.

    The expression must equal 1 at the origin, stay within (0, 1] and be
    nonincreasing on the probe grid (up to ``support_hint`` when given).
    """
    expr = expressions.parse(text)
    horizon = support_hint if support_hint is not None else probe_horizon

    def _sf_raw(x):
        return np.asarray(expressions.evaluate(expr, x), dtype=float)

    probe = np.linspace(0.0, horizon * (1.0 - 1e-12), _N_PROBE)
    vals = _sf_raw(probe)
    if abs(vals[0] - 1.0) > 1e-9:
        raise DistributionError(f"{label or text}: survival(0) must equal 1")
    if np.any(vals <= 0) or np.any(vals > 1.0 + 1e-9):
        raise DistributionError(f"{label or text}: survival not within (0, 1]")
    if np.any(np.diff(vals) > 1e-9):
        raise DistributionError(f"{label or text}: survival is increasing")

    def _sf(x):
        out = np.clip(_sf_raw(np.minimum(x, horizon) if support_hint else x), 0.0, 1.0)
        if support_hint is not None:
            out = np.where(np.asarray(x) >= support_hint, 0.0, out)
        return out

    def _pdf(x):
        return np.maximum(_derivative(lambda t: -_sf(t), x), 0.0)

    def _log_sf(t):
        with np.errstate(divide="ignore"):
            return -np.log(_sf(t))

    def _haz(x):
        return np.maximum(_derivative(_log_sf, x), 0.0)

    spec = DistributionSpec(
        label=label or f"survival {text!r}",
        source=f"survival expression {text!r}",
        support_end=support_hint,
        _pdf=_pdf,
        _survival=_sf,
        _hazard=_haz,
        _mrl=None,
    )
    return _attach_tail_mrl(spec)


def _attach_tail_mrl(spec: DistributionSpec) -> DistributionSpec:
    """Give a spec an MRL evaluator backed by tabulated tail integrals."""
    box: list[_TailIntegrator] = []

    def _mrl(x):
        if not box:
            box.append(_TailIntegrator(spec._survival, spec.support_end, spec.label))
        return box[0](x) / spec._survival(x)

    object.__setattr__(spec, "_mrl", _mrl)
    return spec


# ---------------------------------------------------------------------------
# affine transform and the config-facing factory

def affine(spec: DistributionSpec, a: float, b: float,
           label: str | None = None) -> DistributionSpec:
    """Distribution of a*X + b for a > 0, b >= 0.

    b is restricted to be nonnegative so the result stays a lifetime
    distribution (survival 1 on [0, b)).
    """
    if a <= 0:
        raise DistributionError("affine scale a must be positive")
    if b < 0:
        raise DistributionError("affine shift b must be nonnegative")
    a, b = float(a), float(b)
    base_mean = float(spec.mrl(0.0))

    def _z(x):
        return np.maximum((x - b) / a, 0.0)

    def _inside(x):
        return np.asarray(x) >= b

    new_end = None if spec.support_end is None else a * spec.support_end + b
    return DistributionSpec(
        label=label or f"{a:g}*({spec.label})+{b:g}",
        source=f"affine(a={a:g}, b={b:g}) of [{spec.source}]",
        support_start=a * spec.support_start + b,
        support_end=new_end,
        _pdf=lambda x: np.where(_inside(x), spec._pdf(_z(x)) / a, 0.0),
        _survival=lambda x: np.where(_inside(x), spec._survival(_z(x)), 1.0),
        _hazard=lambda x: np.where(_inside(x), spec._hazard(_z(x)) / a, 0.0),
        _mrl=lambda x: np.where(_inside(x), a * spec._mrl(_z(x)),
                                b - np.minimum(np.asarray(x, dtype=float), b)
                                + a * base_mean),
    )


_FAMILIES = {
    "exponential": (exponential, ("rate",)),
    "weibull": (weibull, ("shape", "scale")),
    "uniform": (uniform, ("upper",)),
}


def make_distribution(*, family: str | None = None, params: dict | None = None,
                      hazard: str | None = None, mrl: str | None = None,
                      survival: str | None = None, support: float | None = None,
                      label: str | None = None) -> DistributionSpec:
    """Build a spec from exactly one source form (config-file entry point)."""
    sources = [s for s in (family, hazard, mrl, survival) if s is not None]
    if len(sources) != 1:
        raise DistributionError(
            "exactly one of family/hazard/mrl/survival must be given")
    if family is not None:
        if family not in _FAMILIES:
            raise DistributionError(
                f"unknown family {family!r}; choose from {sorted(_FAMILIES)}")
        fn, names = _FAMILIES[family]
        params = dict(params or {})
        unknown = set(params) - set(names)
        if unknown:
            raise DistributionError(
                f"unknown parameter(s) {sorted(unknown)} for family {family!r}")
        missing = set(names) - set(params)
        if missing:
            raise DistributionError(
                f"missing parameter(s) {sorted(missing)} for family {family!r}")
        return fn(label=label, **params)
    if params is not None:
        raise DistributionError("params are only valid with a named family")
    if support is not None and survival is None:
        raise DistributionError("support applies only to survival sources")
    if hazard is not None:
        return from_hazard(hazard, label=label)
    if mrl is not None:
        return from_mrl(mrl, label=label)
    return from_survival(survival, label=label, support_hint=support)
