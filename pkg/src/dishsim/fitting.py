"""Logistic parameter recovery from cell-count time series.

A well-mixed population with per-capita growth, quadratic self-limitation
and optional mortality follows u' = u * ((growth - mortality) - quadratic*u),
whose closed form is evaluated in overflow-stable branches by the sign of
the net rate.  Fitting minimizes the sum of squared log residuals: first
the growth rate alone, with the quadratic coefficient tied to a known
saturation count; then, on a separate treated series, the mortality rate
with growth and quadratic frozen.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvergenceError

_RATE_EPS = 1e-12          # below this the net rate is treated as zero
_REFINE_TOL = 1e-10        # golden-section interval width at termination
_SCAN_POINTS = 64

DEFAULT_SATURATION = 129.0


@dataclass(frozen=True)
class ProliferationSeries:
    """Counts of a well-mixed population at increasing observation times."""

    times: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "counts", counts)
        if times.ndim != 1 or times.shape != counts.shape:
            raise ConfigError("times and counts must be matching 1D arrays")
        if times.size < 3:
            raise ConfigError("a series needs at least 3 observations")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(counts))):
            raise ConfigError("series values must be finite")
        if times[0] != 0.0:
            raise ConfigError("the first observation must be at time 0")
        if np.any(np.diff(times) <= 0.0):
            raise ConfigError("observation times must be strictly increasing")
        if np.any(counts <= 0.0):
            raise ConfigError("counts must be positive (log residuals)")

    @property
    def initial(self) -> float:
        return float(self.counts[0])

    @classmethod
    def from_csv(cls, path) -> ProliferationSeries:
        """Read a `t,count` CSV file into a series."""
        path = Path(path)
        try:
            with open(path, newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        if not rows or [c.strip() for c in rows[0]] != ["t", "count"]:
            raise ConfigError(f"{path}: expected header 't,count'")
        times, counts = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ConfigError(f"{path}:{lineno}: expected two fields")
            try:
                times.append(float(row[0]))
                counts.append(float(row[1]))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
        return cls(np.array(times), np.array(counts))


@dataclass(frozen=True)
class FitResult:
    """Fitted logistic parameters with the residual sum of squares."""

    growth: float
    quadratic: float
    mortality: float
    rss: float


def logistic_solution(t, initial: float, growth: float, quadratic: float,
                      mortality: float = 0.0):
    """Closed-form population at times t, stable for either rate sign."""
    if not (initial > 0.0 and np.isfinite(initial)):
        raise ConfigError("initial count must be positive")
    for name, value in (("growth", growth), ("quadratic", quadratic),
                        ("mortality", mortality)):
        if not (np.isfinite(value) and value >= 0.0):
            raise ConfigError(f"{name} must be finite and >= 0")
    t = np.asarray(t, dtype=float)
    rate = growth - mortality
    if abs(rate) <= _RATE_EPS:
        return initial / (1.0 + quadratic * initial * t)
    if rate > 0.0:
        decay = np.exp(-rate * t)
        return (rate * initial
                / (quadratic * initial * (1.0 - decay) + rate * decay))
    ramp = np.exp(rate * t)
    return (rate * initial * ramp
            / (quadratic * initial * (ramp - 1.0) + rate))


def _log_rss(series: ProliferationSeries, growth: float, quadratic: float,
             mortality: float) -> float:
    model = logistic_solution(series.times, series.initial, growth,
                              quadratic, mortality)
    resid = np.log(model) - np.log(series.counts)
    return float(np.add.reduce(resid * resid))


def _scan_then_golden(objective, lo: float,
                      hi: float) -> tuple[float, float, int, int]:
    """Minimize over [lo, hi]: coarse scan, then golden section.

    Returns (argmin, min value, scan index, last scan index) so callers can
    apply their own boundary policy.
    """
    xs = np.linspace(lo, hi, _SCAN_POINTS)
    vals = [objective(float(x)) for x in xs]
    i = int(np.argmin(vals))
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, _SCAN_POINTS - 1)])
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = objective(x1), objective(x2)
    while b - a > _REFINE_TOL:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = objective(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = objective(x2)
    best = 0.5 * (a + b)
    return best, objective(best), i, _SCAN_POINTS - 1


def fit_growth(series: ProliferationSeries,
               saturation: float = DEFAULT_SATURATION,
               max_rate: float = 5.0) -> FitResult:
    """Fit the growth rate with the quadratic coefficient tied to saturation.

    The one free parameter is the growth rate; the quadratic coefficient is
    growth/saturation so the fitted curve levels off at the known plateau
    count.  A best fit pinned to either end of (0, max_rate] is an error.
    """
    if not (saturation > 0.0 and np.isfinite(saturation)):
        raise ConfigError("saturation must be positive")
    if saturation <= float(np.max(series.counts)):
        raise ConfigError("saturation must exceed every observed count")
    if not (max_rate > 0.0 and np.isfinite(max_rate)):
        raise ConfigError("max_rate must be positive")

    def objective(b: float) -> float:
        return _log_rss(series, b, b / saturation, 0.0)

    lo = max_rate / _SCAN_POINTS
    best, rss, i, last = _scan_then_golden(objective, lo, max_rate)
    if i == 0 and best - lo < 10 * _REFINE_TOL:
        raise ConvergenceError("fitted growth rate collapsed to zero")
    if i == last:
        raise ConvergenceError(
            f"fitted growth rate pinned at the {max_rate} bracket edge"
        )
    return FitResult(best, best / saturation, 0.0, rss)


def fit_mortality(series: ProliferationSeries, growth: float,
                  quadratic: float) -> FitResult:
    """Fit a mortality rate on a treated series, growth and quadratic frozen.

    Searches [0, growth + 2]; a fit pinned at the upper edge is an error,
    while one at the lower edge is reported as exactly zero mortality.
    """
    if not (growth > 0.0 and np.isfinite(growth)):
        raise ConfigError("growth must be positive")
    if not (quadratic >= 0.0 and np.isfinite(quadratic)):
        raise ConfigError("quadratic must be finite and >= 0")
    hi = growth + 2.0

    def objective(d: float) -> float:
        return _log_rss(series, growth, quadratic, d)

    best, rss, i, last = _scan_then_golden(objective, 0.0, hi)
    if i == last:
        raise ConvergenceError(
            "fitted mortality pinned at the bracket edge; the series declines "
            "faster than the model family allows"
        )
    if best < 10 * _REFINE_TOL:
        best = 0.0
        rss = objective(0.0)
    return FitResult(growth, quadratic, best, rss)
