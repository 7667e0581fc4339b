"""Figures of merit and the small amount of statistics built on them."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class UndefinedHardnessError(ValueError):
    pass


class CensoredEstimateError(ValueError):
    """Raised when a success probability is zero, so R99 has no finite value."""


class FitError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


@dataclass
class HardnessRecord:
    instance_id: str
    n: int
    mis_size: int
    d_mis: int
    d_mis_m1: int
    hardness: float

    @classmethod
    def from_census(cls, instance_id, n, census):
        return cls(instance_id, n, census.mis_size, census.d_mis, census.d_mis_m1,
                   hardness(census.mis_size, census.d_mis, census.d_mis_m1))


@dataclass
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    kind: str
    points_used: int
    alpha: float = None
    c: float = None
    excluded: int = 0
    points: list = field(default_factory=list)

    def to_dict(self):
        out = {"kind": self.kind, "slope": self.slope, "intercept": self.intercept,
               "r_squared": self.r_squared, "points_used": self.points_used,
               "excluded": self.excluded}
        if self.kind == "powerlaw":
            out["alpha"], out["c"] = self.alpha, self.c
        out["points"] = [list(p) for p in self.points]
        return out


@dataclass
class QuantileSummary:
    p2: float
    p16: float
    p50: float
    p84: float
    p98: float


@dataclass
class Correlation:
    pearson: float
    partial: float = None
    degenerate: bool = False


@dataclass
class CensoredTts:
    """Lower bound on TTS99 for a zero-success estimate."""
    lower_bound: float
    shots: int
    censored: bool = True


def hardness(mis_size, d_mis, d_mis_m1):
    """d_mis_m1 / (mis_size * d_mis), exact until the final float conversion."""
    if mis_size < 1 or d_mis < 1:
        raise UndefinedHardnessError("hardness needs mis_size >= 1 and d_mis >= 1")
    if d_mis_m1 < 0:
        raise UndefinedHardnessError("d_mis_m1 must be non-negative")
    return float(Fraction(int(d_mis_m1), int(mis_size) * int(d_mis)))


def r99(p):
    """Number of independent shots needed for 99% overall success."""
    if not p > 0:
        raise CensoredEstimateError("success probability is zero")
    if p > 1:
        raise ValueError("probability above 1")
    if p >= 0.99:
        # 1 at p = 0.99 exactly, and at least one shot is always needed
        return 1.0
    return math.log(0.01) / math.log1p(-p)


def tts99(tau, p):
    if not tau > 0:
        raise ValueError("tau must be positive")
    return tau * r99(p)


def tts99_or_censored(tau, successes, shots):
    """TTS99 from shot counts; zero successes give a censored lower bound."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if successes == 0:
        return CensoredTts(tts99(tau, 1.0 / (shots + 1)), shots)
    return tts99(tau, successes / shots)


def _linfit(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 2:
        raise FitError(f"need at least 2 points, got {len(x)}")
    if np.ptp(x) == 0:
        raise FitError("all x values are equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), min(r2, 1.0)


def fit_loglinear_top(points, percentile=0.02):
    """Fit log10(tts) = slope * n + intercept on the hardest instances per size.

    Within each size group only points with tts at or above the group's
    (1 - percentile) quantile are kept.
    """
    if not 0 < percentile <= 1:
        raise ValueError("percentile must be in (0, 1]")
    groups = {}
    for n, t in points:
        if not t > 0:
            raise FitError("tts values must be positive")
        groups.setdefault(n, []).append(float(t))
    kept = []
    for n in sorted(groups):
        ts = sorted(groups[n])
        cut = np.quantile(ts, 1.0 - percentile) if percentile < 1 else ts[0]
        kept.extend((n, t) for t in ts if t >= cut)
    if len(kept) < 2:
        raise FitError("fewer than 2 points survive filtering")
    slope, intercept, r2 = _linfit([p[0] for p in kept], [math.log10(p[1]) for p in kept])
    return FitResult(slope, intercept, r2, "loglinear", len(kept), points=kept)


def fit_pmis_powerlaw(points):
    """Fit P = 1 - exp(-C * H**-alpha) via log(-log(1-P)) = log C - alpha log H."""
    usable, excluded = [], 0
    for h, p in points:
        if not h > 0:
            raise FitError("hardness must be positive")
        if p <= 0 or p >= 1:
            excluded += 1
            continue
        usable.append((float(h), float(p)))
    if len(usable) < 2:
        raise FitError(f"only {len(usable)} usable points ({excluded} excluded at p in {{0, 1}})")
    x = [math.log(h) for h, _ in usable]
    y = [math.log(-math.log1p(-p)) for _, p in usable]
    slope, intercept, r2 = _linfit(x, y)
    return FitResult(slope, intercept, r2, "powerlaw", len(usable), alpha=-slope,
                     c=math.exp(intercept), excluded=excluded, points=usable)


def tts_hardness_scaling(points, min_hardness=10.0):
    """Slope of log(tts99) against log(H) over points with H >= min_hardness."""
    used = [(float(h), float(t)) for h, t in points if h >= min_hardness]
    for h, t in used:
        if not (h > 0 and t > 0):
            raise FitError("hardness and tts must be positive")
    if len(used) < 2:
        raise FitError(f"only {len(used)} points with hardness >= {min_hardness}")
    slope, intercept, r2 = _linfit([math.log(h) for h, _ in used], [math.log(t) for _, t in used])
    return FitResult(slope, intercept, r2, "tts-hardness", len(used),
                     excluded=len(points) - len(used), points=used)


def _pearson(x, y):
    xc, yc = x - x.mean(), y - y.mean()
    return float(np.dot(xc, yc) / math.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))


def correlations(x, y, control=None, tol=1e-12):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("zero variance input")
    r = max(-1.0, min(1.0, _pearson(x, y)))
    if control is None:
        return Correlation(r)
    z = np.asarray(control, float)
    if z.shape != x.shape:
        raise ValueError("control must match x and y in length")
    A = np.column_stack([z, np.ones_like(z)])
    rx = x - A @ np.linalg.lstsq(A, x, rcond=None)[0]
    ry = y - A @ np.linalg.lstsq(A, y, rcond=None)[0]
    scale_x = max(1.0, float(np.abs(x).max()))
    scale_y = max(1.0, float(np.abs(y).max()))
    if np.abs(rx).max() <= tol * scale_x or np.abs(ry).max() <= tol * scale_y:
        return Correlation(r, 0.0, True)
    return Correlation(r, max(-1.0, min(1.0, _pearson(rx, ry))))


def quantile_summary(values):
    v = np.asarray(values, float)
    if v.size == 0:
        raise ValueError("no values")
    if np.any(~(v > 0)):
        raise ValueError("values must be positive")
    q = np.percentile(np.log10(v), [2, 16, 50, 84, 98], method="linear")
    return QuantileSummary(*(float(a) for a in q))
