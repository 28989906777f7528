"""Latency statistics and regression fits.

'compute_stats()' summarizes a latency sample the way the overhead
tables of the bench report do: mean, min, max, nearest-rank
percentiles, population standard deviation, and both moment-based
(classical) and quartile-based (Bowley) skewness.

'fit_models()' fits latency against clause count with four models:

    linear        y = a*x + b               R^2 in y space
    quadratic     y = a*x^2 + b*x + c       R^2 in y space
    exponential   ln y = a*x + b            R^2 in ln y space
    loglog        ln y = alpha*ln x + b     R^2 in ln y space

Dependencies:
 - numpy
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .common import SleecError

__all__ = [
    'OverheadStats',
    'FitReport',
    'StatsError',
    'FitError',
    'compute_stats',
    'fit_models',
    'percentile',
    'MODEL_LINEAR',
    'MODEL_QUADRATIC',
    'MODEL_EXPONENTIAL',
    'MODEL_LOGLOG',
    'ALL_MODELS',
]


# =========================================================
#              M I S C .   C O N S T A N T S
# =========================================================
MODEL_LINEAR = 'linear'
MODEL_EXPONENTIAL = 'exponential'
MODEL_LOGLOG = 'loglog'
MODEL_QUADRATIC = 'quadratic'
ALL_MODELS = (MODEL_LINEAR, MODEL_EXPONENTIAL, MODEL_LOGLOG, MODEL_QUADRATIC)


class StatsError(SleecError):
    code = 'STATS_ERROR'

    def __init__(self, errMsg='Cannot compute statistics', code=None):
        super().__init__(errMsg, code)


class FitError(SleecError):
    code = 'FIT_ERROR'

    def __init__(self, errMsg='Cannot fit regression model', code=None):
        super().__init__(errMsg, code)


# =========================================================
#                 S U M M A R Y   S T A T S
# =========================================================
@dataclass(frozen=True)
class OverheadStats:
    count: int
    mean: float
    min: float
    max: float
    p25: float
    p50: float
    p75: float
    p99: float
    std: float
    skewness: Optional[float]
    bowley: Optional[float]

    def to_json(self):
        return {
            'count': self.count,
            'mean': self.mean,
            'min': self.min,
            'max': self.max,
            'p25': self.p25,
            'p50': self.p50,
            'p75': self.p75,
            'p99': self.p99,
            'std': self.std,
            'skewness': self.skewness,
            'bowley': self.bowley,
        }


def percentile(ordered, p):
    """Nearest-rank percentile of an already sorted sequence.

    The rank is 'ceil(p/100 * N)' (at least 1), computed exactly.
    """
    rank = max(1, math.ceil(Fraction(str(p)) * len(ordered) / 100))
    return ordered[rank - 1]


def compute_stats(samples):
    """Summarize a latency sample.

    Args:
        samples: non-empty sequence of numbers (ms)

    Returns:
        'OverheadStats'; 'skewness' is 'None' when the standard
        deviation is 0 and 'bowley' is 'None' when Q3 == Q1

    Raises:
        StatsError: empty sample
    """
    data = np.asarray(list(samples), dtype=float)
    if data.size == 0:
        raise StatsError('Cannot summarize an empty sample', 'EMPTY_SAMPLE')

    ordered = np.sort(data)
    mean = float(np.mean(data))
    std = float(np.std(data))
    q1, q2, q3 = (float(percentile(ordered, p)) for p in (25, 50, 75))

    skewness = None
    if std > 0:
        skewness = float(np.mean((data - mean) ** 3)) / std**3
    bowley = None
    if q3 != q1:
        bowley = (q3 + q1 - 2 * q2) / (q3 - q1)

    return OverheadStats(
        count=int(data.size),
        mean=mean,
        min=float(ordered[0]),
        max=float(ordered[-1]),
        p25=q1,
        p50=q2,
        p75=q3,
        p99=float(percentile(ordered, 99)),
        std=std,
        skewness=skewness,
        bowley=bowley,
    )


# =========================================================
#                  R E G R E S S I O N
# =========================================================
@dataclass(frozen=True)
class FitReport:
    """One fitted model.

    Attributes:
        model: model name
        params: coefficients, highest power first ('a', 'b', 'c')
        r2: coefficient of determination in the model's fit space
        alpha: exponent of the log-log model, else 'None'
    """

    model: str
    params: dict = field(default_factory=dict)
    r2: float = 0.0
    alpha: Optional[float] = None

    def to_json(self):
        data = {'model': self.model, 'params': dict(self.params), 'r2': self.r2}
        if self.alpha is not None:
            data['alpha'] = self.alpha
        return data


def _r_squared(y, yhat):
    ssRes = float(np.sum((y - yhat) ** 2))
    ssTot = float(np.sum((y - np.mean(y)) ** 2))
    if ssTot == 0:
        return 1.0 if np.allclose(y, yhat) else 0.0
    return 1.0 - ssRes / ssTot


def _polyfit(x, y, degree):
    coeffs = np.polyfit(x, y, degree)
    return coeffs, _r_squared(y, np.polyval(coeffs, x))


def fit_models(points, models=ALL_MODELS):
    """Least-squares fits of latency against clause count.

    Args:
        points: sequence of '(x, y)' pairs
        models: names of the models to fit (default: all four)

    Returns:
        'list' of 'FitReport' in the order of 'models'

    Raises:
        FitError: 'INSUFFICIENT_POINTS' with fewer than 3 distinct x
            values, 'NONPOSITIVE_VALUES' when a log model meets x <= 0
            or y <= 0, 'UNKNOWN_MODEL' for bad model names
    """
    pts = list(points)
    x = np.asarray([p[0] for p in pts], dtype=float)
    y = np.asarray([p[1] for p in pts], dtype=float)
    if len(np.unique(x)) < 3:
        raise FitError('Need at least 3 distinct x values', 'INSUFFICIENT_POINTS')

    reports = []
    for model in models:
        if model == MODEL_LINEAR:
            (a, b), r2 = _polyfit(x, y, 1)
            reports.append(FitReport(model, {'a': float(a), 'b': float(b)}, r2))

        elif model == MODEL_QUADRATIC:
            (a, b, c), r2 = _polyfit(x, y, 2)
            reports.append(FitReport(model, {'a': float(a), 'b': float(b), 'c': float(c)}, r2))

        elif model == MODEL_EXPONENTIAL:
            if np.any(y <= 0):
                raise FitError('Exponential model needs y > 0', 'NONPOSITIVE_VALUES')
            (a, b), r2 = _polyfit(x, np.log(y), 1)
            reports.append(FitReport(model, {'a': float(a), 'b': float(b)}, r2))

        elif model == MODEL_LOGLOG:
            if np.any(y <= 0) or np.any(x <= 0):
                raise FitError('Log-log model needs x > 0 and y > 0', 'NONPOSITIVE_VALUES')
            (alpha, b), r2 = _polyfit(np.log(x), np.log(y), 1)
            reports.append(FitReport(model, {'a': float(alpha), 'b': float(b)}, r2, float(alpha)))

        else:
            raise FitError(f'Unknown model: {model!r}', 'UNKNOWN_MODEL')

    return reports
