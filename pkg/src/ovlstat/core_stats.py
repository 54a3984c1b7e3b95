"""Descriptive statistics and classical two-group effect sizes.

SSMD, robust SSMD, Z'-factor and robust Z'-factor all compare a positive
group against a negative group. Robust variants swap mean/SD for
median/MAD, with the MAD scaled to be consistent with the normal SD.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from .errors import DegenerateVariance, DivisionByZero, InvalidInput

MAD_SCALE = 1.4826


class Label(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Measurements from one experimental group.

    ``values`` is stored as a read-only float64 array. Order carries no
    meaning.
    """

    values: np.ndarray
    label: Label = Label.UNKNOWN

    def __post_init__(self):
        arr = _validated(self.values)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "label", Label(self.label))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    __hash__ = None


Samples = Union[SampleSet, ArrayLike]


def _validated(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidInput("sample is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("sample contains NaN or infinite values")
    return arr


def as_array(s: Samples) -> np.ndarray:
    """Return the float64 values of ``s``, validating raw array input."""
    if isinstance(s, SampleSet):
        return s.values
    return _validated(s)


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    variance: float
    median: float
    mad: float
    n: int

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


def _variance(x: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(np.var(x, ddof=1))


def _mad(x: np.ndarray, med: float) -> float:
    return MAD_SCALE * float(np.median(np.abs(x - med)))


def summarize(s: Samples) -> SummaryStats:
    """Mean, unbiased variance, median, scaled MAD and count of a sample."""
    x = as_array(s)
    med = float(np.median(x))
    return SummaryStats(
        mean=float(np.mean(x)),
        variance=_variance(x),
        median=med,
        mad=_mad(x, med),
        n=int(x.size),
    )


def ssmd(pos: Samples, neg: Samples) -> float:
    """Strictly standardized mean difference.

    ``(mean_pos - mean_neg) / sqrt(var_pos + var_neg)``

    Raises
    ------
    DegenerateVariance
        If both groups have zero variance.
    """
    p, n = as_array(pos), as_array(neg)
    denom = math.sqrt(_variance(p) + _variance(n))
    if denom == 0.0:
        raise DegenerateVariance("ssmd: both groups have zero variance")
    return (float(np.mean(p)) - float(np.mean(n))) / denom


def robust_ssmd(pos: Samples, neg: Samples) -> float:
    """SSMD with medians and scaled MADs in place of means and SDs."""
    p, n = as_array(pos), as_array(neg)
    mp, mn = float(np.median(p)), float(np.median(n))
    denom = math.hypot(_mad(p, mp), _mad(n, mn))
    if denom == 0.0:
        raise DegenerateVariance("robust_ssmd: both groups have zero MAD")
    return (mp - mn) / denom


def _z_prime(loc_p: float, loc_n: float, disp_p: float, disp_n: float, name: str) -> float:
    gap = abs(loc_p - loc_n)
    if gap == 0.0:
        raise DivisionByZero(f"{name}: group locations are equal")
    return 1.0 - 3.0 * (disp_p + disp_n) / gap


def z_factor(pos: Samples, neg: Samples) -> float:
    """Z'-factor: ``1 - 3 (sd_pos + sd_neg) / |mean_pos - mean_neg|``."""
    p, n = as_array(pos), as_array(neg)
    return _z_prime(
        float(np.mean(p)),
        float(np.mean(n)),
        math.sqrt(_variance(p)),
        math.sqrt(_variance(n)),
        "z_factor",
    )


def robust_z_factor(pos: Samples, neg: Samples) -> float:
    """Z'-factor on medians and scaled MADs."""
    p, n = as_array(pos), as_array(neg)
    mp, mn = float(np.median(p)), float(np.median(n))
    return _z_prime(mp, mn, _mad(p, mp), _mad(n, mn), "robust_z_factor")
