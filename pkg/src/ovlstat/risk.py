"""Misclassification risk of single-threshold classifiers.

A threshold ``eps`` calls a value positive when it lies on the positive
group's side of ``eps``. With the positive group above the negative one::

    fnr = F_pos(eps)          (positives at or below eps)
    fpr = 1 - F_neg(eps)      (negatives above eps)
    risk = (1 - prior_pos) * fpr + prior_pos * fnr

When the positive group lies below, every value is mirrored (x -> -x)
before the same formulas are applied, and thresholds are mirrored back.
At equal priors the minimum risk is half the overlap, so
``1 - OVL = 2 * P_max - 1`` with ``P_max = 1 - min_risk``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core_stats import Samples, as_array
from .errors import DirectionUndefined, InvalidInput
from .overlap import EmpiricalCDF

_TIE_ATOL = 1e-12


class ThresholdMethod(str, enum.Enum):
    RISK_MIN = "risk_min"
    NEYMAN_PEARSON = "neyman_pearson"


@dataclass(frozen=True)
class RiskProfile:
    threshold: float
    fpr: float
    fnr: float
    total_risk: float
    prior_pos: float


@dataclass(frozen=True)
class ThresholdResult:
    """A chosen threshold and the risk it achieves.

    ``direction`` is +1 when positives are called above ``epsilon0`` and
    -1 when they are called below it. For Neyman-Pearson thresholds
    ``min_risk`` holds the achieved false-positive rate and
    ``ovl_at_solution`` is None.
    """

    epsilon0: float
    min_risk: float
    ovl_at_solution: Optional[float]
    method: ThresholdMethod
    direction: int = 1

    def calls(self, values) -> np.ndarray:
        """Boolean positive calls for ``values`` under this threshold."""
        v = np.asarray(values, dtype=float)
        return v > self.epsilon0 if self.direction > 0 else v < self.epsilon0


def _check_prior(prior_pos: float) -> None:
    if not 0.0 < prior_pos < 1.0:
        raise InvalidInput(f"prior_pos must lie in (0, 1), got {prior_pos}")


def _check_direction(direction: int) -> int:
    if direction not in (1, -1):
        raise InvalidInput(f"direction must be +1 or -1, got {direction!r}")
    return int(direction)


def risk_at(eps: float, pos: EmpiricalCDF, neg: EmpiricalCDF, prior_pos: float = 0.5) -> RiskProfile:
    """Empirical FPR, FNR and prior-weighted risk at threshold ``eps``.

    The positive direction is taken from the group means (a tie counts as
    positive-above).
    """
    _check_prior(prior_pos)
    up = float(np.mean(pos.sorted_values)) >= float(np.mean(neg.sorted_values))
    if up:
        fnr = float(pos(eps))
        fpr = 1.0 - float(neg(eps))
    else:
        fnr = 1.0 - float(pos.left_limit(eps))
        fpr = float(neg.left_limit(eps))
    total = (1.0 - prior_pos) * fpr + prior_pos * fnr
    return RiskProfile(float(eps), fpr, fnr, total, prior_pos)


def _candidates(pooled_sorted_unique: np.ndarray) -> np.ndarray:
    u = pooled_sorted_unique
    mids = 0.5 * (u[1:] + u[:-1])
    return np.concatenate([[-math.inf], mids, [math.inf]])


def optimal_threshold(
    pos: Samples,
    neg: Samples,
    prior_pos: float = 0.5,
    direction: Optional[int] = None,
) -> ThresholdResult:
    """Threshold minimising the prior-weighted empirical risk.

    Candidates are the midpoints between adjacent distinct pooled values
    plus the two infinite sentinels; since empirical risk is constant
    between data points this grid holds a global minimiser. Ties go to the
    candidate closest to the midpoint of the two group means.

    ``direction`` is inferred from the means unless given; it must be given
    when the means tie.

    Raises
    ------
    DirectionUndefined
        If the group means are equal and no ``direction`` was supplied.
    """
    _check_prior(prior_pos)
    p, n = as_array(pos), as_array(neg)
    mp, mn = float(np.mean(p)), float(np.mean(n))
    if direction is None:
        if mp == mn:
            raise DirectionUndefined("group means are equal; pass direction explicitly")
        direction = 1 if mp > mn else -1
    direction = _check_direction(direction)

    # mirror so that positives always sit above
    if direction < 0:
        p, n = -p, -n
    ps, ns = np.sort(p), np.sort(n)
    cand = _candidates(np.unique(np.concatenate([ps, ns])))
    fnr = np.searchsorted(ps, cand, side="right") / ps.size
    fpr = 1.0 - np.searchsorted(ns, cand, side="right") / ns.size
    risk = (1.0 - prior_pos) * fpr + prior_pos * fnr

    best = np.flatnonzero(risk <= risk.min() + _TIE_ATOL)
    centre = direction * 0.5 * (mp + mn)
    with np.errstate(invalid="ignore"):
        dist = np.abs(cand[best] - centre)
    i = best[int(np.argmin(dist))]
    return ThresholdResult(
        epsilon0=float(direction * cand[i]),
        min_risk=float(risk[i]),
        ovl_at_solution=float(fnr[i] + fpr[i]),
        method=ThresholdMethod.RISK_MIN,
        direction=direction,
    )


def pmax_from_ovl(ovl: float) -> float:
    """Best single-threshold accuracy at equal priors, ``1 - OVL / 2``."""
    return 1.0 - ovl / 2.0


def gssmd_from_pmax(pmax: float, direction_sign: int) -> float:
    """GSSMD expressed through the maximum detection probability: ``sign * (2 pmax - 1)``."""
    if not 0.5 <= pmax <= 1.0:
        raise InvalidInput(f"pmax must lie in [0.5, 1], got {pmax}")
    return _check_direction(direction_sign) * (2.0 * pmax - 1.0)


def neyman_pearson_threshold(neg: Samples, alpha: float, direction: int = 1) -> ThresholdResult:
    """Negative-control quantile threshold with empirical FPR <= ``alpha``.

    For ``direction=+1`` this is the smallest sample value ``x`` such that
    the fraction of negatives strictly above ``x`` is at most ``alpha``.
    ``direction=-1`` mirrors the rule: the largest ``x`` with at most
    ``alpha`` of the negatives strictly below it.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha}")
    direction = _check_direction(direction)
    v = np.sort(direction * as_array(neg))
    exceed = v.size - np.searchsorted(v, v, side="right")
    ok = np.flatnonzero(exceed <= alpha * v.size + 1e-9)
    i = int(ok[0])
    return ThresholdResult(
        epsilon0=float(direction * v[i]),
        min_risk=float(exceed[i] / v.size),
        ovl_at_solution=None,
        method=ThresholdMethod.NEYMAN_PEARSON,
        direction=direction,
    )
