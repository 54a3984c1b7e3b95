"""Plate-based hit selection.

Each plate carries positive-control, negative-control and sample wells.
Controls give the plate's quality measures and three hit thresholds:

* ``gssmd_eps0`` - the risk-minimising threshold between the control groups;
* ``ssmd_strong`` / ``ssmd_weak`` - per-well SSMD criteria against the
  negative controls, converted to assay units;
* ``np_eps`` - a negative-control quantile bounding the false-positive rate.

All rules are direction-aware: in viability screens the positive controls
sit below the negatives and hits are called on the low side.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, Optional, Union

import numpy as np

from ._format import fmt_number, json_safe
from .errors import (
    DegenerateVariance,
    DirectionUndefined,
    DuplicateWell,
    FitError,
    FormatError,
    InsufficientControls,
    InvalidInput,
    ParseError,
)
from .overlap import EmpiricalCDF
from .report import EffectSizeReport, effect_sizes
from .risk import neyman_pearson_threshold, optimal_threshold

log = logging.getLogger(__name__)

COLUMNS = ("plate_id", "well_id", "row", "col", "value", "well_type")
SSMD_STRONG = 3.0
SSMD_WEAK = 1.0


class WellType(str, enum.Enum):
    POSITIVE_CONTROL = "positive_control"
    NEGATIVE_CONTROL = "negative_control"
    SAMPLE = "sample"


@dataclass(frozen=True)
class Well:
    well_id: str
    row: int
    col: int
    value: float
    well_type: WellType


@dataclass
class PlateData:
    plate_id: str
    wells: list = field(default_factory=list)

    def _values(self, kind: WellType) -> np.ndarray:
        return np.array([w.value for w in self.wells if w.well_type is kind], dtype=float)

    @property
    def positives(self) -> np.ndarray:
        return self._values(WellType.POSITIVE_CONTROL)

    @property
    def negatives(self) -> np.ndarray:
        return self._values(WellType.NEGATIVE_CONTROL)

    @property
    def samples(self) -> list:
        return [w for w in self.wells if w.well_type is WellType.SAMPLE]

    def validate(self) -> "PlateData":
        """Raise InsufficientControls unless both control groups have >= 2 wells."""
        n_pos = sum(w.well_type is WellType.POSITIVE_CONTROL for w in self.wells)
        n_neg = sum(w.well_type is WellType.NEGATIVE_CONTROL for w in self.wells)
        if n_pos < 2 or n_neg < 2:
            raise InsufficientControls(self.plate_id, n_pos, n_neg)
        return self


def _text_stream(source) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8-sig"), newline="")
    if isinstance(source, str):
        return io.StringIO(source, newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def parse_plates(source: Union[bytes, str, IO], strict: bool = True) -> list:
    """Read well-level CSV into PlateData, one per plate_id in file order.

    ``source`` may be bytes, text or a binary/text file object. With
    ``strict=True`` every plate must pass :meth:`PlateData.validate`;
    otherwise control counts are left for the caller to check.

    Raises
    ------
    FormatError
        Empty input or a header missing required columns.
    ParseError
        A malformed row; ``.line`` is the 1-based file line.
    DuplicateWell
        A repeated (plate_id, row, col).
    """
    reader = csv.reader(_text_stream(source))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError("input is empty") from None
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise FormatError(f"header is missing column(s): {', '.join(missing)}")
    idx = {c: header.index(c) for c in COLUMNS}

    plates: dict[str, PlateData] = {}
    seen: set = set()
    for rec in reader:
        line = reader.line_num
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) < len(header):
            raise ParseError(line, f"expected {len(header)} fields, got {len(rec)}")
        get = lambda c: rec[idx[c]].strip()  # noqa: E731
        plate_id = get("plate_id")
        if not plate_id:
            raise ParseError(line, "empty plate_id")
        try:
            row, col = int(get("row")), int(get("col"))
        except ValueError:
            raise ParseError(line, f"row/col must be integers, got {get('row')!r}, {get('col')!r}") from None
        try:
            value = float(get("value"))
        except ValueError:
            raise ParseError(line, f"non-numeric value {get('value')!r}") from None
        if not math.isfinite(value):
            raise ParseError(line, f"non-finite value {get('value')!r}")
        try:
            kind = WellType(get("well_type"))
        except ValueError:
            raise ParseError(line, f"unknown well_type {get('well_type')!r}") from None
        key = (plate_id, row, col)
        if key in seen:
            raise DuplicateWell(line, f"duplicate well at plate {plate_id!r} row {row} col {col}")
        seen.add(key)
        plate = plates.setdefault(plate_id, PlateData(plate_id))
        plate.wells.append(Well(get("well_id"), row, col, value, kind))

    out = list(plates.values())
    if strict:
        for p in out:
            p.validate()
    return out


def serialize_plates(plates: Iterable[PlateData]) -> str:
    """CSV text that :func:`parse_plates` reads back to equal plates."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for p in plates:
        for well in p.wells:
            w.writerow([p.plate_id, well.well_id, well.row, well.col, repr(well.value), well.well_type.value])
    return buf.getvalue()


def plate_measures(p: PlateData) -> EffectSizeReport:
    """All five measures on (positive controls, negative controls)."""
    return effect_sizes(p.positives, p.negatives, method="histogram", bins="auto")


def gssmd_threshold(p: PlateData) -> float:
    """Risk-minimising threshold between the control groups at equal priors."""
    return optimal_threshold(p.positives, p.negatives, 0.5).epsilon0


def ssmd_thresholds(weak: float = SSMD_WEAK) -> dict:
    """Per-well SSMD hit criteria: fixed strong cutoff 3, configurable weak one."""
    return {"strong": SSMD_STRONG, "weak": float(weak)}


def ssmd_score(value, neg: np.ndarray) -> np.ndarray:
    """``(value - mean_neg) / (sqrt(2) * sd_neg)`` for each value."""
    sd = float(np.std(neg, ddof=1))
    if sd == 0.0:
        raise DegenerateVariance("negative controls have zero variance")
    return (np.asarray(value, dtype=float) - float(np.mean(neg))) / (math.sqrt(2.0) * sd)


def ssmd_value_threshold(neg: np.ndarray, criterion: float, direction: int) -> float:
    """Assay value at which a well's SSMD against ``neg`` equals ``criterion``."""
    sd = float(np.std(neg, ddof=1))
    return float(np.mean(neg)) + direction * criterion * math.sqrt(2.0) * sd


@dataclass(frozen=True)
class LogisticReference:
    boundary: float
    accuracy: float
    type1: float
    weight: float
    intercept: float
    iterations: int


def _fit_logistic(x: np.ndarray, y: np.ndarray, ridge: float, max_iter: int, tol: float):
    """Newton-Raphson for the ridge-penalised 1-D logistic likelihood.

    Works on standardised x; the penalty applies to the slope only.
    Returns (weight, intercept, iterations) in the original units.
    """
    loc, scale = float(np.mean(x)), float(np.std(x))
    if scale == 0.0:
        scale = 1.0
    X = np.column_stack([(x - loc) / scale, np.ones_like(x)])
    theta = np.zeros(2)
    pen = np.array([ridge, 0.0])

    def objective(th):
        eta = X @ th
        return float(np.sum(y * eta - np.logaddexp(0.0, eta)) - 0.5 * ridge * th[0] ** 2)

    grad_norm = math.inf
    for it in range(1, max_iter + 1):
        prob = 0.5 * (1.0 + np.tanh(0.5 * (X @ theta)))
        grad = X.T @ (y - prob) - pen * theta
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < tol:
            break
        hess = (X.T * (prob * (1.0 - prob))) @ X + np.diag(pen)
        hess[1, 1] += 1e-12
        step = np.linalg.solve(hess, grad)
        # backtracking keeps separable data from overshooting
        f0, t = objective(theta), 1.0
        while objective(theta + t * step) < f0 and t > 1e-8:
            t *= 0.5
        theta = theta + t * step
    else:
        raise FitError("logistic fit did not converge", max_iter, grad_norm)
    w = theta[0] / scale
    b = theta[1] - theta[0] * loc / scale
    return w, b, it


def fit_logistic_reference(
    train: PlateData,
    test: PlateData,
    ridge: float = 1e-6,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> LogisticReference:
    """1-D logistic classifier on control values (positive control = 1).

    Trained on ``train``'s controls, scored on ``test``'s controls.
    ``boundary`` is the 0.5-probability point ``-b / w``; ``type1`` is the
    fraction of test negatives called positive.
    """
    train.validate()
    test.validate()

    def xy(p):
        pos, neg = p.positives, p.negatives
        return np.concatenate([pos, neg]), np.concatenate([np.ones(pos.size), np.zeros(neg.size)])

    x, y = xy(train)
    w, b, iters = _fit_logistic(x, y, ridge, max_iter, tol)
    boundary = -b / w if w != 0.0 else math.nan
    xt, yt = xy(test)
    pred = (w * xt + b) > 0.0
    accuracy = float(np.mean(pred == (yt == 1)))
    type1 = float(np.mean(pred[yt == 0]))
    return LogisticReference(float(boundary), accuracy, type1, float(w), float(b), iters)


@dataclass(frozen=True)
class Thresholds:
    direction: int
    gssmd_eps0: Optional[float]
    ssmd_strong: Optional[float]
    ssmd_weak: Optional[float]
    np_eps: float
    alpha: float


def compute_thresholds(p: PlateData, alpha: float = 0.05, weak: float = SSMD_WEAK, warnings: Optional[list] = None) -> Thresholds:
    """Derive the three threshold families from a plate's controls.

    When the control means tie the GSSMD threshold is None and the other
    families fall back to calling hits above the negatives.
    """
    pos, neg = p.positives, p.negatives
    warnings = warnings if warnings is not None else []
    try:
        res = optimal_threshold(pos, neg, 0.5)
        eps0, direction = res.epsilon0, res.direction
    except DirectionUndefined as exc:
        warnings.append(f"DirectionUndefined: {exc}")
        eps0, direction = None, 1
    crit = ssmd_thresholds(weak)
    strong = ssmd_value_threshold(neg, crit["strong"], direction)
    weak_t = ssmd_value_threshold(neg, crit["weak"], direction)
    np_res = neyman_pearson_threshold(neg, alpha, direction)
    return Thresholds(direction, eps0, strong, weak_t, np_res.epsilon0, float(alpha))


def _beyond(value: float, threshold: Optional[float], direction: int) -> Optional[bool]:
    if threshold is None:
        return None
    return bool(value > threshold) if direction > 0 else bool(value < threshold)


@dataclass(frozen=True)
class WellCall:
    well_id: str
    row: int
    col: int
    value: float
    is_hit_gssmd: Optional[bool]
    is_hit_ssmd: bool
    is_hit_ssmd_weak: bool
    is_hit_np: bool


@dataclass
class HitReport:
    plate_id: str
    measures: EffectSizeReport
    thresholds: Thresholds
    bounds: Optional[dict]
    calls: list
    reference: Optional[LogisticReference] = None
    warnings: list = field(default_factory=list)

    @property
    def counts(self) -> dict:
        def n(attr):
            return sum(bool(getattr(c, attr)) for c in self.calls)

        return {
            "samples": len(self.calls),
            "gssmd": n("is_hit_gssmd"),
            "ssmd": n("is_hit_ssmd"),
            "ssmd_weak": n("is_hit_ssmd_weak"),
            "np": n("is_hit_np"),
        }

    def to_dict(self) -> dict:
        return {
            "plate_id": self.plate_id,
            "measures": self.measures.to_dict(),
            "thresholds": asdict(self.thresholds),
            "bounds": self.bounds,
            "counts": self.counts,
            "calls": [asdict(c) for c in self.calls],
            "reference": asdict(self.reference) if self.reference else None,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(json_safe(self.to_dict()), indent=2, allow_nan=False)


CALL_COLUMNS = ("plate_id", "well_id", "row", "col", "value", "is_hit_gssmd", "is_hit_ssmd", "is_hit_ssmd_weak", "is_hit_np")


def calls_csv(reports: Iterable[HitReport]) -> str:
    """Flat per-well CSV of hit calls across plates."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CALL_COLUMNS)
    for r in reports:
        for c in r.calls:
            flags = [c.is_hit_gssmd, c.is_hit_ssmd, c.is_hit_ssmd_weak, c.is_hit_np]
            w.writerow([r.plate_id, c.well_id, c.row, c.col, fmt_number(c.value)] + ["" if f is None else fmt_number(f) for f in flags])
    return buf.getvalue()


def overlap_bounds(p: PlateData, ovl: Optional[float]) -> Optional[dict]:
    """Control-group ECDF quantiles at levels OVL/2 and 1 - OVL/2."""
    if ovl is None:
        return None
    lo, hi = ovl / 2.0, 1.0 - ovl / 2.0
    out = {"ovl": ovl, "levels": [lo, hi]}
    for name, vals in (("positive", p.positives), ("negative", p.negatives)):
        f = EmpiricalCDF(vals)
        out[name] = [f.quantile(lo), f.quantile(hi)]
    return out


def call_hits(p: PlateData, thresholds: Thresholds, measures: Optional[EffectSizeReport] = None) -> HitReport:
    """Apply each threshold family to every sample well."""
    if thresholds.np_eps is None or not math.isfinite(thresholds.np_eps):
        raise InvalidInput("np threshold must be finite")
    if measures is None:
        measures = plate_measures(p)
    d = thresholds.direction
    calls = [
        WellCall(
            well_id=w.well_id,
            row=w.row,
            col=w.col,
            value=w.value,
            is_hit_gssmd=_beyond(w.value, thresholds.gssmd_eps0, d),
            is_hit_ssmd=bool(_beyond(w.value, thresholds.ssmd_strong, d)),
            is_hit_ssmd_weak=bool(_beyond(w.value, thresholds.ssmd_weak, d)),
            is_hit_np=bool(_beyond(w.value, thresholds.np_eps, d)),
        )
        for w in p.samples
    ]
    return HitReport(p.plate_id, measures, thresholds, overlap_bounds(p, measures.ovl), calls)


def screen_plate(p: PlateData, alpha: float = 0.05, weak: float = SSMD_WEAK) -> HitReport:
    """Validate controls, derive thresholds and call hits for one plate."""
    p.validate()
    warnings: list = []
    measures = plate_measures(p)
    warnings.extend(f"{k}: {v}" for k, v in measures.errors.items())
    thresholds = compute_thresholds(p, alpha, weak, warnings)
    report = call_hits(p, thresholds, measures)
    report.warnings = warnings
    for msg in warnings:
        log.warning("plate %s: %s", p.plate_id, msg)
    return report


# Synthetic plates


@dataclass
class SyntheticPlate:
    plate: PlateData
    truth: dict  # sample well_id -> planted hit


def well_name(row: int, col: int) -> str:
    letters = ""
    r = row
    while r > 0:
        r, rem = divmod(r - 1, 26)
        letters = chr(65 + rem) + letters
    return f"{letters}{col:02d}"


def synthetic_plate(
    plate_id: str,
    rng: Union[np.random.Generator, int, None] = None,
    rows: int = 16,
    cols: int = 24,
    pos_mean: float = 0.2,
    pos_sd: float = 0.05,
    neg_mean: float = 1.0,
    neg_sd: float = 0.1,
    hit_fraction: float = 0.1,
    hit_sd: float = 0.0,
    null_sd: Optional[float] = None,
) -> SyntheticPlate:
    """A viability-style plate with planted hits.

    The two leftmost columns hold positive controls ~ N(pos_mean, pos_sd),
    the two rightmost negative controls ~ N(neg_mean, neg_sd). In the sample
    wells a ``hit_fraction`` share is planted at ``pos_mean`` (plus
    N(0, hit_sd) noise); the rest are drawn like the negatives, or with
    ``null_sd`` if given.
    """
    if cols < 5:
        raise InvalidInput("need at least 5 columns (2 + 2 control columns and a sample column)")
    if not 0.0 <= hit_fraction <= 1.0:
        raise InvalidInput("hit_fraction must lie in [0, 1]")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.Generator(np.random.PCG64(rng))
    null_sd = neg_sd if null_sd is None else null_sd
    n_ctrl = 2 * rows
    pos = rng.normal(pos_mean, pos_sd, n_ctrl)
    neg = rng.normal(neg_mean, neg_sd, n_ctrl)
    n_samples = rows * (cols - 4)
    n_hits = math.floor(hit_fraction * n_samples)
    is_hit = np.zeros(n_samples, dtype=bool)
    is_hit[rng.permutation(n_samples)[:n_hits]] = True
    sample_vals = np.where(
        is_hit,
        pos_mean + (rng.normal(0.0, hit_sd, n_samples) if hit_sd > 0 else 0.0),
        rng.normal(neg_mean, null_sd, n_samples),
    )

    wells, truth = [], {}
    ip = ineg = isamp = 0
    for c in range(1, cols + 1):
        for r in range(1, rows + 1):
            wid = well_name(r, c)
            if c <= 2:
                wells.append(Well(wid, r, c, float(pos[ip]), WellType.POSITIVE_CONTROL))
                ip += 1
            elif c > cols - 2:
                wells.append(Well(wid, r, c, float(neg[ineg]), WellType.NEGATIVE_CONTROL))
                ineg += 1
            else:
                wells.append(Well(wid, r, c, float(sample_vals[isamp]), WellType.SAMPLE))
                truth[wid] = bool(is_hit[isamp])
                isamp += 1
    return SyntheticPlate(PlateData(plate_id, wells), truth)
