"""Seeded Monte Carlo harness for the shift, outlier and null-bound studies.

Every trial draws from its own PCG64 stream seeded by
``SeedSequence(seed, spawn_key=(cell_index, trial_index))``; normal
variates come from numpy's ziggurat sampler. Tables are therefore
bit-identical for a given config regardless of how trials are split
across worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import core_stats
from ._format import fmt_number, json_safe
from .core_stats import Label, SampleSet
from .errors import InvalidInput, OvlstatError
from .overlap import direction, estimate_ovl, gssmd_from_ovl
from .report import MEASURES

log = logging.getLogger(__name__)

DISTRIBUTIONS = ("normal", "lognormal")
QUANTILES = (0.025, 0.5, 0.975)
_CHUNK = 500

RngLike = Union[np.random.Generator, int, None]


def _rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(rng))


def trial_rng(seed: int, cell: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial of one experiment cell."""
    ss = np.random.SeedSequence(seed, spawn_key=(cell, trial))
    return np.random.Generator(np.random.PCG64(ss))


def _draw(dist: str, n: int, mu: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(mu, sigma, n)
    return np.exp(x) if dist == "lognormal" else x


def _check_sigma(sigma: float) -> None:
    if not (sigma > 0 and math.isfinite(sigma)):
        raise InvalidInput(f"sigma must be positive and finite, got {sigma}")


def sample_normal(n: int, mu: float, sigma: float, rng: RngLike = None, label=Label.UNKNOWN) -> SampleSet:
    """``n`` i.i.d. draws from N(mu, sigma^2)."""
    _check_sigma(sigma)
    return SampleSet(_draw("normal", n, mu, sigma, _rng(rng)), label)


def sample_lognormal(n: int, mu: float, sigma: float, rng: RngLike = None, label=Label.UNKNOWN) -> SampleSet:
    """``n`` i.i.d. draws of exp(N(mu, sigma^2))."""
    _check_sigma(sigma)
    return SampleSet(_draw("lognormal", n, mu, sigma, _rng(rng)), label)


def default_workers() -> int:
    env = os.environ.get("OVLSTAT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer OVLSTAT_THREADS=%r", env)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SimConfig:
    """Parameters for all three experiments; each reads the fields it needs."""

    seed: int
    trials: int = 10_000
    n_per_group: int = 1000
    distribution: str = "normal"
    sigmas: tuple = (1.0, 3.0, 5.0)
    shifts: tuple = (0.0, 1.0, 2.0, 5.0, 10.0)
    outlier_fractions: tuple = (0.0, 0.05, 0.10, 0.20, 0.30)
    outlier_means: tuple = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0)
    sample_sizes: tuple = (3, 10, 30, 100, 300, 1000, 10_000, 100_000)
    method: str = "histogram"
    bins: Union[str, int] = "auto"
    workers: Optional[int] = None

    def __post_init__(self):
        for name in ("sigmas", "shifts", "outlier_fractions", "outlier_means", "sample_sizes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise InvalidInput(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if self.trials < 1:
            raise InvalidInput("trials must be >= 1")
        if self.n_per_group < 2:
            raise InvalidInput("n_per_group must be >= 2")
        if self.distribution not in DISTRIBUTIONS:
            raise InvalidInput(f"distribution must be one of {DISTRIBUTIONS}")
        if any(not 0.0 <= f <= 1.0 for f in self.outlier_fractions):
            raise InvalidInput("outlier fractions must lie in [0, 1]")
        if any(not (s > 0) for s in self.sigmas):
            raise InvalidInput("sigmas must be positive")
        if any(int(n) != n or n < 2 for n in self.sample_sizes):
            raise InvalidInput("sample sizes must be integers >= 2")
        if self.workers is not None and self.workers < 1:
            raise InvalidInput("workers must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        return d


@dataclass(frozen=True)
class MeasureRow:
    cell: dict
    measure: str
    n: int
    mean: float
    variance: float
    min: float
    max: float
    q025: float
    q50: float
    q975: float
    mean_abs: float
    abs_q95: float


STAT_FIELDS = ("n", "mean", "variance", "min", "max", "q025", "q50", "q975", "mean_abs", "abs_q95")


def aggregate(values: np.ndarray) -> dict:
    """Trial summary over the finite entries of ``values``.

    np.sum's pairwise summation keeps the result independent of how the
    trials were produced.
    """
    v = values[np.isfinite(values)]
    if v.size == 0:
        nan = math.nan
        return dict(n=0, mean=nan, variance=nan, min=nan, max=nan, q025=nan, q50=nan, q975=nan, mean_abs=nan, abs_q95=nan)
    q = np.quantile(v, QUANTILES)
    a = np.abs(v)
    return dict(
        n=int(v.size),
        mean=float(np.mean(v)),
        variance=float(np.var(v, ddof=1)) if v.size > 1 else 0.0,
        min=float(v.min()),
        max=float(v.max()),
        q025=float(q[0]),
        q50=float(q[1]),
        q975=float(q[2]),
        mean_abs=float(np.mean(a)),
        abs_q95=float(np.quantile(a, 0.95)),
    )


@dataclass
class MeasureTable:
    """Aggregated trial statistics, one row per (cell, measure).

    When a run is made with ``keep_trials=True`` the raw per-trial matrix of
    each cell is kept in ``trials`` (cell index -> array of shape
    ``(trials, len(measures))``).
    """

    experiment: str
    config: dict
    measures: tuple
    cells: list
    rows: list
    trials: dict = field(default_factory=dict, repr=False)

    def row(self, measure: str, **cell) -> MeasureRow:
        for r in self.rows:
            if r.measure == measure and all(r.cell.get(k) == v for k, v in cell.items()):
                return r
        raise KeyError(f"no row for measure={measure!r}, cell={cell!r}")

    def trial_values(self, measure: str, **cell) -> np.ndarray:
        for i, c in enumerate(self.cells):
            if all(c.get(k) == v for k, v in cell.items()):
                return self.trials[i][:, self.measures.index(measure)]
        raise KeyError(f"no trials for cell={cell!r}")

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "measures": list(self.measures),
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(json_safe(self.to_dict()), indent=2, allow_nan=False)

    def to_csv(self) -> str:
        cell_keys = list(self.cells[0]) if self.cells else []
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", *cell_keys, "measure", *STAT_FIELDS])
        for r in self.rows:
            w.writerow(
                [self.experiment, *(fmt_number(r.cell[k]) for k in cell_keys), r.measure]
                + [fmt_number(getattr(r, f)) for f in STAT_FIELDS]
            )
        return buf.getvalue()


def _measure_vector(p: np.ndarray, n: np.ndarray, measures: Sequence[str], method: str, bins) -> np.ndarray:
    out = np.empty(len(measures))
    for j, name in enumerate(measures):
        try:
            if name == "gssmd":
                est = estimate_ovl(p, n, method, bins)
                out[j] = gssmd_from_ovl(est.ovl, direction(p, n))
            else:
                out[j] = getattr(core_stats, name)(p, n)
        except OvlstatError:
            out[j] = math.nan
    return out


# Trial generators: (rng, cell, cfg) -> (pos, neg)


def _shift_trial(rng, cell, cfg):
    bg = _draw(cfg.distribution, cfg.n_per_group, 0.0, cell["sigma"], rng)
    tg = _draw(cfg.distribution, cfg.n_per_group, 0.0, cell["sigma"], rng) + cell["shift"]
    return tg, bg


def _outlier_trial(rng, cell, cfg):
    n = cfg.n_per_group
    pos = rng.normal(0.0, 1.0, n)
    neg = rng.normal(0.0, 1.0, n)
    k = math.floor(cell["outlier_fraction"] * n)
    pos[:k] = rng.normal(cell["outlier_mean"], 1.0, k)
    return pos, neg


def _null_trial(rng, cell, cfg):
    n = cell["sample_size"]
    return _draw(cfg.distribution, n, 0.0, 1.0, rng), _draw(cfg.distribution, n, 0.0, 1.0, rng)


_TRIALS: dict = {"shift": _shift_trial, "outlier": _outlier_trial, "null_bound": _null_trial}


def _run_block(args) -> np.ndarray:
    experiment, cfg, cell_index, cell, measures, start, stop = args
    make = _TRIALS[experiment]
    out = np.empty((stop - start, len(measures)))
    for t in range(start, stop):
        pos, neg = make(trial_rng(cfg.seed, cell_index, t), cell, cfg)
        out[t - start] = _measure_vector(pos, neg, measures, cfg.method, cfg.bins)
    return out


def _run(experiment: str, cfg: SimConfig, cells: list, measures: tuple, keep_trials: bool) -> MeasureTable:
    blocks = [
        (experiment, cfg, ci, cell, measures, s, min(s + _CHUNK, cfg.trials))
        for ci, cell in enumerate(cells)
        for s in range(0, cfg.trials, _CHUNK)
    ]
    workers = cfg.workers or default_workers()
    workers = min(workers, len(blocks))
    log.info("%s: %d cells x %d trials on %d worker(s)", experiment, len(cells), cfg.trials, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block, blocks))
    else:
        results = [_run_block(b) for b in blocks]

    per_cell: dict = {}
    for b, res in zip(blocks, results):
        per_cell.setdefault(b[2], []).append(res)
    rows = []
    kept = {}
    for ci, cell in enumerate(cells):
        mat = np.concatenate(per_cell[ci])
        if keep_trials:
            kept[ci] = mat
        for j, m in enumerate(measures):
            rows.append(MeasureRow(cell=dict(cell), measure=m, **aggregate(mat[:, j])))
    return MeasureTable(experiment, cfg.to_dict(), tuple(measures), [dict(c) for c in cells], rows, kept)


def run_shift_experiment(cfg: SimConfig, keep_trials: bool = False) -> MeasureTable:
    """Background N(0, sigma^2) against an independent draw shifted by ``shift``.

    One cell per (sigma, shift); the shifted sample is the positive group.
    """
    cells = [{"sigma": float(s), "shift": float(d)} for s in cfg.sigmas for d in cfg.shifts]
    return _run("shift", cfg, cells, MEASURES, keep_trials)


def run_outlier_experiment(cfg: SimConfig, keep_trials: bool = False) -> MeasureTable:
    """Both groups N(0, 1), with the first ``floor(f * N)`` positives replaced
    by N(outlier_mean, 1) draws. One cell per (fraction, outlier mean)."""
    cells = [
        {"outlier_fraction": float(f), "outlier_mean": float(m)}
        for f in cfg.outlier_fractions
        for m in cfg.outlier_means
    ]
    return _run("outlier", cfg, cells, MEASURES, keep_trials)


def run_null_bound_experiment(cfg: SimConfig, keep_trials: bool = False) -> MeasureTable:
    """GSSMD between two samples of the same unit distribution, per sample size.

    The ``abs_q95`` column is the usable null bound for each size.
    """
    cells = [{"sample_size": int(n)} for n in cfg.sample_sizes]
    return _run("null_bound", cfg, cells, ("gssmd",), keep_trials)


EXPERIMENTS: dict[str, Callable[..., MeasureTable]] = {
    "shift": run_shift_experiment,
    "outlier": run_outlier_experiment,
    "null-bound": run_null_bound_experiment,
}
