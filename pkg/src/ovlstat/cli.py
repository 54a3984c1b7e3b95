"""``ovlstat`` command-line interface.

Subcommands::

    compute       effect sizes for two one-value-per-line files
    simulate      shift / outlier / null-bound Monte Carlo tables
    screen        per-plate hit calling from a well-level CSV
    synth-plates  write a synthetic plate CSV for testing

Exit codes: 0 success, 2 user or input error, 3 no usable data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._format import fmt_number, json_safe
from .errors import InsufficientControls, OvlstatError
from .report import MEASURES, effect_sizes
from .screening import (
    calls_csv,
    fit_logistic_reference,
    parse_plates,
    screen_plate,
    serialize_plates,
    synthetic_plate,
)
from .simulation import EXPERIMENTS, SimConfig

log = logging.getLogger("ovlstat")

EXIT_OK, EXIT_INPUT, EXIT_NO_DATA = 0, 2, 3


class UsageError(Exception):
    pass


def envelope(argv: Sequence[str], seed: Optional[int], payload, elapsed: Optional[float]) -> dict:
    return {
        "tool": "ovlstat",
        "version": __version__,
        "command": list(argv),
        "seed": seed,
        "payload": payload,
        "timing": None if elapsed is None else {"seconds": elapsed},
    }


def dump_json(obj) -> str:
    return json.dumps(json_safe(obj), indent=2, allow_nan=False) + "\n"


def read_values(path: str) -> np.ndarray:
    """One number per line; blank lines and ``#`` comments are skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    vals = []
    for i, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        try:
            vals.append(float(s))
        except ValueError:
            raise UsageError(f"{path}:{i}: not a number: {s!r}") from None
    if not vals:
        raise UsageError(f"{path}: no values")
    return np.array(vals)


def _bins(text: str):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("bins must be 'auto' or a positive integer") from None
    if k < 1:
        raise argparse.ArgumentTypeError("bins must be >= 1")
    return k


def _bandwidth(text: str):
    if text == "auto":
        return "auto"
    try:
        h = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("bandwidth must be 'auto' or a positive number") from None
    if not h > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return h


def _write(path: Optional[str], text: str, out) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def cmd_compute(args, argv, out) -> int:
    pos, neg = read_values(args.pos), read_values(args.neg)
    start = time.perf_counter()
    rep = effect_sizes(pos, neg, method=args.method, bins=args.bins, bandwidth=args.bandwidth)
    elapsed = time.perf_counter() - start if args.timing else None
    if args.format == "csv":
        cols = ["n_pos", "n_neg", *MEASURES, "ovl", "method"]
        d = rep.to_dict()
        vals = ["" if d[c] is None else (d[c] if isinstance(d[c], str) else fmt_number(d[c])) for c in cols]
        out.write(",".join(cols) + "\n" + ",".join(vals) + "\n")
    else:
        out.write(dump_json(envelope(argv, None, rep.to_dict(), elapsed)))
    return EXIT_OK


def cmd_simulate(args, argv, out) -> int:
    kw = dict(seed=args.seed, trials=args.trials, n_per_group=args.n, distribution=args.distribution, workers=args.workers)
    if args.sigma:
        kw["sigmas"] = args.sigma
    if args.shift:
        kw["shifts"] = args.shift
    if args.fraction:
        kw["outlier_fractions"] = args.fraction
    if args.outlier_mean:
        kw["outlier_means"] = args.outlier_mean
    if args.experiment == "null-bound":
        if args.sizes:
            kw["sample_sizes"] = args.sizes
        elif args.n_given:
            kw["sample_sizes"] = (args.n,)
    cfg = SimConfig(**kw)
    start = time.perf_counter()
    table = EXPERIMENTS[args.experiment](cfg)
    elapsed = time.perf_counter() - start if args.timing else None
    text = table.to_csv() if args.format == "csv" else table.to_json() + "\n"
    if args.out:
        _write(args.out, text, out)
        summary = {"out": args.out, "format": args.format, "rows": len(table.rows)}
        out.write(dump_json(envelope(argv, args.seed, summary, elapsed)))
    elif args.format == "csv":
        out.write(text)
    else:
        out.write(dump_json(envelope(argv, args.seed, table.to_dict(), elapsed)))
    return EXIT_OK


def cmd_screen(args, argv, out) -> int:
    try:
        with open(args.input, "rb") as fh:
            plates = parse_plates(fh, strict=False)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    start = time.perf_counter()
    by_id = {p.plate_id: p for p in plates}
    for name in (args.train_plate, args.test_plate):
        if name is not None and name not in by_id:
            raise UsageError(f"plate {name!r} not found in {args.input}")
    if (args.train_plate is None) != (args.test_plate is None):
        raise UsageError("--train-plate and --test-plate must be given together")

    reports, skipped = [], []
    for p in plates:
        try:
            reports.append(screen_plate(p, alpha=args.alpha, weak=args.weak))
        except InsufficientControls as exc:
            log.warning("skipping plate: %s", exc)
            skipped.append({"plate_id": p.plate_id, "reason": str(exc)})
    if not reports:
        log.error("no plate had enough controls")
        return EXIT_NO_DATA

    reference = None
    if args.train_plate is not None:
        ref = fit_logistic_reference(by_id[args.train_plate], by_id[args.test_plate])
        reference = {"train_plate": args.train_plate, "test_plate": args.test_plate, **ref.__dict__}
        for r in reports:
            if r.plate_id == args.train_plate:
                r.reference = ref

    payload = {"plates": [r.to_dict() for r in reports], "skipped": skipped, "reference": reference}
    elapsed = time.perf_counter() - start if args.timing else None
    _write(args.out, dump_json(envelope(argv, None, payload, elapsed)), out)
    if args.calls_csv:
        Path(args.calls_csv).write_text(calls_csv(reports), encoding="utf-8")
    return EXIT_OK


def cmd_synth(args, argv, out) -> int:
    rng = np.random.Generator(np.random.PCG64(args.seed))
    plates, truth = [], {}
    for i in range(args.plates):
        sp = synthetic_plate(
            f"P{i + 1}",
            rng,
            pos_mean=args.pos_mean,
            pos_sd=args.pos_sd,
            neg_mean=args.neg_mean,
            neg_sd=args.neg_sd,
            hit_fraction=args.hit_fraction,
        )
        plates.append(sp.plate)
        truth[sp.plate.plate_id] = sp.truth
    _write(args.out, serialize_plates(plates), out)
    if args.truth:
        Path(args.truth).write_text(dump_json(truth), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ovlstat", description="Overlap-based effect sizes and hit selection.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="effect sizes for two sample files")
    c.add_argument("--pos", required=True)
    c.add_argument("--neg", required=True)
    c.add_argument("--method", choices=("histogram", "parametric", "kde"), default="histogram")
    c.add_argument("--bins", type=_bins, default="auto")
    c.add_argument("--bandwidth", type=_bandwidth, default="auto")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.add_argument("--timing", action="store_true", help="include wall time in the envelope")
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("simulate", help="Monte Carlo studies")
    s.add_argument("experiment", choices=tuple(EXPERIMENTS))
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--distribution", choices=("normal", "lognormal"), default="normal")
    s.add_argument("--sigma", type=float, action="append")
    s.add_argument("--shift", type=float, action="append")
    s.add_argument("--fraction", type=float, action="append", help="outlier fraction")
    s.add_argument("--outlier-mean", type=float, action="append")
    s.add_argument("--sizes", type=int, nargs="+", help="null-bound sample sizes")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default=None)
    s.add_argument("--timing", action="store_true")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("screen", help="hit selection on a plate CSV")
    r.add_argument("--input", required=True)
    r.add_argument("--alpha", type=float, default=0.05)
    r.add_argument("--weak", type=float, default=1.0, help="weak SSMD criterion")
    r.add_argument("--train-plate")
    r.add_argument("--test-plate")
    r.add_argument("--out")
    r.add_argument("--calls-csv")
    r.add_argument("--timing", action="store_true")
    r.set_defaults(func=cmd_screen)

    g = sub.add_parser("synth-plates", help="write synthetic plates with planted hits")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--plates", type=int, default=2)
    g.add_argument("--pos-mean", type=float, default=0.2)
    g.add_argument("--pos-sd", type=float, default=0.05)
    g.add_argument("--neg-mean", type=float, default=1.0)
    g.add_argument("--neg-sd", type=float, default=0.1)
    g.add_argument("--hit-fraction", type=float, default=0.1)
    g.add_argument("--out")
    g.add_argument("--truth", help="write planted-hit ground truth JSON here")
    g.set_defaults(func=cmd_synth)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command == "simulate":
        args.n_given = args.n is not None
        if args.n is None:
            args.n = 1000
        if args.format is None:
            args.format = "csv" if args.out and args.out.endswith(".csv") else "json"
    try:
        return args.func(args, argv, out)
    except (UsageError, OvlstatError, OSError) as exc:
        print(f"ovlstat: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
