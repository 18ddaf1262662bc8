"""Command-line interface: ``curvetail <command> ...``.

Commands
--------
fit        estimate the tail index of a data file
predict    predict the level with a given return period
calibrate  calibrate an increment table on GPD samples
validate   measure delivered return levels for one distribution
curves     background curves of the construction as CSV
zoo list   print the distribution registry

Every command writes a JSON run manifest (command line, configuration,
seed, library version, output paths).  It goes to ``--manifest`` if given,
else next to ``--out`` as ``<out>.manifest.json``, else to stderr.

Exit codes: 0 success, 2 argument error, 3 data error, 4 numeric failure,
5 calibration did not converge.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .construction import Convention, OrderedSample, curve_points, scale_tail, xy_coords
from .errors import (CalibrationError, DataFileError, DegenerateDataError, DomainError,
                     LevelRangeError, NumericFailure, TableFormatError)
from .estimator import (FitConfig, KPrimeConfig, estimate_xi, kprime_intercept,
                        kprime_sequence)
from .increment.table import DEFAULT_LEVELS, TABLE_ENV, default_table, load_table, save_table
from .predictor import PredictionRequest, PredictorMode, predict
from .validation import Mode, ValidationConfig, delivered_levels, write_csv
from .zoo import lookup, registry_text

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC, EXIT_CALIBRATION = 0, 2, 3, 4, 5


class ArgumentProblem(ValueError):
    """Bad option value detected after parsing."""


def read_values(path) -> np.ndarray:
    """Numbers from a text file, one per line.

    Blank lines and anything after ``#`` are ignored.  Parsing uses
    :func:`float`, so it does not depend on the locale.

    Raises
    ------
    DataFileError
        If the file cannot be read or holds a token that is not a finite
        number (the message gives the line number).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataFileError(f"cannot read {path}: {exc}") from None
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            raise DataFileError(f"line {lineno}: not a number: {line!r}") from None
        if not math.isfinite(value):
            raise DataFileError(f"line {lineno}: non-finite value {line!r}")
        values.append(value)
    return np.array(values)


def load_sample(path, k: int) -> OrderedSample:
    values = read_values(path)
    if values.size < k:
        raise DataFileError(f"need ≥ {k} values, got {values.size} in {path}")
    return OrderedSample.from_values(values, source=str(path))


def _floats(tokens) -> list[float]:
    """Accept ``1 2 3`` as well as ``1,2,3``."""
    out = []
    for tok in tokens:
        for part in str(tok).split(","):
            if part.strip():
                try:
                    out.append(float(part))
                except ValueError:
                    raise ArgumentProblem(f"not a number: {part!r}") from None
    if not out:
        raise ArgumentProblem("empty number list")
    return out


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _table_info(path):
    if path:
        return {"path": str(path), "sha256": _sha256(path)}
    return {"path": None, "env": TABLE_ENV, "source": "default"}


class Manifest:
    def __init__(self, args, argv):
        self.data = {"command": args.command, "argv": list(argv), "version": __version__,
                     "config": {}, "seed": None, "inputs": {}, "outputs": []}
        self._target = args.manifest

    def emit(self, fallback_out=None):
        text = json.dumps(self.data, indent=2, sort_keys=True, default=str) + "\n"
        target = self._target or (f"{fallback_out}.manifest.json" if fallback_out else None)
        if target:
            Path(target).write_text(text, encoding="utf-8", newline="\n")
        else:
            sys.stderr.write(text)


def _print_pairs(pairs):
    for key, value in pairs:
        if isinstance(value, float):
            value = repr(value)
        elif isinstance(value, bool):
            value = str(value).lower()
        print(f"{key}={value}")


def cmd_fit(args, man: Manifest) -> int:
    sample = load_sample(args.data, args.k)
    convention = Convention(args.convention)
    cfg = FitConfig(k=args.k, convention=convention)
    tail = scale_tail(sample, args.k, convention)
    est = estimate_xi(tail, cfg)
    man.data["config"] = {"k": args.k, "convention": convention.value,
                          "xi_bracket": list(cfg.xi_bracket), "tol": cfg.tol,
                          "kprime": args.kprime, "m_count": args.m_count,
                          "weight_exponent": args.weight_exponent}
    man.data["inputs"] = {"data": str(args.data), "sha256": _sha256(args.data), "n": sample.n}
    pairs = [("n", sample.n), ("k", args.k), ("convention", convention.value),
             ("xi_hat", float(est.xi)), ("boundary", bool(est.boundary))]
    if args.kprime:
        kcfg = KPrimeConfig(m_count=args.m_count, weight_exponent=args.weight_exponent)
        kps, ests = kprime_sequence(sample, args.k, kcfg)
        intercept = kprime_intercept(kps, ests, kcfg.weight_exponent)
        pairs += [("kprime_k", ",".join(str(int(v)) for v in kps)),
                  ("kprime_xi", ",".join(repr(float(v)) for v in ests)),
                  ("kprime_intercept", intercept)]
    _print_pairs(pairs)
    if args.emit_xy:
        i = np.arange(1, args.k)
        x, y = xy_coords(tail.u[: args.k - 1], i, args.k, convention, sample.n)
        with open(args.emit_xy, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("i", "u", "x", "y"))
            for row in zip(i, tail.u[: args.k - 1], x, y):
                writer.writerow((int(row[0]),) + tuple(repr(float(v)) for v in row[1:]))
        man.data["outputs"].append(str(args.emit_xy))
    man.emit()
    return EXIT_OK


def cmd_predict(args, man: Manifest) -> int:
    sample = load_sample(args.data, args.k)
    t_des = args.t if args.t is not None else args.e_ratio * (sample.n + 1)
    mode = PredictorMode.NAIVE if args.naive else PredictorMode.ADJUSTED
    table = load_table(args.table) if (args.table and not args.naive) else None
    try:
        req = PredictionRequest(sample, t_des, args.k, mode, table)
    except ValueError as exc:
        raise ArgumentProblem(str(exc)) from None
    res = predict(req)
    man.data["config"] = {"k": args.k, "t_des": t_des, "mode": mode.value,
                          "table": None if args.naive else _table_info(args.table)}
    man.data["inputs"] = {"data": str(args.data), "sha256": _sha256(args.data), "n": sample.n}
    _print_pairs([("x_t", res.x_t), ("xi_hat", res.xi_hat), ("xi_p", res.xi_p),
                  ("e_ratio", res.e_ratio), ("t_des", float(t_des)), ("u_t", res.u_t),
                  ("mode", mode.value), ("boundary", bool(res.boundary))])
    man.emit()
    return EXIT_OK


def _calib_config(args):
    from .increment.calibration import CalibConfig

    known = {f.name for f in fields(CalibConfig)}
    overrides = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataFileError(f"cannot read {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ArgumentProblem(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(loaded, dict):
            raise ArgumentProblem(f"{args.config}: expected a JSON object")
        unknown = set(loaded) - known
        if unknown:
            raise ArgumentProblem(f"unknown calibration settings: {', '.join(sorted(unknown))}")
        overrides.update(loaded)
    for name in ("samples", "test_points", "max_sweeps", "band", "bandwidth", "seed",
                 "mode", "workers", "min_increment"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    try:
        return CalibConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise ArgumentProblem(str(exc)) from None


def cmd_calibrate(args, man: Manifest) -> int:
    from .increment.calibration import calibrate_table

    cfg = _calib_config(args)
    levels = _floats(args.levels) if args.levels else list(DEFAULT_LEVELS)
    man.data["config"] = {**cfg.describe(), "levels": levels}
    man.data["seed"] = cfg.seed
    out = Path(args.out)
    status = EXIT_OK
    try:
        table, results = calibrate_table(cfg, levels)
    except CalibrationError as exc:
        table, results = exc.result
        print(f"calibration failed: {exc}", file=sys.stderr)
        status = EXIT_CALIBRATION
    save_table(table, out)
    man.data["outputs"].append(str(out))
    man.data["result"] = [{"e_ratio": r.e_ratio, "converged": r.converged, "sweeps": r.sweeps,
                           "max_deviation": r.max_deviation} for r in results]
    for r in results:
        print(f"e_ratio={r.e_ratio!r} converged={str(r.converged).lower()} "
              f"sweeps={r.sweeps} max_deviation={r.max_deviation:.4f}")
    man.emit(out)
    return status


def cmd_validate(args, man: Manifest) -> int:
    try:
        spec = lookup(args.spec)
    except (KeyError, ValueError) as exc:
        raise ArgumentProblem(str(exc).strip("'\"")) from None
    levels = tuple(_floats(args.levels)) if args.levels else DEFAULT_LEVELS
    predictor = PredictorMode.NAIVE if args.naive else PredictorMode.ADJUSTED
    table = None
    if predictor is PredictorMode.ADJUSTED:
        table = load_table(args.table) if args.table else default_table()
    try:
        cfg = ValidationConfig(spec, n=args.n, k=args.k, levels=levels, samples=args.samples,
                               test_points=args.test_points, mode=Mode(args.mode),
                               predictor=predictor, seed=args.seed, table=table)
    except ValueError as exc:
        raise ArgumentProblem(str(exc)) from None
    report = delivered_levels(cfg, workers=args.workers)
    man.data["config"] = {**cfg.describe(), "table": (None if table is None
                                                      else _table_info(args.table))}
    man.data["seed"] = args.seed
    if args.out:
        write_csv([report], args.out)
        man.data["outputs"].append(str(args.out))
    else:
        write_csv([report], sys.stdout)
    man.emit(args.out)
    return EXIT_OK


def cmd_curves(args, man: Manifest) -> int:
    xis = _floats(args.xi)
    convention = Convention(args.convention)
    n = args.n if args.n is not None else args.k
    r_grid = np.linspace(0.0, 1.0, args.points + 1)[1:]
    rows = []
    for xi in xis:
        r, x, y = curve_points(xi, args.k, convention, n, r_grid)
        for rv, xv, yv in zip(r, x, y):
            if np.isfinite(xv) and np.isfinite(yv):
                rows.append((repr(float(xi)), convention.value, args.k, n,
                             repr(float(rv)), repr(float(xv)), repr(float(yv))))
    header = ("xi", "convention", "k", "n", "r", "x", "y")

    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
        man.data["outputs"].append(str(args.out))
    else:
        emit(sys.stdout)
    man.data["config"] = {"xi": xis, "convention": convention.value, "k": args.k, "n": n,
                          "points": args.points}
    man.emit(args.out)
    return EXIT_OK


def cmd_zoo(args, man: Manifest) -> int:
    sys.stdout.write(registry_text())
    man.emit()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvetail", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", metavar="PATH", help="where to write the run manifest")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="estimate the tail index")
    p.add_argument("data", help="text file, one number per line")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--convention", choices=[c.value for c in Convention],
                   default=Convention.K_HALF.value)
    p.add_argument("--kprime", action="store_true", help="also report the k' back-extrapolation")
    p.add_argument("--m-count", type=int, default=8)
    p.add_argument("--weight-exponent", type=float, default=2.0)
    p.add_argument("--emit-xy", metavar="CSV", help="write construction coordinates")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="predict a return level")
    p.add_argument("data")
    level = p.add_mutually_exclusive_group(required=True)
    level.add_argument("--t", type=float, help="desired return period T")
    level.add_argument("--e-ratio", type=float, help="extrapolation ratio T/(N+1)")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--table", help=f"increment table (default ${TABLE_ENV} or the shipped one)")
    p.add_argument("--naive", action="store_true", help="predict with the raw estimate")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("calibrate", parents=[common], help="calibrate an increment table")
    p.add_argument("--levels", nargs="+", help="extrapolation ratios (default the five T levels)")
    p.add_argument("--config", help="JSON object of calibration settings")
    p.add_argument("--samples", type=int)
    p.add_argument("--test-points", type=int)
    p.add_argument("--max-sweeps", type=int)
    p.add_argument("--band", type=float)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--workers", type=int)
    p.add_argument("--min-increment", type=float, help="lower bound on dxi beyond E_R = 1")
    p.add_argument("--out", default="increment_table.txt")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("validate", parents=[common], help="measure delivered return levels")
    p.add_argument("--spec", required=True, help="registry label or gpd:<xi>")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--levels", nargs="+")
    p.add_argument("--table")
    p.add_argument("--naive", action="store_true")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.EMPIRICAL.value)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--test-points", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("curves", parents=[common], help="background curves as CSV")
    p.add_argument("--xi", nargs="+", required=True)
    p.add_argument("--convention", choices=[c.value for c in Convention],
                   default=Convention.BASIC.value)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--n", type=int)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("zoo", parents=[common], help="distribution registry")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_zoo)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, Manifest(args, argv))
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except NumericFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataFileError, DegenerateDataError, DomainError, TableFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArgumentProblem, LevelRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
