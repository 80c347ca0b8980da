"""Command-line interface: reproducible velocity-field workflows.

Subcommands cover the full loop: ``generate`` synthetic data, ``train``
or ``update`` a field, ``query`` it on a points file or an inclusive
``lo:step:hi`` grid, ``filter`` estimates by confidence, ``augment``
free space with QMC zeros, ``evaluate`` against held-out data, ``bench``
runtime scaling, and ``compare-gp`` against the exact full-GP oracle.

Configuration comes from an optional ``key=value`` file (`#` comments
allowed, unknown keys rejected) with flags overriding file values; the
effective configuration is echoed into every artifact (CSV comment
lines, JSON ``config`` objects, a JSON string inside saved fields).
Given the same config and seed, two invocations write byte-identical
CSVs; only timing fields in reports vary.

Exit codes: 0 success, 1 usage or configuration error, 2 data or
capacity error, 3 numerical failure.  Errors print one line to stderr
in the form ``error[<category>]: <message>``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, fields as dataclass_fields, replace

import numpy as np

from . import evaluation
from .datasets import (
    Dataset,
    generate_blobs,
    generate_chunks,
    load_trajectories,
    save_trajectories,
    split,
)
from .exceptions import (
    CapacityError,
    DataError,
    InvalidArgumentError,
    NumericalError,
)
from .field import (
    DEFAULT_BOUNDS,
    DEFAULT_SPACING,
    FieldConfig,
    VelocityEstimate,
    filter_by_confidence,
    load_field,
    qmc_augment,
    query_field,
    save_field,
    update_field,
)
from .field import train_field as _train_field
from .inference import DEFAULT_ALPHA, DEFAULT_BETA, NoiseModel
from .kernels import KernelSpec, lattice_axis

ESTIMATES_HEADER = "x,y,z,mean_vx,mean_vy,mean_vz,var_vx,var_vy,var_vz,sigma_max"

_GENERATORS = ("blobs", "chunks")
_SEQUENCES = ("sobol", "halton")
_NORMALIZE_MODES = ("none", "fit", "auto")


# ---------------------------------------------------------------------------
# RunConfig: key=value file, flag overrides, canonical echo


@dataclass
class RunConfig:
    """Effective run configuration; every key has a flag of the same name."""

    gammas: tuple = (10.0, 10.0, 10.0)
    bounds: tuple = DEFAULT_BOUNDS
    spacing: float = DEFAULT_SPACING
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    seed: int = 0
    dataset: str = "blobs"
    n: int = 5000
    noise_sigma: float = 0.1
    split_fraction: float = 0.2
    qmc_count: int = 0
    qmc_sequence: str = "sobol"
    removal_radius: float | None = None  # None means spacing / 2
    sigma_threshold: float | None = None
    normalize: str = "auto"
    feature_threshold: float | None = None

    def effective_removal_radius(self) -> float:
        if self.removal_radius is None:
            return self.spacing / 2.0
        return self.removal_radius


def _parse_float(key, raw, low=None, high=None, low_open=True):
    try:
        value = float(raw)
    except ValueError as exc:
        raise InvalidArgumentError(f"config key {key}: not a number: {raw!r}") from exc
    if math.isnan(value):
        raise InvalidArgumentError(f"config key {key}: NaN is not allowed")
    if low is not None and (value <= low if low_open else value < low):
        raise InvalidArgumentError(f"config key {key}: must be > {low}, got {raw}")
    if high is not None and value >= high:
        raise InvalidArgumentError(f"config key {key}: must be < {high}, got {raw}")
    return value


def _parse_int(key, raw, minimum):
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidArgumentError(f"config key {key}: not an integer: {raw!r}") from exc
    if value < minimum:
        raise InvalidArgumentError(f"config key {key}: must be >= {minimum}, got {value}")
    return value


def _parse_gammas(key, raw):
    parts = [p.strip() for p in str(raw).split(",")]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise InvalidArgumentError(f"config key {key}: need 1 or 3 values, got {raw!r}")
    return tuple(_parse_float(key, p, low=0.0) for p in parts)


def _parse_bounds(key, raw):
    specs = [p.strip() for p in str(raw).split(",")]
    if len(specs) == 1:
        specs = specs * 3
    if len(specs) != 3:
        raise InvalidArgumentError(f"config key {key}: need 1 or 3 lo:hi pairs, got {raw!r}")
    out = []
    for spec in specs:
        halves = spec.split(":")
        if len(halves) != 2:
            raise InvalidArgumentError(f"config key {key}: expected lo:hi, got {spec!r}")
        lo = _parse_float(key, halves[0])
        hi = _parse_float(key, halves[1])
        if hi <= lo:
            raise InvalidArgumentError(f"config key {key}: need hi > lo, got {spec!r}")
        out.append((lo, hi))
    return tuple(out)


def _parse_choice(key, raw, choices):
    value = str(raw).strip()
    if value not in choices:
        raise InvalidArgumentError(f"config key {key}: must be one of {choices}, got {raw!r}")
    return value


def _parse_optional_float(key, raw, low=None, high=None, none_words=("none",)):
    value = str(raw).strip().lower()
    if value in none_words:
        return None
    return _parse_float(key, raw, low=low, high=high)


_CONFIG_PARSERS = {
    "gammas": _parse_gammas,
    "bounds": _parse_bounds,
    "spacing": lambda k, v: _parse_float(k, v, low=0.0),
    "alpha": lambda k, v: _parse_float(k, v, low=0.0),
    "beta": lambda k, v: _parse_float(k, v, low=0.0),
    "seed": lambda k, v: _parse_int(k, v, minimum=0),
    "dataset": lambda k, v: _parse_choice(k, v, _GENERATORS),
    "n": lambda k, v: _parse_int(k, v, minimum=1),
    "noise_sigma": lambda k, v: _parse_float(k, v, low=0.0, low_open=False),
    "split_fraction": lambda k, v: _parse_float(k, v, low=0.0, high=1.0),
    "qmc_count": lambda k, v: _parse_int(k, v, minimum=0),
    "qmc_sequence": lambda k, v: _parse_choice(k, v, _SEQUENCES),
    "removal_radius": lambda k, v: _parse_optional_float(k, v, low=0.0, none_words=("auto",)),
    "sigma_threshold": lambda k, v: _parse_optional_float(k, v, low=0.0),
    "normalize": lambda k, v: _parse_choice(k, v, _NORMALIZE_MODES),
    "feature_threshold": lambda k, v: _parse_optional_float(k, v, low=0.0, high=1.0),
}


def load_config_file(path) -> dict:
    """Parse a key=value config file; unknown keys are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InvalidArgumentError(
                f"{path}: line {lineno}: expected key=value, got {stripped!r}"
            )
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _CONFIG_PARSERS:
            raise InvalidArgumentError(
                f"{path}: line {lineno}: unknown config key {key!r} "
                f"(known keys: {', '.join(sorted(_CONFIG_PARSERS))})"
            )
        values[key] = _CONFIG_PARSERS[key](key, raw)
    return values


def build_run_config(args) -> RunConfig:
    """Config file values, then flag overrides, on top of defaults."""
    values = {}
    config_path = getattr(args, "config", None)
    if config_path:
        values.update(load_config_file(config_path))
    for key, parser in _CONFIG_PARSERS.items():
        raw = getattr(args, key, None)
        if raw is not None:
            values[key] = parser(key, raw)
    return replace(RunConfig(), **values)


def _echo_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):  # bounds
            return ",".join(f"{repr(lo)}:{repr(hi)}" for lo, hi in value)
        return ",".join(repr(float(v)) for v in value)
    return str(value)


def config_echo(cfg: RunConfig) -> dict:
    """Canonical, deterministic string form of the effective config."""
    return {
        f.name: _echo_value(getattr(cfg, f.name)) for f in dataclass_fields(RunConfig)
    }


def _echo_comments(cfg: RunConfig) -> list:
    echo = config_echo(cfg)
    return [f"{key}={echo[key]}" for key in sorted(echo)]


def field_config_from(cfg: RunConfig) -> FieldConfig:
    return FieldConfig(
        bounds=cfg.bounds,
        spacing=cfg.spacing,
        kernel=KernelSpec(cfg.gammas),
        noise=NoiseModel(beta=cfg.beta, alpha=cfg.alpha),
        normalize=cfg.normalize,
        feature_threshold=cfg.feature_threshold,
    )


# ---------------------------------------------------------------------------
# Shared I/O helpers


def _generate_dataset(cfg: RunConfig) -> Dataset:
    if cfg.dataset == "blobs":
        return generate_blobs(cfg.n, cfg.seed, noise_sigma=cfg.noise_sigma)
    return generate_chunks(cfg.n, cfg.seed, noise_sigma=cfg.noise_sigma)


def _load_nonempty(path) -> Dataset:
    dataset = load_trajectories(path)
    if dataset.n == 0:
        raise DataError(f"empty dataset: {path}")
    return dataset


def _parse_grid_spec(raw: str) -> np.ndarray:
    """Inclusive lo:step:hi grid, one spec for all axes or three."""
    specs = [p.strip() for p in raw.split(",")]
    if len(specs) == 1:
        specs = specs * 3
    if len(specs) != 3:
        raise InvalidArgumentError(f"grid spec needs 1 or 3 lo:step:hi parts, got {raw!r}")
    axes = []
    for spec in specs:
        parts = spec.split(":")
        if len(parts) != 3:
            raise InvalidArgumentError(f"grid spec part must be lo:step:hi, got {spec!r}")
        lo = _parse_float("grid", parts[0])
        step = _parse_float("grid", parts[1], low=0.0)
        hi = _parse_float("grid", parts[2])
        axes.append(lattice_axis(lo, hi, step))
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])


def _load_query_points(path) -> np.ndarray:
    """Points file: either the dataset schema or a bare x,y,z header."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                stripped = line.strip()
                if stripped and not stripped.startswith("#"):
                    header = tuple(p.strip() for p in stripped.split(","))
                    break
            else:
                raise DataError(f"{path}: no header line found")
    except OSError as exc:
        raise DataError(f"cannot read points file {path}: {exc}") from exc
    if header == ("x", "y", "z"):
        rows = []
        bad = []
        with open(path, "r", encoding="utf-8") as handle:
            seen_header = False
            for lineno, line in enumerate(handle, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if not seen_header:
                    seen_header = True
                    continue
                parts = stripped.split(",")
                try:
                    values = [float(p) for p in parts]
                except ValueError:
                    bad.append(f"line {lineno}")
                    continue
                if len(values) != 3 or not all(np.isfinite(values)):
                    bad.append(f"line {lineno}")
                    continue
                rows.append(values)
        if bad:
            raise DataError(f"{path}: malformed rows: {'; '.join(bad[:10])}")
        if not rows:
            raise DataError(f"{path}: no query points")
        return np.asarray(rows, dtype=np.float64)
    dataset = _load_nonempty(path)
    return dataset.positions


def _format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def write_estimates_csv(path, estimates, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(ESTIMATES_HEADER)
    for est in estimates:
        row = (
            list(est.position)
            + list(est.mean)
            + list(est.variance)
            + [est.sigma_max]
        )
        lines.append(_format_row(row))
    _write_text(path, "\n".join(lines) + "\n")


def read_estimates_csv(path) -> list:
    """Parse an estimates CSV back into VelocityEstimate records."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw_lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read estimates file {path}: {exc}") from exc
    header = None
    estimates = []
    bad = []
    for lineno, line in enumerate(raw_lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if header is None:
            if stripped != ESTIMATES_HEADER:
                raise DataError(
                    f"{path}: line {lineno}: expected header {ESTIMATES_HEADER!r}"
                )
            header = stripped
            continue
        parts = stripped.split(",")
        if len(parts) != 10:
            bad.append(f"line {lineno}: expected 10 fields, got {len(parts)}")
            continue
        try:
            values = [float(p) for p in parts]
        except ValueError:
            bad.append(f"line {lineno}: unparseable number")
            continue
        estimates.append(
            VelocityEstimate(
                position=np.asarray(values[0:3]),
                mean=np.asarray(values[3:6]),
                variance=np.asarray(values[6:9]),
                sigma_max=values[9],
            )
        )
    if header is None:
        raise DataError(f"{path}: no header line found")
    if bad:
        raise DataError(f"{path}: malformed rows: {'; '.join(bad[:10])}")
    return estimates


def _write_text(path, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _write_json(path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_generate(args) -> int:
    cfg = build_run_config(args)
    dataset = _generate_dataset(cfg)
    save_trajectories(dataset, args.out, comments=_echo_comments(cfg))
    return 0


def _cmd_train(args) -> int:
    cfg = build_run_config(args)
    dataset = _load_nonempty(args.data)
    field = _train_field(dataset, field_config_from(cfg))
    save_field(field, args.out, config_echo=config_echo(cfg))
    return 0


def _cmd_update(args) -> int:
    cfg = build_run_config(args)
    field = load_field(args.field)
    batch = load_trajectories(args.data)
    updated = update_field(field, batch)
    save_field(updated, args.out, config_echo=config_echo(cfg))
    return 0


def _cmd_query(args) -> int:
    cfg = build_run_config(args)
    field = load_field(args.field)
    if args.grid is not None:
        points = _parse_grid_spec(args.grid)
    else:
        points = _load_query_points(args.points)
    estimates = query_field(field, points)
    write_estimates_csv(args.out, estimates, comments=_echo_comments(cfg))
    return 0


def _cmd_filter(args) -> int:
    cfg = build_run_config(args)
    threshold = cfg.sigma_threshold
    if threshold is None:
        raise InvalidArgumentError(
            "filter needs a confidence threshold (--sigma-threshold or config)"
        )
    estimates = read_estimates_csv(args.estimates)
    kept = filter_by_confidence(estimates, threshold)
    write_estimates_csv(args.out, kept, comments=_echo_comments(cfg))
    return 0


def _cmd_augment(args) -> int:
    cfg = build_run_config(args)
    dataset = load_trajectories(args.data)
    augmented = qmc_augment(
        dataset,
        bounds=cfg.bounds,
        count=cfg.qmc_count,
        removal_radius=cfg.effective_removal_radius(),
        sequence=cfg.qmc_sequence,
        seed=cfg.seed,
    )
    save_trajectories(augmented, args.out, comments=_echo_comments(cfg))
    return 0


def _split_or_files(args, cfg: RunConfig):
    if args.test is not None:
        if args.train is None:
            raise InvalidArgumentError("--test requires --train for the MSLL baseline")
        return _load_nonempty(args.train), _load_nonempty(args.test)
    if args.data is None:
        raise InvalidArgumentError("need either --data or --train/--test")
    dataset = _load_nonempty(args.data)
    return split(dataset, cfg.split_fraction, cfg.seed)


def _cmd_evaluate(args) -> int:
    cfg = build_run_config(args)
    field = load_field(args.field)
    train, test = _split_or_files(args, cfg)
    report = evaluation.evaluate_field(field, test, train, config_echo=config_echo(cfg))
    _write_json(args.out, report.to_dict())
    return 0


def _cmd_bench(args) -> int:
    cfg = build_run_config(args)
    dataset = _load_nonempty(args.data) if args.data else _generate_dataset(cfg)
    sizes = [_parse_int("sizes", s, minimum=1) for s in args.sizes.split(",")]
    rows = evaluation.scaling_benchmark(
        dataset,
        sizes,
        field_config_from(cfg),
        repeats=args.repeats,
        query_count=args.query_count,
        seed=cfg.seed,
    )
    _write_text(
        args.out, evaluation.bench_rows_to_csv(rows, comments=_echo_comments(cfg))
    )
    return 0


def _cmd_compare_gp(args) -> int:
    cfg = build_run_config(args)
    train, test = _split_or_files(args, cfg)
    result = evaluation.compare_with_full_gp(
        train,
        test,
        field_config_from(cfg),
        cap=args.fgp_cap,
        config_echo=config_echo(cfg),
    )
    _write_json(args.out, result)
    return 0


# ---------------------------------------------------------------------------
# Parser assembly


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1.

    Values like ``-1:0.1:1`` (grid and bounds specs) start with a dash;
    widen argparse's negative-number detection so they are read as
    option values rather than unknown flags.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-\d[\d.:,eE+-]*$")

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[usage]: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_config_flags(parser, keys):
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    flag_help = {
        "gammas": "kernel inverse bandwidths, one value or three comma-separated",
        "bounds": "grid bounds lo:hi, one pair or three comma-separated",
        "spacing": "fixed-point lattice spacing",
        "alpha": "weight prior precision",
        "beta": "observation noise precision",
        "seed": "RNG seed",
        "dataset": "synthetic generator: blobs or chunks",
        "n": "number of generated points",
        "noise_sigma": "generator label noise sigma",
        "split_fraction": "held-out test fraction",
        "qmc_count": "number of QMC free-space samples",
        "qmc_sequence": "low-discrepancy sequence: sobol or halton",
        "removal_radius": "drop synthetic points this close to real data (auto = spacing/2)",
        "sigma_threshold": "confidence threshold on sigma_max",
        "normalize": "position normalization: none, fit, or auto",
        "feature_threshold": "sparse featurization cutoff, or none for dense",
    }
    for key in dict.fromkeys(keys):  # dedupe, keep order
        parser.add_argument(
            f"--{key.replace('_', '-')}",
            dest=key,
            metavar="V",
            help=flag_help[key],
        )


_TRAIN_KEYS = (
    "gammas", "bounds", "spacing", "alpha", "beta", "normalize",
    "feature_threshold", "seed",
)
_GENERATE_KEYS = ("dataset", "n", "seed", "noise_sigma")
_SPLIT_KEYS = ("split_fraction", "seed")


def build_parser() -> _Parser:
    parser = _Parser(prog="bdfield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("generate", parents=[], help="generate a synthetic dataset CSV")
    _add_config_flags(p, _GENERATE_KEYS)
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(handler=_cmd_generate)

    p = sub.add_parser("train", help="train a field from a dataset CSV")
    _add_config_flags(p, _TRAIN_KEYS)
    p.add_argument("--data", required=True, metavar="CSV")
    p.add_argument("--out", required=True, metavar="FIELD")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("update", help="absorb another dataset CSV into a saved field")
    _add_config_flags(p, ())
    p.add_argument("--field", required=True, metavar="FIELD")
    p.add_argument("--data", required=True, metavar="CSV")
    p.add_argument("--out", required=True, metavar="FIELD")
    p.set_defaults(handler=_cmd_update)

    p = sub.add_parser("query", help="query a saved field on points or a grid")
    _add_config_flags(p, ())
    p.add_argument("--field", required=True, metavar="FIELD")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--points", metavar="CSV", help="points file (x,y,z header or dataset schema)")
    group.add_argument("--grid", metavar="SPEC", help="inclusive lo:step:hi, one spec or three")
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(handler=_cmd_query)

    p = sub.add_parser("filter", help="keep estimates with sigma_max <= threshold")
    _add_config_flags(p, ("sigma_threshold",))
    p.add_argument("--estimates", required=True, metavar="CSV")
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(handler=_cmd_filter)

    p = sub.add_parser("augment", help="add QMC zero-velocity samples to free space")
    _add_config_flags(p, ("bounds", "qmc_count", "qmc_sequence", "removal_radius", "seed", "spacing"))
    p.add_argument("--data", required=True, metavar="CSV")
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(handler=_cmd_augment)

    p = sub.add_parser("evaluate", help="score a saved field on held-out data")
    _add_config_flags(p, _SPLIT_KEYS)
    p.add_argument("--field", required=True, metavar="FIELD")
    p.add_argument("--data", metavar="CSV", help="dataset to split into train/test")
    p.add_argument("--train", metavar="CSV", help="training labels for the MSLL baseline")
    p.add_argument("--test", metavar="CSV", help="held-out test set")
    p.add_argument("--out", default="-", metavar="JSON", help="report path, - for stdout")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("bench", help="runtime scaling table at fixed basis size")
    _add_config_flags(p, _TRAIN_KEYS + _GENERATE_KEYS)
    p.add_argument("--data", metavar="CSV", help="dataset CSV (default: generate per config)")
    p.add_argument("--sizes", required=True, metavar="N1,N2,...")
    p.add_argument("--repeats", type=int, default=3, metavar="R")
    p.add_argument("--query-count", type=int, default=1000, metavar="Q")
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(handler=_cmd_bench)

    p = sub.add_parser("compare-gp", help="BDF versus the exact full-GP oracle")
    _add_config_flags(p, _TRAIN_KEYS + _SPLIT_KEYS)
    p.add_argument("--data", metavar="CSV", help="dataset to split into train/test")
    p.add_argument("--train", metavar="CSV")
    p.add_argument("--test", metavar="CSV")
    p.add_argument("--fgp-cap", type=int, default=evaluation.FULL_GP_CAP, metavar="N")
    p.add_argument("--out", default="-", metavar="JSON", help="report path, - for stdout")
    p.set_defaults(handler=_cmd_compare_gp)

    return parser


def run_cli(argv=None) -> int:
    """Run one CLI invocation; returns the process exit code."""
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:  # argparse help (0) or usage error (1)
        code = exc.code
        return int(code) if code is not None else 0
    except InvalidArgumentError as exc:
        print(f"error[usage]: {exc}", file=sys.stderr)
        return 1
    except (DataError, CapacityError) as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error[numerical]: {exc}", file=sys.stderr)
        return 3


def main() -> int:
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
