"""Command-line entry points: ``synth``, ``extract``, ``graph``, ``experiment``.

Exit codes: 0 ok, 2 config error, 3 I/O error, 4 extraction failure,
5 dense size cap exceeded. Outputs are written to temporary files and
renamed into place, so a failed run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .errors import BatchError, ConfigError, FormatError
from .evaluation import DataParams, generate_synthetic, run_experiment
from .forest import ForestConfig
from .graph_learning import (
    collapse_autocovariance,
    dense_adjacency,
    estimate_dense_bytes,
    learn_weights,
    threshold_graph,
)
from .pipeline import PipelineConfig, extract_batch, load_config
from .signal_core import downsample, filter_bank, load_signal, save_signal

log = logging.getLogger("hgsp")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EXTRACT = 4
EXIT_SIZE = 5

SAMPLE_SUFFIXES = {".csv": "csv", ".f64": "raw_f64", ".bin": "raw_f64"}
LABELS_FILE = "labels.csv"  # written by ``synth``; never treated as a sample


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def write_files_atomic(files: dict) -> None:
    """Write ``{path: text}``; every file is staged before any is renamed in."""
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def _load_config(path):
    if path is None:
        return PipelineConfig()
    try:
        return load_config(path)
    except OSError as exc:
        raise CliError(EXIT_CONFIG, f"cannot read config {path}: {exc}") from exc
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, f"config error in {path}: {exc}") from exc


def _sample_format(path, forced):
    if forced:
        return forced
    fmt = SAMPLE_SUFFIXES.get(Path(path).suffix.lower())
    if fmt is None:
        raise FormatError(f"{path}: unknown sample extension")
    return fmt


def _read_sample(path, args):
    return load_signal(path, _sample_format(path, args.format), args.fs, args.channels)


def _output_dir_ok(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise CliError(EXIT_IO, f"output directory {parent} does not exist")


def cmd_synth(args) -> int:
    out = Path(args.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {out}: {exc}") from exc
    dataset = generate_synthetic(args.n_per_class, args.channels or 8, args.samples, args.fs, args.seed)
    labels = io.StringIO()
    writer = csv.writer(labels, lineterminator="\n")
    writer.writerow(["file", "label"])
    for n, (signal, label) in enumerate(dataset):
        name = f"sample_{n:05d}.csv"
        save_signal(signal, out / name)
        writer.writerow([name, label])
    write_files_atomic({out / LABELS_FILE: labels.getvalue()})
    log.info("wrote %d samples to %s", len(dataset), out)
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = _load_config(args.config)
    src = Path(args.input)
    if not src.is_dir():
        raise CliError(EXIT_IO, f"input directory {src} not found")
    _output_dir_ok(args.output)
    paths = sorted(p for p in src.iterdir()
                   if p.is_file() and p.suffix.lower() in SAMPLE_SUFFIXES and p.name != LABELS_FILE)
    if not paths:
        raise CliError(EXIT_IO, f"no sample files (*.csv, *.f64, *.bin) in {src}")

    errors = {}
    loaded = []
    for p in paths:
        try:
            loaded.append((p, _read_sample(p, args)))
        except (OSError, ValueError) as exc:
            errors[p.name] = f"{type(exc).__name__}: {exc}"
    if loaded:
        first = loaded[0][1]
        try:
            cfg.check_signal(first.n_channels, first.n_samples)
        except ConfigError as exc:
            raise CliError(EXIT_CONFIG, f"config does not fit {loaded[0][0].name}: {exc}") from exc
        reference = (first.n_channels, first.n_samples)
        kept = []
        for p, s in loaded:
            if (s.n_channels, s.n_samples) != reference:
                errors[p.name] = f"shape {s.n_channels}x{s.n_samples} differs from {reference[0]}x{reference[1]}"
            else:
                kept.append((p, s))
        loaded = kept

    rows = []
    names = None
    if loaded:
        try:
            batch = extract_batch([s for _, s in loaded], cfg, jobs=args.jobs)
        except BatchError as exc:
            for i, err in exc.errors.items():
                errors[loaded[i][0].name] = err
        else:
            names = batch.names
            for i, err in batch.errors.items():
                errors[loaded[i][0].name] = err
            rows = [(loaded[i][0].name, batch.features[r]) for r, i in enumerate(batch.indices)]

    if rows:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sample", *names])
        for name, values in rows:
            writer.writerow([name, *(repr(float(v)) for v in values)])
        write_files_atomic({args.output: buf.getvalue()})
        log.info("wrote %d feature rows to %s", len(rows), args.output)
    if errors:
        print(f"{len(errors)} of {len(paths)} samples failed:", file=sys.stderr)
        for name in sorted(errors):
            print(f"  {name}: {errors[name]}", file=sys.stderr)
        return EXIT_EXTRACT
    return EXIT_OK


def _matrix_text(m, fmt=repr):
    return "".join(" ".join(fmt(float(v)) for v in row) + "\n" for row in m)


def cmd_graph(args) -> int:
    cfg = _load_config(args.config)
    out = Path(args.output)
    try:
        x = _read_sample(args.input, args)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.input}: {exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_EXTRACT, f"bad sample {args.input}: {exc}") from exc
    if not out.is_dir():
        raise CliError(EXIT_IO, f"output directory {out} not found")
    if not 0 <= args.band <= cfg.n_bands:
        raise CliError(EXIT_CONFIG, f"band must lie in 0..{cfg.n_bands}, got {args.band}")
    if cfg.n_coarse > x.n_samples:
        raise CliError(EXIT_CONFIG, f"n_coarse: T2={cfg.n_coarse} exceeds T={x.n_samples}")
    n_vertices = x.n_channels * cfg.n_coarse
    if n_vertices > cfg.max_dense_vertices:
        need = estimate_dense_bytes(x.n_channels, cfg.n_coarse)
        raise CliError(
            EXIT_SIZE,
            f"dense adjacency has {n_vertices} vertices (cap {cfg.max_dense_vertices}); storing it "
            f"needs {need} bytes ({need / 2**30:.1f} GiB). Full spatiotemporal matrices grow as "
            f"(S*T)^2, so lower n_coarse or raise max_dense_vertices.")

    signal = x if args.band == 0 else filter_bank(x, cfg.bands_hz)[args.band - 1]
    coarse = downsample(signal, cfg.n_coarse)
    tau = learn_weights(coarse, cfg.lag2, max_entries=cfg.max_tensor_entries)
    R = collapse_autocovariance(tau)
    graph = threshold_graph(R, cfg.kappa)
    W = dense_adjacency(tau, max_vertices=cfg.max_dense_vertices)

    S, L = R.shape[0], R.shape[2] - 1
    autocov = [f"# S={S} L={L}\n"]
    autocov += [f"{i} {j} {l} {float(R[i, j, l])!r}\n" for i in range(S) for j in range(S) for l in range(L + 1)]
    files = {
        out / "adjacency.txt": _matrix_text(W),
        out / "autocov.txt": "".join(autocov),
        out / "graph.txt": f"# kappa={graph.kappa!r}\n" + _matrix_text(graph.weights, lambda v: str(int(v))),
    }
    write_files_atomic(files)
    log.info("wrote %s", ", ".join(str(p) for p in files))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _load_config(args.config)
    _output_dir_ok(args.output)
    data = DataParams(args.n_per_class, args.channels or 8, args.samples, args.fs)
    try:
        cfg.check_signal(data.n_channels, data.n_samples)
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, f"config does not fit the synthetic data: {exc}") from exc
    forest = ForestConfig(n_trees=args.trees, seed=args.seed)
    try:
        report = run_experiment(cfg, forest, data, seed=args.seed, shuffle_labels=args.shuffle_labels,
                                top_q=args.top_q, jobs=args.jobs)
    except BatchError as exc:
        raise CliError(EXIT_EXTRACT, str(exc)) from exc
    for stage, secs in report.timings.items():
        log.info("%s: %.3f s", stage, secs)
    write_files_atomic({args.output: report.to_csv(include_timings=args.timings)})
    print(f"AUC {report.auc:.4f} with {report.n_features} features", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config file (key = value lines)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("--verbose", "-v", action="count", default=0)

    sample = argparse.ArgumentParser(add_help=False)
    sample.add_argument("--fs", type=float, default=400.0, help="sample rate in Hz")
    sample.add_argument("--format", choices=("csv", "raw_f64"),
                        help="sample format (default: from the file extension)")
    sample.add_argument("--channels", type=int, help="channel count (needed for raw_f64)")

    parser = argparse.ArgumentParser(prog="hgsp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common, sample], help="feature CSV for a directory of samples")
    p.add_argument("--input", required=True, help="directory of sample files")
    p.add_argument("--output", required=True, help="feature CSV path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("graph", parents=[common, sample], help="dump the level-2 graph of one sample")
    p.add_argument("--input", required=True, help="sample file")
    p.add_argument("--output", required=True, help="existing output directory")
    p.add_argument("--band", type=int, default=0, help="filter-bank band (1-based); 0 = unfiltered")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("experiment", parents=[common], help="synthetic train/test AUC run")
    p.add_argument("--output", required=True, help="report CSV path")
    p.add_argument("--n-per-class", type=int, default=100)
    p.add_argument("--channels", type=int, default=8)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--fs", type=float, default=400.0)
    p.add_argument("--trees", type=int, default=200)
    p.add_argument("--top-q", type=int, help="keep the top-q highest-variance features")
    p.add_argument("--shuffle-labels", action="store_true")
    p.add_argument("--timings", action="store_true", help="add per-stage timings to the report")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic labelled sample set")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--n-per-class", type=int, default=10)
    p.add_argument("--channels", type=int, default=8)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--fs", type=float, default=400.0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.verbose == 0:
        warnings.filterwarnings("ignore", message="band edges above Nyquist")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
