"""Command-line frontend: compress, decompress, verify, bench.

Exit codes: 0 ok, 1 invalid usage, 2 I/O failure, 3 corrupt container,
4 error-bound violation reported by verify.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .bench import bench_run, parse_manifest, rows_to_csv
from .codec import CodecConfig, decode, encode, read_header
from .errors import (
    BoundViolationError,
    ConfigError,
    CorruptContainerError,
    DataFormatError,
)
from .metrics import compute_metrics
from .series import read_series, write_raw

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CORRUPT = 3
EXIT_BOUND = 4

_PREDICTOR_FLAGS = {"nlms": "nlms", "nn": "nn", "last": "last_value", "ca": "ca"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfzr",
        description="Error-bounded lossy compressor for floating-point time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input_flags(p):
        p.add_argument("--format", choices=("raw", "csv"), default="raw")
        p.add_argument("--columns", help="csv columns, comma separated", default=None)
        p.add_argument("--vars", type=int, default=1, help="variables per timestep (raw)")

    pc = sub.add_parser("compress", help="compress a series file into a container")
    pc.add_argument("input")
    pc.add_argument("output")
    pc.add_argument("--maxerror", type=float, required=True,
                    help="maximum allowed absolute reconstruction error")
    pc.add_argument("--predictor", choices=sorted(_PREDICTOR_FLAGS), default="nlms")
    pc.add_argument("--window", type=int, default=32, help="predictor window size")
    pc.add_argument("--multivariate", action="store_true")
    pc.add_argument("--nn-weights", default=None)
    pc.add_argument("--codec", choices=("rc1", "raw"), default="rc1")
    add_input_flags(pc)

    pd = sub.add_parser("decompress", help="decode a container to raw float32")
    pd.add_argument("input")
    pd.add_argument("output")

    pv = sub.add_parser("verify", help="decode and check against the original")
    pv.add_argument("original")
    pv.add_argument("container")
    pv.add_argument("--json", action="store_true", dest="as_json")
    add_input_flags(pv)

    pb = sub.add_parser("bench", help="run the manifest-driven benchmark table")
    pb.add_argument("manifest")
    pb.add_argument("--output", default=None, help="write CSV here instead of stdout")
    pb.add_argument("--window", type=int, default=32)
    pb.add_argument("--no-timing", action="store_true",
                    help="omit throughput columns (deterministic output)")
    return parser


def _parse_columns(spec):
    if spec is None:
        return None
    try:
        return [int(c) for c in spec.split(",") if c.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --columns value {spec!r}") from exc


def _cmd_compress(args) -> int:
    config = CodecConfig(
        epsilon=args.maxerror,
        window_k=args.window,
        predictor=_PREDICTOR_FLAGS[args.predictor],
        multivariate=args.multivariate,
        entropy_codec=args.codec,
        nn_weight_path=args.nn_weights,
    )
    config.validate()
    series = read_series(
        args.input, args.format, columns=_parse_columns(args.columns), v=args.vars
    )
    blob = encode(series, config)
    with open(args.output, "wb") as fh:
        fh.write(blob)
    return EXIT_OK


def _cmd_decompress(args) -> int:
    with open(args.input, "rb") as fh:
        blob = fh.read()
    series = decode(blob)
    write_raw(args.output, series)
    return EXIT_OK


def _cmd_verify(args) -> int:
    original = read_series(
        args.original, args.format, columns=_parse_columns(args.columns), v=args.vars
    )
    with open(args.container, "rb") as fh:
        blob = fh.read()
    hdr = read_header(blob)
    t0 = time.perf_counter()
    recon = decode(blob)
    dt = time.perf_counter() - t0
    m = compute_metrics(
        original, recon, len(blob), decode_tps=max(original.n, 1) / max(dt, 1e-12)
    )
    ok = m.max_abs_err <= hdr.epsilon
    if args.as_json:
        payload = {
            "epsilon": hdr.epsilon,
            "predictor": hdr.predictor,
            "n": m.n,
            "v": m.v,
            "compressed_bytes": m.compressed_bytes,
            "ratio": m.ratio,
            "max_abs_err": m.max_abs_err,
            "mean_abs_err": m.mean_abs_err,
            "rmse": m.rmse,
            "bound_ok": ok,
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        print(
            f"epsilon={hdr.epsilon:g} predictor={hdr.predictor} n={m.n} v={m.v} "
            f"ratio={m.ratio:.3f} max_abs_err={m.max_abs_err:.3g} "
            f"mae={m.mean_abs_err:.3g} rmse={m.rmse:.3g} "
            f"bound={'ok' if ok else 'VIOLATED'}"
        )
    return EXIT_OK if ok else EXIT_BOUND


def _cmd_bench(args) -> int:
    with open(args.manifest) as fh:
        entries = parse_manifest(fh.read())
    rows = bench_run(entries, window_k=args.window)
    table = rows_to_csv(rows, include_timing=not args.no_timing)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "compress":
            return _cmd_compress(args)
        if args.command == "decompress":
            return _cmd_decompress(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return EXIT_USAGE
    except (ConfigError, DataFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorruptContainerError as exc:
        print(f"corrupt container: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except BoundViolationError as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
