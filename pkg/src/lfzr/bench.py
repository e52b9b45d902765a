"""Benchmark harness: manifest-driven compression ratio tables.

Manifest: plain text, one entry per line,

    path,format,columns,eps_list,codecs

Fields after the first two hold ';'-separated sublists.  For csv input
``columns`` selects zero-based columns; for raw input it holds the
variable count (default 1).  Codec tokens: last_value, nlms, nlms_mv
(multivariate NLMS), ca, nn:<weight-file>.  Blank lines and lines
starting with '#' are skipped.

Every benchmark cell re-verifies the error bound on the decoded output
before it is reported; a violating cell aborts the whole run.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass

from .codec import CodecConfig, decode, encode
from .errors import BoundViolationError, DataFormatError
from .metrics import Metrics, compute_metrics, max_abs_error
from .series import TimeSeries, read_series

RESULT_COLUMNS = (
    "dataset",
    "codec",
    "epsilon",
    "n",
    "v",
    "compressed_bytes",
    "ratio",
    "max_abs_err",
    "mean_abs_err",
    "rmse",
    "encode_tps",
    "decode_tps",
)


@dataclass
class ManifestEntry:
    path: str
    fmt: str
    columns: list[int] | None
    vars: int
    eps_list: list[float]
    codecs: list[str]


@dataclass
class BenchRow:
    dataset: str
    codec: str
    epsilon: float
    metrics: Metrics


def parse_manifest(text: str) -> list[ManifestEntry]:
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise DataFormatError(f"manifest line {lineno}: expected 5 fields")
        path, fmt, cols, eps_s, codecs_s = (p.strip() for p in parts)
        if fmt not in ("raw", "csv"):
            raise DataFormatError(f"manifest line {lineno}: unknown format {fmt!r}")
        columns = None
        nvars = 1
        if cols:
            if fmt == "csv":
                columns = [int(c) for c in cols.split(";")]
            else:
                nvars = int(cols)
        eps_list = [float(e) for e in eps_s.split(";") if e]
        codecs = [c for c in codecs_s.split(";") if c]
        if not eps_list or not codecs:
            raise DataFormatError(f"manifest line {lineno}: empty eps or codec list")
        entries.append(ManifestEntry(path, fmt, columns, nvars, eps_list, codecs))
    return entries


def config_for_token(token: str, epsilon: float, window_k: int = 32) -> CodecConfig:
    if token.startswith("nn:"):
        return CodecConfig(
            epsilon, window_k=window_k, predictor="nn", nn_weight_path=token[3:]
        )
    if token == "nlms_mv":
        return CodecConfig(epsilon, window_k=window_k, predictor="nlms", multivariate=True)
    if token in ("last_value", "nlms", "ca"):
        return CodecConfig(epsilon, window_k=window_k, predictor=token)
    raise DataFormatError(f"unknown codec token {token!r}")


def run_cell(series: TimeSeries, config: CodecConfig, dataset: str, codec: str) -> BenchRow:
    t0 = time.perf_counter()
    blob = encode(series, config)
    t1 = time.perf_counter()
    recon = decode(blob)
    t2 = time.perf_counter()
    worst = max_abs_error(series, recon)
    if worst > config.epsilon:
        raise BoundViolationError(
            f"{dataset}/{codec}/eps={config.epsilon}: max error {worst} "
            f"exceeds bound"
        )
    n = max(series.n, 1)
    m = compute_metrics(
        series,
        recon,
        len(blob),
        encode_tps=n / max(t1 - t0, 1e-12),
        decode_tps=n / max(t2 - t1, 1e-12),
    )
    return BenchRow(dataset, codec, float(config.epsilon), m)


def bench_run(entries: list[ManifestEntry], window_k: int = 32) -> list[BenchRow]:
    rows = []
    for entry in entries:
        series = read_series(entry.path, entry.fmt, columns=entry.columns, v=entry.vars)
        for eps in entry.eps_list:
            for token in entry.codecs:
                config = config_for_token(token, eps, window_k)
                rows.append(run_cell(series, config, entry.path, token))
    return rows


def rows_to_csv(rows: list[BenchRow], include_timing: bool = True) -> str:
    cols = RESULT_COLUMNS if include_timing else RESULT_COLUMNS[:-2]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for r in rows:
        m = r.metrics
        vals = [
            r.dataset,
            r.codec,
            repr(r.epsilon),
            str(m.n),
            str(m.v),
            str(m.compressed_bytes),
            f"{m.ratio:.6f}",
            repr(m.max_abs_err),
            repr(m.mean_abs_err),
            repr(m.rmse),
        ]
        if include_timing:
            vals += [f"{m.encode_tps:.0f}", f"{m.decode_tps:.0f}"]
        buf.write(",".join(vals) + "\n")
    return buf.getvalue()
