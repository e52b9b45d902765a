"""Time series container and file ingestion (raw float32 / CSV)."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError


@dataclass
class TimeSeries:
    """n timesteps x v variables of float32 samples.

    Non-finite values (NaN, +/-Inf) are allowed and must survive a
    compression roundtrip bit-exactly.
    """

    values: np.ndarray  # shape (n, v), dtype float32, C order

    def __post_init__(self):
        a = np.asarray(self.values)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise DataFormatError(f"expected 1-D or 2-D data, got ndim={a.ndim}")
        if a.shape[0] > 0 and a.shape[1] < 1:
            raise DataFormatError("at least one variable required")
        self.values = np.ascontiguousarray(a, dtype=np.float32)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def v(self) -> int:
        return max(self.values.shape[1], 1)

    def column(self, j: int) -> np.ndarray:
        return np.ascontiguousarray(self.values[:, j])

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return bitwise_equal(self.values, other.values)


def bitwise_equal(a: np.ndarray, b: np.ndarray) -> bool:
    """Bit-level equality; NaNs compare equal iff their payloads match."""
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.shape != b.shape:
        return False
    return bool(np.array_equal(a.view(np.uint32), b.view(np.uint32)))


def read_raw(path, v: int = 1) -> TimeSeries:
    """Read little-endian float32 samples, interleaved by variable."""
    raw = np.fromfile(path, dtype="<f4")
    if v < 1:
        raise DataFormatError("variable count must be >= 1")
    if raw.size % v != 0:
        raise DataFormatError(
            f"raw file holds {raw.size} floats, not divisible by v={v}"
        )
    return TimeSeries(raw.reshape(-1, v))


def write_raw(path, series: TimeSeries) -> None:
    series.values.astype("<f4", copy=False).tofile(path)


def read_csv(path, columns: list[int] | None = None) -> TimeSeries:
    """Read selected numeric columns from a CSV file.

    Missing or non-numeric cells are an error; no imputation.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec:
                continue
            cols = columns if columns is not None else range(len(rec))
            vals = []
            for c in cols:
                if c < 0 or c >= len(rec):
                    raise DataFormatError(f"line {lineno}: column {c} out of range")
                cell = rec[c].strip()
                if not cell:
                    raise DataFormatError(f"line {lineno}: empty cell in column {c}")
                try:
                    vals.append(float(cell))
                except ValueError as exc:
                    raise DataFormatError(
                        f"line {lineno}: non-numeric cell {cell!r}"
                    ) from exc
            rows.append(vals)
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise DataFormatError("inconsistent column count across rows")
    arr = np.array(rows, dtype=np.float32) if rows else np.zeros((0, 1), np.float32)
    return TimeSeries(arr)


def read_series(path, fmt: str = "raw", columns=None, v: int = 1) -> TimeSeries:
    if fmt == "raw":
        return read_raw(path, v=v)
    if fmt == "csv":
        return read_csv(path, columns=columns)
    raise DataFormatError(f"unknown format {fmt!r}")
