import numpy as np
import pytest

from lfzr import CodecConfig, CorruptContainerError, TimeSeries, decode, encode
from lfzr.ca import ca_compress, ca_decompress


def reference_interpolate(indices, values, n):
    """Independent float64 linear interpolation, rounded to float32."""
    out = np.empty(n, np.float32)
    for p in range(len(indices) - 1):
        i1, i2 = int(indices[p]), int(indices[p + 1])
        v1, v2 = float(values[p]), float(values[p + 1])
        out[i1] = values[p]
        for s in range(i1 + 1, i2):
            out[s] = np.float32(v1 + (v2 - v1) * ((s - i1) / (i2 - i1)))
    out[int(indices[-1])] = values[-1]
    return out


def brute_force_minimal(x, eps):
    """Is any single retained interior point removable without breaking
    the bound?  Used as the minimality oracle."""
    indices, values = ca_compress(x, eps)
    n = x.size
    for drop in range(1, len(indices) - 1):
        sub_i = np.delete(indices, drop)
        sub_v = np.delete(values, drop)
        try:
            recon = ca_decompress(sub_i, sub_v, n)
        except CorruptContainerError:
            continue
        fin = np.isfinite(x)
        if not np.array_equal(
            x[~fin].view(np.uint32), recon[~fin].view(np.uint32)
        ):
            continue
        if np.all(
            np.abs(recon[fin].astype(np.float64) - x[fin].astype(np.float64)) <= eps
        ):
            return False  # point `drop` was redundant
    return True


def test_straight_line_keeps_two_points():
    x = np.linspace(0.0, 10.0, 1000).astype(np.float32)
    indices, values = ca_compress(x, 1e-2)
    assert list(indices) == [0, 999]
    recon = ca_decompress(indices, values, 1000)
    assert np.max(np.abs(recon.astype(np.float64) - x.astype(np.float64))) <= 1e-2


def test_square_wave_keeps_everything():
    eps = 0.1
    x = (2 * eps * (np.arange(200) % 2)).astype(np.float32)
    indices, _ = ca_compress(x, eps)
    assert indices.size == 200  # no point is within eps of its neighbours' line


def test_midpoint_interpolation_example():
    indices = np.array([0, 10], np.int64)
    values = np.array([0.0, 1.0], np.float32)
    recon = ca_decompress(indices, values, 11)
    assert recon[5] == np.float32(0.5)
    assert recon[0] == 0.0 and recon[10] == 1.0


def test_single_point_and_empty():
    i, v = ca_compress(np.array([4.5], np.float32), 1e-3)
    assert list(i) == [0] and v[0] == np.float32(4.5)
    assert np.array_equal(ca_decompress(i, v, 1), np.array([4.5], np.float32))
    i, v = ca_compress(np.zeros(0, np.float32), 1e-3)
    assert i.size == 0
    assert ca_decompress(i, v, 0).size == 0


def test_interpolation_matches_reference(rng):
    for _ in range(50):
        n = int(rng.integers(2, 60))
        k = int(rng.integers(2, n + 1))
        idx = np.sort(rng.choice(n, k, replace=False)).astype(np.int64)
        idx[0], idx[-1] = 0, n - 1
        idx = np.unique(idx)
        vals = rng.normal(0, 5, idx.size).astype(np.float32)
        got = ca_decompress(idx, vals, n)
        assert np.array_equal(
            got.view(np.uint32), reference_interpolate(idx, vals, n).view(np.uint32)
        )


def test_fuzz_roundtrip_bound(rng):
    for _ in range(300):
        n = int(rng.integers(1, 300))
        x = np.cumsum(rng.normal(0, 1.0, n)).astype(np.float32)
        for eps in (1e-2, 0.5, 5.0):
            indices, values = ca_compress(x, eps)
            recon = ca_decompress(indices, values, n)
            assert np.max(
                np.abs(recon.astype(np.float64) - x.astype(np.float64))
            ) <= eps
            assert np.array_equal(recon[indices], x[indices])  # exact at kept points


def test_minimality_small_instances(rng):
    for _ in range(100):
        n = int(rng.integers(3, 50))
        x = np.cumsum(rng.normal(0, 1.0, n)).astype(np.float32)
        assert brute_force_minimal(x, 0.8)


def test_nonfinite_breaks_segments():
    x = np.array([0.0, 1.0, 2.0, np.nan, 4.0, 5.0, 6.0], np.float32)
    indices, values = ca_compress(x, 0.5)
    # the NaN and both neighbours are retained; no segment spans the NaN
    assert {2, 3, 4}.issubset(set(indices.tolist()))
    recon = ca_decompress(indices, values, x.size)
    assert np.isnan(recon[3])
    fin = np.isfinite(x)
    assert np.max(np.abs(recon[fin] - x[fin])) <= 0.5


def test_decompress_validation():
    with pytest.raises(CorruptContainerError):
        ca_decompress(np.array([0, 5], np.int64), np.zeros(3, np.float32), 6)
    with pytest.raises(CorruptContainerError):
        ca_decompress(np.array([1, 5], np.int64), np.zeros(2, np.float32), 6)
    with pytest.raises(CorruptContainerError):
        ca_decompress(np.array([0, 4], np.int64), np.zeros(2, np.float32), 6)
    with pytest.raises(CorruptContainerError):
        ca_decompress(np.array([0, 3, 3, 5], np.int64), np.zeros(4, np.float32), 6)
    with pytest.raises(CorruptContainerError):
        ca_decompress(np.array([0], np.int64), np.zeros(1, np.float32), 0)


def test_ca_through_container(rng):
    # steps well inside the corridor width so long segments form
    x = np.cumsum(rng.normal(0, 0.002, 5000)).astype(np.float32)
    x[1234] = np.inf
    s = TimeSeries(x)
    blob = encode(s, CodecConfig(epsilon=1e-2, predictor="ca"))
    recon = decode(blob)
    fin = np.isfinite(x)
    assert np.max(np.abs(recon.column(0)[fin] - x[fin])) <= 1e-2
    assert np.isinf(recon.column(0)[1234])
    # smooth data: far fewer retained points than samples
    assert len(blob) < 2 * x.nbytes // 3
