import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lfzr.entropy import (
    CODEC_RAW,
    CODEC_RC1,
    entropy_decode,
    entropy_encode,
    merge_planes,
    split_planes,
)
from lfzr.errors import CorruptContainerError


def roundtrip(plane, codec_id=CODEC_RC1):
    payload = entropy_encode(plane, codec_id)
    return entropy_decode(payload, plane.size, codec_id)


def test_roundtrip_examples(rng):
    for plane in (
        np.zeros(0, np.uint8),
        np.zeros(1, np.uint8),
        np.array([255], np.uint8),
        np.zeros(5000, np.uint8),
        np.arange(256, dtype=np.uint8),
        rng.integers(0, 256, 10000).astype(np.uint8),
    ):
        for cid in (CODEC_RAW, CODEC_RC1):
            assert np.array_equal(roundtrip(plane, cid), plane)


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=2000))
def test_roundtrip_property(data):
    plane = np.frombuffer(data, np.uint8)
    assert np.array_equal(roundtrip(plane), plane)


def test_constant_plane_compresses_hard():
    plane = np.full(100_000, 0x7F, np.uint8)
    payload = entropy_encode(plane, CODEC_RC1)
    # ~0.03 bits/symbol measured; anything under 1% of raw is fine here
    assert len(payload) < 1000
    assert np.array_equal(entropy_decode(payload, plane.size, CODEC_RC1), plane)


def test_incompressible_overhead_small(rng):
    plane = rng.integers(0, 256, 100_000).astype(np.uint8)
    payload = entropy_encode(plane, CODEC_RC1)
    assert len(payload) <= 1.02 * plane.size
    assert np.array_equal(entropy_decode(payload, plane.size, CODEC_RC1), plane)


def test_truncated_stream_raises(rng):
    plane = rng.integers(0, 256, 4096).astype(np.uint8)
    payload = entropy_encode(plane, CODEC_RC1)
    for cut in (0, 1, 3, len(payload) // 2, len(payload) - 1):
        with pytest.raises(CorruptContainerError):
            entropy_decode(payload[:cut], plane.size, CODEC_RC1)
    with pytest.raises(CorruptContainerError):
        entropy_decode(payload, plane.size + 1, CODEC_RC1)


def test_raw_codec_length_checked():
    with pytest.raises(CorruptContainerError):
        entropy_decode(b"\x00\x01", 3, CODEC_RAW)


def test_plane_split_zero_index():
    # signed index 0 -> raw 32767 = 0x7FFF -> both planes constant
    codes = np.full(16, 32767, np.uint16)
    low, high = split_planes(codes)
    assert np.all(low == 0xFF) and np.all(high == 0x7F)
    assert np.array_equal(merge_planes(low, high), codes)


@given(st.lists(st.integers(0, 65535), max_size=500))
def test_plane_split_roundtrip(vals):
    codes = np.array(vals, np.uint16)
    low, high = split_planes(codes)
    assert np.array_equal(merge_planes(low, high), codes)


def test_merge_planes_size_mismatch():
    with pytest.raises(CorruptContainerError):
        merge_planes(np.zeros(3, np.uint8), np.zeros(4, np.uint8))


def test_fuzz_roundtrip_many_streams(rng):
    # mixed lengths and skews, the shape of real index planes
    for _ in range(300):
        n = int(rng.integers(0, 300))
        kind = rng.integers(0, 3)
        if kind == 0:
            plane = rng.integers(0, 256, n).astype(np.uint8)
        elif kind == 1:
            plane = np.full(n, int(rng.integers(0, 256)), np.uint8)
        else:
            plane = (0x7F + rng.integers(-2, 3, n)).astype(np.uint8)
        assert np.array_equal(roundtrip(plane), plane)
