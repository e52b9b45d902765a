import os

import numpy as np
import pytest
from hypothesis import settings

# JIT compilation on first call makes wall-clock deadlines meaningless
settings.register_profile("default", deadline=None)
settings.load_profile("default")

from lfzr import nn
from lfzr.series import read_csv, read_raw


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def build_test_net(k: int = 32, hidden: int = 8, seed: int = 3) -> nn.NnWeights:
    """Small deterministic net used wherever the NN path needs weights."""
    g = np.random.default_rng(seed)
    l1 = nn.Layer(
        g.normal(0, 0.05, (hidden, k)).astype(np.float32),
        g.normal(0, 0.05, hidden).astype(np.float32),
        activation=nn.ACT_RELU,
        gamma=np.ones(hidden, np.float32),
        beta=np.zeros(hidden, np.float32),
        running_mean=np.zeros(hidden, np.float32),
        running_var=np.ones(hidden, np.float32),
        bn_epsilon=1e-3,
    )
    l2 = nn.Layer(
        g.normal(0, 0.05, (1, hidden)).astype(np.float32),
        np.zeros(1, np.float32),
    )
    return nn.NnWeights([l1, l2])


@pytest.fixture(scope="session")
def nn_weights_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "test_net.nnw"
    nn.save_weights(path, build_test_net())
    return str(path)


SIGNAL_FAMILIES = ("walk", "sine", "jumps", "constant", "nonfinite")


def make_signal(family: str, n: int, g: np.random.Generator) -> np.ndarray:
    """Synthetic float32 test signals spanning smooth, jumpy, constant and
    non-finite-laced behaviour."""
    if family == "walk":
        x = np.cumsum(g.normal(0, 0.1, n))
    elif family == "sine":
        t = np.arange(n)
        x = np.sin(0.02 * t) + 0.3 * np.sin(0.11 * t) + g.normal(0, 1e-3, n)
    elif family == "jumps":
        x = np.cumsum(g.standard_t(2.0, n).clip(-50, 50))
    elif family == "constant":
        x = np.full(n, g.normal(0, 10.0))
    elif family == "nonfinite":
        x = np.cumsum(g.normal(0, 0.1, n))
        bad = g.random(n) < 0.05
        x[bad] = g.choice([np.nan, np.inf, -np.inf], bad.sum())
    else:
        raise ValueError(family)
    return x.astype(np.float32)


def dataset_series(name: str, v: int = 1):
    """Load an optional real-world benchmark dataset, or None.

    Looked up as <name>.f32 (raw little-endian float32) or <name>.csv in
    $LFZR_DATA_DIR (default ./data).  These files are not shipped; the
    dataset-trend tests skip when they are absent.
    """
    base = os.environ.get("LFZR_DATA_DIR", "data")
    raw = os.path.join(base, name + ".f32")
    if os.path.exists(raw):
        return read_raw(raw, v=v)
    csvf = os.path.join(base, name + ".csv")
    if os.path.exists(csvf):
        return read_csv(csvf)
    return None

