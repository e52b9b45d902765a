"""lfzr: error-bounded lossy compression for floating-point time series.

The codec follows the prediction / quantization / entropy-coding
pipeline: a causal predictor (NLMS by default) guesses each sample from
past reconstructions, the residual is quantized with step twice the
error bound, and the quantized indices are entropy coded.  Every finite
sample is reconstructed within the user-specified maximum absolute
error; non-finite samples roundtrip bit-exactly through an outlier
side-channel.

>>> import numpy as np, lfzr
>>> x = lfzr.TimeSeries(np.cumsum(np.random.randn(10000)).astype(np.float32))
>>> blob = lfzr.encode(x, lfzr.CodecConfig(epsilon=1e-2))
>>> y = lfzr.decode(blob)
>>> np.max(np.abs(x.values - y.values)) <= 1e-2
True
"""

from .codec import (
    CodecConfig,
    ContainerHeader,
    decode,
    encode,
    encoder_state_digests,
    decoder_state_digests,
    read_header,
)
from .errors import (
    BoundViolationError,
    ConfigError,
    CorruptContainerError,
    DataFormatError,
    LfzrError,
)
from .metrics import Metrics, compute_metrics, max_abs_error
from .series import TimeSeries, read_series, write_raw

__version__ = "0.1.0"

__all__ = [
    "CodecConfig",
    "ContainerHeader",
    "TimeSeries",
    "Metrics",
    "encode",
    "decode",
    "read_header",
    "read_series",
    "write_raw",
    "compute_metrics",
    "max_abs_error",
    "encoder_state_digests",
    "decoder_state_digests",
    "LfzrError",
    "ConfigError",
    "CorruptContainerError",
    "BoundViolationError",
    "DataFormatError",
]
