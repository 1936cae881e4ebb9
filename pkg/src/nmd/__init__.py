"""Neural mode decomposition.

A time series is fitted by a Fourier neural network (a bank of
amplitude-modulated sinusoids plus a non-periodic residual network), and
the learned frequency units are grouped by energy into spectrally
separated intrinsic mode functions.
"""

from .errors import ClusteringError, DivergenceError, InputError, NMDError
from .signal import NormParams, Signal, denormalize, ingest_csv, normalize, synthesize

__version__ = "0.1.0"

__all__ = [
    "ClusteringError",
    "DivergenceError",
    "InputError",
    "NMDError",
    "NormParams",
    "Signal",
    "denormalize",
    "ingest_csv",
    "normalize",
    "synthesize",
]
