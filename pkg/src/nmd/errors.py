"""Exception hierarchy.

Each class carries the process exit status the command line maps it to.
"""


class NMDError(Exception):
    exit_status = 1


class InputError(NMDError, ValueError):
    """Malformed or degenerate input data."""

    exit_status = 3


class DivergenceError(NMDError, ArithmeticError):
    """Training produced a non-finite loss."""

    exit_status = 4

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"loss became non-finite ({loss!r}) at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


class ClusteringError(NMDError, ValueError):
    """Degenerate configuration in frequency clustering."""

    exit_status = 5


class CheckpointError(InputError):
    """Malformed or incompatible model checkpoint."""


class CheckpointVersionError(CheckpointError):
    pass
