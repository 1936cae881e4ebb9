"""Full-batch training with Nesterov momentum."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .fnn import FnnModel, amp_param_mask, flatten, l1_penalty, loss_and_gradients
from .signal import Signal, write_columns_csv

log = logging.getLogger(__name__)

L1_MODES = ("proximal", "subgradient")


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings.

    ``l1_mode`` picks how the amplitude-net L1 term enters the update:
    ``"proximal"`` soft-thresholds the amplitude weights after each step
    (exact zeros, true sparsity), ``"subgradient"`` adds lam*sign(w) to the
    gradient.
    """

    learning_rate: float = 0.01
    momentum: float = 0.9
    max_epochs: int = 5000
    lam: float = 1e-3
    stop_rel_improvement: float = 1e-7
    stop_window: int = 100
    seed: int = 0
    l1_mode: str = "proximal"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be nonnegative")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.stop_rel_improvement < 0:
            raise ValueError("stop_rel_improvement must be nonnegative")
        if self.stop_window < 1:
            raise ValueError("stop_window must be positive")
        if self.l1_mode not in L1_MODES:
            raise ValueError(f"l1_mode must be one of {L1_MODES}")


@dataclass
class TrainReport:
    loss_history: list[float] = field(default_factory=list)
    epochs_run: int = 0
    stopped_early: bool = False
    final_loss: float = math.nan


def nesterov_step(params, velocity, grad, learning_rate: float, momentum: float):
    """One Nesterov update given the gradient taken at ``params + momentum*velocity``.

    Works on scalars, arrays, or dicts of arrays with matching keys.
    """
    if isinstance(params, dict):
        pairs = {k: nesterov_step(params[k], velocity[k], grad[k], learning_rate, momentum)
                 for k in params}
        return {k: p for k, (p, _) in pairs.items()}, {k: v for k, (_, v) in pairs.items()}
    new_velocity = momentum * velocity - learning_rate * grad
    return params + new_velocity, new_velocity


def soft_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def _objective(model: FnnModel, signal: Signal, lam: float, backend) -> float:
    loss, _ = loss_and_gradients(model, signal, lam, backend)
    return loss


def train(model: FnnModel, signal: Signal, config: TrainConfig = TrainConfig(),
          backend=None, progress=None) -> tuple[FnnModel, TrainReport]:
    """Fit ``model`` to a normalized ``signal``.

    Each epoch evaluates the loss and gradient at the look-ahead point
    ``params + momentum*velocity``; that loss is what ``loss_history``
    records. Training stops after ``max_epochs`` or once the best loss of
    the last ``stop_window`` epochs improves on the best loss before them
    by a relative amount below ``stop_rel_improvement``.

    Raises :class:`DivergenceError` when the loss turns non-finite.
    """
    report = TrainReport()
    if config.max_epochs == 0:
        report.final_loss = _objective(model, signal, config.lam, backend)
        return model.copy(), report

    lam, lr, mu = config.lam, config.learning_rate, config.momentum
    proximal = config.l1_mode == "proximal"
    grad_lam = 0.0 if proximal else lam
    mask = amp_param_mask(model)
    params = model.to_vector()
    velocity = np.zeros_like(params)
    prefix_best: list[float] = []

    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.max_epochs):
            lookahead = model.from_vector(params + mu * velocity)
            loss, grads = loss_and_gradients(lookahead, signal, grad_lam, backend)
            if proximal and lam > 0:
                loss += lam * l1_penalty(lookahead)
            if not math.isfinite(loss):
                raise DivergenceError(epoch, loss)
            new_params, velocity = nesterov_step(params, velocity, flatten(grads), lr, mu)
            if proximal and lam > 0:
                new_params[mask] = soft_threshold(new_params[mask], lr * lam)
                velocity = new_params - params
            params = new_params
            report.loss_history.append(loss)
            prefix_best.append(min(loss, prefix_best[-1]) if prefix_best else loss)
            if progress is not None:
                progress(epoch, loss)

            seen = len(report.loss_history)
            if seen > config.stop_window:
                before = prefix_best[seen - config.stop_window - 1]
                recent = min(report.loss_history[-config.stop_window:])
                scale = abs(before) if before != 0 else 1.0
                if (before - recent) / scale < config.stop_rel_improvement:
                    report.stopped_early = True
                    break

    if not np.all(np.isfinite(params)):
        raise DivergenceError(len(report.loss_history), math.nan)
    report.epochs_run = len(report.loss_history)
    trained = model.from_vector(params)
    report.final_loss = _objective(trained, signal, lam, backend)
    if not math.isfinite(report.final_loss):
        raise DivergenceError(report.epochs_run, report.final_loss)
    log.debug("trained %d epochs, final loss %.6g", report.epochs_run, report.final_loss)
    return trained, report


def write_history_csv(path, report: TrainReport) -> None:
    epochs = np.arange(len(report.loss_history))
    write_columns_csv(path, ("epoch", "loss"), (epochs, report.loss_history))
