"""Fourier neural network: amplitude-modulated sinusoid bank plus residual net.

On normalized time t the network computes

    y(t) = sum_n a_n(t) * sin(omega_n t + phi_n) + r(t)

where a(t) (one output per unit) and r(t) are one-hidden-layer ReLU
networks of the scalar input t. The 1/N prefactor of the inverse DFT is
absorbed into the amplitudes, and the DC term lives in r(t).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .errors import CheckpointError, CheckpointVersionError, InputError
from .signal import MIN_SYNTH_SAMPLES, NormParams, Signal
from .spectral import real_harmonic_decomposition

DEFAULT_HIDDEN_AMP = 64
DEFAULT_HIDDEN_RES = 16
DEFAULT_UNIT_CAP = 512
INIT_EPS = 0.01

CHECKPOINT_FORMAT = "nmd-checkpoint"
CHECKPOINT_VERSION = 1

PARAM_NAMES = (
    "amp.w1", "amp.b1", "amp.w2", "amp.b2",
    "bank.omega", "bank.phi",
    "res.w1", "res.b1", "res.w2", "res.b2",
)
AMP_PARAMS = PARAM_NAMES[:4]

Gradients = dict  # parameter name -> array shaped like the parameter


@dataclass(eq=False)
class AmplitudeNet:
    w1: np.ndarray  # (Ha,) input weights
    b1: np.ndarray  # (Ha,)
    w2: np.ndarray  # (H, Ha)
    b2: np.ndarray  # (H,)


@dataclass(eq=False)
class FrequencyBank:
    omega: np.ndarray  # (H,) rad per unit normalized time
    phi: np.ndarray  # (H,)

    @property
    def frequencies(self) -> np.ndarray:
        """Cycles per unit normalized time, sign-free."""
        return np.abs(self.omega) / (2 * np.pi)


@dataclass(eq=False)
class ResidualNet:
    w1: np.ndarray  # (Hr,)
    b1: np.ndarray  # (Hr,)
    w2: np.ndarray  # (Hr,) the single output row
    b2: np.ndarray  # (1,)


@dataclass(eq=False)
class FnnModel:
    amplitude: AmplitudeNet
    bank: FrequencyBank
    residual: ResidualNet
    norm: NormParams | None = None
    seed: int | None = None

    @property
    def units(self) -> int:
        return self.bank.omega.size

    @property
    def hidden_amp(self) -> int:
        return self.amplitude.w1.size

    @property
    def hidden_res(self) -> int:
        return self.residual.w1.size

    def parameters(self) -> dict[str, np.ndarray]:
        a, b, r = self.amplitude, self.bank, self.residual
        return {
            "amp.w1": a.w1, "amp.b1": a.b1, "amp.w2": a.w2, "amp.b2": a.b2,
            "bank.omega": b.omega, "bank.phi": b.phi,
            "res.w1": r.w1, "res.b1": r.b1, "res.w2": r.w2, "res.b2": r.b2,
        }

    def with_parameters(self, params: Mapping[str, np.ndarray]) -> "FnnModel":
        """New model with ``params`` (copied) and this model's metadata."""
        p = {name: np.array(params[name], dtype=float) for name in PARAM_NAMES}
        for name, old in self.parameters().items():
            if p[name].shape != old.shape:
                raise ValueError(f"{name}: shape {p[name].shape} != {old.shape}")
        return FnnModel(
            AmplitudeNet(p["amp.w1"], p["amp.b1"], p["amp.w2"], p["amp.b2"]),
            FrequencyBank(p["bank.omega"], p["bank.phi"]),
            ResidualNet(p["res.w1"], p["res.b1"], p["res.w2"], p["res.b2"]),
            self.norm,
            self.seed,
        )

    def copy(self) -> "FnnModel":
        return self.with_parameters(self.parameters())

    def to_vector(self) -> np.ndarray:
        return flatten(self.parameters())

    def from_vector(self, vector: np.ndarray) -> "FnnModel":
        return self.with_parameters(unflatten(vector, self.parameters()))


def flatten(params: Mapping[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([np.ravel(params[name]) for name in PARAM_NAMES])


def unflatten(vector: np.ndarray, like: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    out, start = {}, 0
    for name in PARAM_NAMES:
        shape = np.shape(like[name])
        size = int(np.prod(shape))
        out[name] = np.asarray(vector[start:start + size], dtype=float).reshape(shape)
        start += size
    if start != len(vector):
        raise ValueError(f"vector has {len(vector)} entries, model needs {start}")
    return out


def amp_param_mask(model: FnnModel) -> np.ndarray:
    """Boolean mask over the flat parameter vector selecting amplitude-net entries."""
    return np.concatenate([
        np.full(np.size(arr), name in AMP_PARAMS) for name, arr in model.parameters().items()
    ])


def unit_count(n: int, unit_cap: int) -> int:
    return min(2 * (n // 2), unit_cap)


def dft_frequency_grid(units: int) -> tuple[np.ndarray, np.ndarray]:
    """Paired sine/cosine initialization: unit j has k = (j+2)//2 cycles and
    phase 0 (even j) or pi/2 (odd j)."""
    j = np.arange(units)
    omega = 2 * np.pi * ((j + 2) // 2).astype(float)
    phi = (j % 2) * (np.pi / 2)
    return omega, phi


def init_model(n: int, hidden: tuple[int, int] = (DEFAULT_HIDDEN_AMP, DEFAULT_HIDDEN_RES),
               unit_cap: int = DEFAULT_UNIT_CAP, seed: int = 0,
               eps: float = INIT_EPS) -> FnnModel:
    """Fresh network for an ``n``-sample series.

    The bank holds min(2*floor(n/2), unit_cap) units on the DFT frequency
    grid; amplitude and residual weights are uniform on [-eps, eps] from a
    PCG64 generator seeded with ``seed``.
    """
    if n < MIN_SYNTH_SAMPLES:
        raise InputError(f"need at least {MIN_SYNTH_SAMPLES} samples to build a model, got {n}")
    if unit_cap < 2:
        raise InputError(f"unit cap must be at least 2, got {unit_cap}")
    h_amp, h_res = (int(x) for x in hidden)
    if h_amp < 1 or h_res < 1:
        raise InputError("hidden sizes must be positive")
    units = unit_count(n, unit_cap)
    rng = np.random.Generator(np.random.PCG64(seed))

    def draw(*shape):
        return rng.uniform(-eps, eps, size=shape)

    amplitude = AmplitudeNet(draw(h_amp), draw(h_amp), draw(units, h_amp), draw(units))
    residual = ResidualNet(draw(h_res), draw(h_res), draw(h_res), draw(1))
    omega, phi = dft_frequency_grid(units)
    return FnnModel(amplitude, FrequencyBank(omega, phi), residual, None, seed)


# ----------------------------------------------------------------------------
# Evaluation


@dataclass(eq=False)
class _Pass:
    """Intermediates of one forward pass, samples along axis 0."""

    t: np.ndarray
    z_amp: np.ndarray
    h_amp: np.ndarray
    amp: np.ndarray
    sines: np.ndarray
    cosines: np.ndarray
    periodic: np.ndarray
    z_res: np.ndarray
    h_res: np.ndarray
    residual: np.ndarray

    @property
    def output(self) -> np.ndarray:
        return self.periodic + self.residual


def _evaluate(model: FnnModel, times, backend=None) -> _Pass:
    k = kernels.get_backend(backend)
    t = np.ascontiguousarray(times, dtype=float).reshape(-1)
    a, r = model.amplitude, model.residual
    z_amp = np.multiply.outer(t, a.w1) + a.b1
    h_amp = np.maximum(z_amp, 0.0)
    amp = np.ascontiguousarray(h_amp @ a.w2.T + a.b2)
    n, units = amp.shape
    sines = np.empty((n, units))
    cosines = np.empty((n, units))
    periodic = np.empty(n)
    k.bank_forward(t, amp, np.ascontiguousarray(model.bank.omega),
                   np.ascontiguousarray(model.bank.phi), sines, cosines, periodic)
    z_res = np.multiply.outer(t, r.w1) + r.b1
    h_res = np.maximum(z_res, 0.0)
    residual = h_res @ r.w2 + r.b2[0]
    return _Pass(t, z_amp, h_amp, amp, sines, cosines, periodic, z_res, h_res, residual)


@dataclass(frozen=True, eq=False)
class AmUnitSeries:
    """Per-unit series on a time grid; unit-major arrays are (H, N)."""

    times: np.ndarray
    amplitudes: np.ndarray
    am_signals: np.ndarray
    residual: np.ndarray
    output: np.ndarray


def forward(model: FnnModel, times, backend=None) -> AmUnitSeries:
    """Evaluate the network at arbitrary times (extrapolation allowed)."""
    p = _evaluate(model, times, backend)
    am = p.amp * p.sines
    return AmUnitSeries(p.t, p.amp.T, am.T, p.residual, p.output)


def predict(model: FnnModel, times, backend=None) -> np.ndarray:
    return _evaluate(model, times, backend).output


def l1_penalty(model: FnnModel) -> float:
    """Sum of absolute values of the amplitude-network parameters."""
    a = model.amplitude
    return float(sum(np.abs(x).sum() for x in (a.w1, a.b1, a.w2, a.b2)))


def loss_and_gradients(model: FnnModel, signal: Signal, lam: float = 0.0,
                       backend=None) -> tuple[float, Gradients]:
    """Mean squared error plus ``lam`` times the amplitude-net L1 norm, with
    exact gradients. Subgradients of ReLU and |x| at 0 are taken as 0."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    p = _evaluate(model, signal.times, backend)
    k = kernels.get_backend(backend)
    n = p.t.size
    err = p.output - signal.values
    loss = float(err @ err) / n
    g = (2.0 / n) * err

    d_amp = np.empty_like(p.amp)
    d_omega = np.empty(model.units)
    d_phi = np.empty(model.units)
    k.bank_backward(p.t, g, p.amp, p.sines, p.cosines, d_amp, d_omega, d_phi)

    a, r = model.amplitude, model.residual
    dz = (d_amp @ a.w2) * (p.z_amp > 0)
    grads = {
        "amp.w1": p.t @ dz,
        "amp.b1": dz.sum(axis=0),
        "amp.w2": d_amp.T @ p.h_amp,
        "amp.b2": d_amp.sum(axis=0),
        "bank.omega": d_omega,
        "bank.phi": d_phi,
    }
    dz_res = np.multiply.outer(g, r.w2) * (p.z_res > 0)
    grads.update({
        "res.w1": p.t @ dz_res,
        "res.b1": dz_res.sum(axis=0),
        "res.w2": g @ p.h_res,
        "res.b2": np.array([g.sum()]),
    })
    if lam > 0:
        loss += lam * l1_penalty(model)
        params = model.parameters()
        for name in AMP_PARAMS:
            grads[name] = grads[name] + lam * np.sign(params[name])
    return loss, grads


def unit_energies(model: FnnModel, times, backend=None) -> np.ndarray:
    """Mean squared amplitude of every unit over ``times``."""
    amp = _evaluate(model, times, backend).amp
    return np.mean(amp * amp, axis=0)


# ----------------------------------------------------------------------------
# Exact reconstruction


def _uniform_spacing(times: np.ndarray) -> float:
    n = times.size
    step = (times[-1] - times[0]) / (n - 1)
    expected = times[0] + step * np.arange(n)
    if np.max(np.abs(times - expected)) > 1e-9 * (times[-1] - times[0]):
        raise InputError("exact reconstruction needs uniformly spaced samples")
    return step


def load_dft_oracle(model: FnnModel, signal: Signal) -> FnnModel:
    """Configure ``model`` to reproduce ``signal`` exactly on its sample grid.

    Amplitudes become constants equal to the real harmonic coefficients,
    the residual net outputs the mean, and the bank is placed on the grid
    harmonics of the sampled window (unchanged for t_i = i/N).
    """
    n = len(signal)
    needed = 2 * (n // 2)
    if model.units < needed:
        raise InputError(
            f"model has {model.units} units but exact reconstruction of {n} samples needs "
            f"{needed}; raise the unit cap")
    times = signal.times
    step = _uniform_spacing(times)
    window = n * step
    if abs(window - 1.0) < 1e-12:
        window = 1.0
    basis = real_harmonic_decomposition(signal.values)

    b2 = np.zeros(model.units)
    b2[0:2 * basis.ks.size:2] = basis.sin_coef
    b2[1:2 * basis.ks.size:2] = basis.cos_coef
    if basis.nyquist_coef is not None:
        b2[n - 1] = basis.nyquist_coef

    omega0, phi0 = dft_frequency_grid(model.units)
    omega = omega0 / window
    phi = phi0 - omega * times[0] if times[0] != 0 else phi0

    a, r = model.amplitude, model.residual
    amplitude = AmplitudeNet(np.zeros_like(a.w1), np.zeros_like(a.b1), np.zeros_like(a.w2), b2)
    residual = ResidualNet(np.zeros_like(r.w1), np.zeros_like(r.b1), np.zeros_like(r.w2),
                           np.array([basis.constant]))
    return FnnModel(amplitude, FrequencyBank(omega, phi), residual, model.norm, model.seed)


# ----------------------------------------------------------------------------
# Extrapolation


def extrapolation_times(horizon: float, step: float) -> np.ndarray:
    """Normalized times 1 + step, 1 + 2*step, ... up to 1 + horizon."""
    if not horizon > 0 or not step > 0:
        raise InputError("horizon and step must be positive")
    count = int(math.floor(horizon / step + 1e-9))
    if count < 1:
        raise InputError("step exceeds horizon")
    return 1.0 + step * np.arange(1, count + 1)


def extrapolate(model: FnnModel, norm: NormParams, horizon: float, step: float,
                backend=None) -> Signal:
    """Run the network past the end of the training window.

    ``horizon`` and ``step`` are in normalized time, i.e. fractions of the
    training span; the result is returned in original units.
    """
    s = extrapolation_times(horizon, step)
    values = predict(model, s, backend) * norm.x_scale + norm.x_min
    return Signal(norm.denormalize_times(s), values)


# ----------------------------------------------------------------------------
# Checkpoints


def save_model(model: FnnModel, norm: NormParams | None = None,
               samples: int | None = None) -> str:
    """Serialize parameters and metadata to a JSON document.

    Floats are written with ``repr`` precision, so loading is lossless.
    ``samples`` records the training length so callers can recover the
    sampling step later.
    """
    norm = norm if norm is not None else model.norm
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "units": model.units,
        "hidden_amp": model.hidden_amp,
        "hidden_res": model.hidden_res,
        "seed": model.seed,
        "samples": samples,
        "norm": norm.to_dict() if norm is not None else None,
        "params": {
            name: {"shape": list(np.shape(arr)), "data": np.ravel(arr).tolist()}
            for name, arr in model.parameters().items()
        },
    }
    return json.dumps(doc, indent=1)


def load_model(document: str) -> tuple[FnnModel, NormParams | None]:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError("not an nmd checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {doc.get('version')!r}; expected {CHECKPOINT_VERSION}")
    try:
        units, h_amp, h_res = int(doc["units"]), int(doc["hidden_amp"]), int(doc["hidden_res"])
        shapes = {
            "amp.w1": (h_amp,), "amp.b1": (h_amp,), "amp.w2": (units, h_amp), "amp.b2": (units,),
            "bank.omega": (units,), "bank.phi": (units,),
            "res.w1": (h_res,), "res.b1": (h_res,), "res.w2": (h_res,), "res.b2": (1,),
        }
        params = {}
        for name, shape in shapes.items():
            entry = doc["params"][name]
            arr = np.array(entry["data"], dtype=float)
            if tuple(entry["shape"]) != shape or arr.size != int(np.prod(shape)):
                raise CheckpointError(f"{name}: expected shape {shape}")
            params[name] = arr.reshape(shape)
        norm = NormParams(**doc["norm"]) if doc.get("norm") is not None else None
        seed = doc.get("seed")
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc!r}") from None
    template = FnnModel(
        AmplitudeNet(params["amp.w1"], params["amp.b1"], params["amp.w2"], params["amp.b2"]),
        FrequencyBank(params["bank.omega"], params["bank.phi"]),
        ResidualNet(params["res.w1"], params["res.b1"], params["res.w2"], params["res.b2"]),
        norm, seed,
    )
    return template, norm


def write_checkpoint(path, model: FnnModel, norm: NormParams | None = None,
                     samples: int | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_model(model, norm, samples))


def read_checkpoint(path) -> tuple[FnnModel, NormParams | None]:
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())
