"""Sampled time series, min-max normalization, CSV ingestion and test signals."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

import numpy as np

from .errors import InputError

MIN_SAMPLES = 4
MIN_SYNTH_SAMPLES = 16


class CsvFormatError(InputError):
    """A CSV row could not be parsed; ``row`` is the 1-based line number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True, eq=False)
class Signal:
    """A real time series sampled at strictly increasing instants."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if times.shape != values.shape:
            raise InputError(
                f"times and values differ in length ({times.size} != {values.size})"
            )
        if times.size < MIN_SAMPLES:
            raise InputError(f"need at least {MIN_SAMPLES} samples, got {times.size}")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise InputError("signal contains non-finite samples")
        if np.any(np.diff(times) <= 0):
            bad = int(np.argmax(np.diff(times) <= 0)) + 1
            raise InputError(f"times are not strictly increasing at sample {bad}")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class NormParams:
    """Affine maps taking the original time and value ranges onto [0, 1]."""

    t_min: float
    t_max: float
    x_min: float
    x_max: float

    def __post_init__(self):
        for name in ("t_min", "t_max", "x_min", "x_max"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise InputError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not self.t_max > self.t_min:
            raise InputError("t_max must exceed t_min")
        if not self.x_max > self.x_min:
            raise InputError("x_max must exceed x_min")

    @classmethod
    def identity(cls) -> "NormParams":
        return cls(0.0, 1.0, 0.0, 1.0)

    @property
    def t_scale(self) -> float:
        return self.t_max - self.t_min

    @property
    def x_scale(self) -> float:
        return self.x_max - self.x_min

    def normalize_times(self, times) -> np.ndarray:
        return (np.asarray(times, dtype=float) - self.t_min) / self.t_scale

    def denormalize_times(self, times) -> np.ndarray:
        return np.asarray(times, dtype=float) * self.t_scale + self.t_min

    def to_dict(self) -> dict:
        return {"t_min": self.t_min, "t_max": self.t_max,
                "x_min": self.x_min, "x_max": self.x_max}


def normalize(signal: Signal) -> tuple[Signal, NormParams]:
    """Map times and values of ``signal`` affinely onto [0, 1].

    A constant series cannot be normalized and raises :class:`InputError`.
    """
    x_min, x_max = float(signal.values.min()), float(signal.values.max())
    if x_max == x_min:
        raise InputError("constant series cannot be decomposed")
    params = NormParams(float(signal.times[0]), float(signal.times[-1]), x_min, x_max)
    values = (signal.values - x_min) / params.x_scale
    return Signal(params.normalize_times(signal.times), values), params


def denormalize(series, params: NormParams) -> np.ndarray:
    """Inverse of the value map recorded in ``params``."""
    return np.asarray(series, dtype=float) * params.x_scale + params.x_min


def denormalize_signal(signal: Signal, params: NormParams) -> Signal:
    return Signal(params.denormalize_times(signal.times), denormalize(signal.values, params))


# ----------------------------------------------------------------------------
# CSV


def _parse_floats(cells: list[str]) -> list[float] | None:
    try:
        return [float(c) for c in cells]
    except ValueError:
        return None


def ingest_csv(stream: TextIO | str, layout: str | None = None) -> Signal:
    """Read a one- or two-column numeric CSV into a :class:`Signal`.

    Parameters
    ----------
    stream : text stream or str
        CSV text. A single leading header row is skipped when it does not
        parse as numbers.
    layout : {"value", "time-value", None}
        ``"value"`` reads a single column of values on implicit times
        0..N-1; ``"time-value"`` reads (time, value) pairs. ``None`` picks
        from the column count of the first data row.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    if layout not in (None, "value", "time-value"):
        raise ValueError(f"unknown layout {layout!r}")

    times: list[float] = []
    values: list[float] = []
    width = None
    for lineno, row in enumerate(csv.reader(stream), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        parsed = _parse_floats(cells)
        if parsed is None:
            if lineno == 1:
                continue
            raise CsvFormatError(lineno, f"non-numeric field in {row!r}")
        if width is None:
            width = len(parsed)
            if layout is None:
                layout = "time-value" if width == 2 else "value"
            expected = 2 if layout == "time-value" else 1
            if width != expected:
                raise CsvFormatError(lineno, f"expected {expected} columns, got {width}")
        elif len(parsed) != width:
            raise CsvFormatError(lineno, f"expected {width} columns, got {len(parsed)}")
        if layout == "time-value":
            times.append(parsed[0])
        values.append(parsed[-1])

    if len(values) < MIN_SAMPLES:
        raise InputError(f"need at least {MIN_SAMPLES} samples, got {len(values)}")
    if layout != "time-value":
        times = list(range(len(values)))
    return Signal(times, values)


def read_signal_csv(path, layout: str | None = None) -> Signal:
    with open(path, newline="", encoding="utf-8") as fh:
        return ingest_csv(fh, layout)


def write_columns_csv(path, header: Iterable[str], columns: Iterable[np.ndarray]) -> None:
    """Write equal-length columns with a header, floats at round-trip precision."""
    columns = [np.asarray(c) for c in columns]
    formats = [str if np.issubdtype(c.dtype, np.integer) else (lambda v: repr(float(v)))
               for c in columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in zip(*columns):
            writer.writerow([fmt(v) for fmt, v in zip(formats, row)])


def write_signal_csv(path, signal: Signal) -> None:
    write_columns_csv(path, ("t", "value"), (signal.times, signal.values))


# ----------------------------------------------------------------------------
# Test signals


def _x_lambda(t):
    return (4 * t**2 + np.cos(8 * np.pi * t) + 2 * np.cos(40 * np.pi * t)
            + np.cos(50 * np.pi * t + 20 * np.pi * t**2))


def _x_p(t):
    return np.cos(4 * np.pi * t) + np.cos(48 * np.pi * t) / 4 + np.cos(200 * np.pi * t) / 16


def _x1(t):
    t = np.asarray(t, dtype=float)
    switching = np.where(t <= 0.5, np.cos(60 * np.pi * t), np.cos(80 * np.pi * t - 10 * np.pi))
    return 6 * t**2 + np.cos(10 * np.pi * t + 10 * np.pi * t**2) + switching


def _x2(t):
    return (1 / (1.2 + np.cos(2 * np.pi * t))
            + np.cos(32 * np.pi * t + 0.2 * np.cos(64 * np.pi * t)) / (1.5 + np.sin(2 * np.pi * t)))


CLOSED_FORMS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "xlambda": _x_lambda,
    "xp": _x_p,
    "x1": _x1,
    "x2": _x2,
}


def closed_form(kind: str, t) -> np.ndarray:
    """Noise-free value of test signal ``kind`` at times ``t``."""
    try:
        fn = CLOSED_FORMS[kind.lower()]
    except KeyError:
        raise InputError(f"unknown signal {kind!r}; choose from {sorted(CLOSED_FORMS)}") from None
    return np.asarray(fn(np.asarray(t, dtype=float)), dtype=float)


def uniform_grid(n: int) -> np.ndarray:
    """Half-open grid i/n, i = 0..n-1, so frequency k spans exactly k cycles."""
    return np.arange(n, dtype=float) / n


def synthesize(kind: str, n: int, noise_sigma: float = 0.0, seed: int = 0) -> Signal:
    """Sample one of the test signals on the half-open unit grid.

    Additive noise is i.i.d. Gaussian drawn with numpy's PCG64 bit generator
    seeded by ``seed`` (``Generator.standard_normal``), so equal arguments
    give bit-identical output.
    """
    if n < MIN_SYNTH_SAMPLES:
        raise InputError(f"synthetic signals need n >= {MIN_SYNTH_SAMPLES}, got {n}")
    if noise_sigma < 0:
        raise InputError("noise_sigma must be nonnegative")
    t = uniform_grid(n)
    values = closed_form(kind, t)
    if noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        values = values + noise_sigma * rng.standard_normal(n)
    return Signal(t, values)
