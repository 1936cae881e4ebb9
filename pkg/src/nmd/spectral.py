"""Real-coefficient harmonic decomposition and magnitude spectra.

Frequencies are integer cycles over the record, i.e. over the half-open
unit window when samples sit at t_i = i/N.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InputError
from .signal import MIN_SAMPLES, write_columns_csv


@dataclass(frozen=True, eq=False)
class HarmonicBasis:
    """x(t) = constant + sum_k [s_k sin(2 pi k t) + c_k cos(2 pi k t)] (+ Nyquist term).

    ``nyquist_coef`` multiplies cos(pi N t) and is ``None`` for odd N.
    """

    n: int
    constant: float
    ks: np.ndarray
    sin_coef: np.ndarray
    cos_coef: np.ndarray
    nyquist_coef: float | None = None

    @property
    def energy(self) -> float:
        """Sum of squares of the series on its own grid (Parseval)."""
        e = self.constant**2 + 0.5 * float(np.sum(self.sin_coef**2 + self.cos_coef**2))
        if self.nyquist_coef is not None:
            e += self.nyquist_coef**2
        return e * self.n


def _check_length(values) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size < MIN_SAMPLES:
        raise InputError(f"need at least {MIN_SAMPLES} samples, got {values.size}")
    return values


def real_harmonic_decomposition(values) -> HarmonicBasis:
    """Group the conjugate-symmetric DFT bins of ``values`` into real sine/cosine pairs."""
    values = _check_length(values)
    n = values.size
    spectrum = np.fft.rfft(values)
    k_max = (n + 1) // 2 - 1
    ks = np.arange(1, k_max + 1)
    inner = spectrum[1:k_max + 1]
    # (X_k - X_{N-k}) j = -2 Im X_k and (X_k + X_{N-k}) = 2 Re X_k for real input.
    sin_coef = -2.0 * inner.imag / n
    cos_coef = 2.0 * inner.real / n
    nyquist = float(spectrum[n // 2].real / n) if n % 2 == 0 else None
    return HarmonicBasis(n, float(spectrum[0].real / n), ks, sin_coef, cos_coef, nyquist)


def reconstruct_from_basis(basis: HarmonicBasis, times) -> np.ndarray:
    """Evaluate the harmonic sum at arbitrary, possibly off-grid, times."""
    t = np.asarray(times, dtype=float).reshape(-1)
    out = np.full(t.shape, basis.constant)
    if basis.ks.size:
        phase = 2 * np.pi * np.outer(t, basis.ks)
        out += np.sin(phase) @ basis.sin_coef + np.cos(phase) @ basis.cos_coef
    if basis.nyquist_coef is not None:
        out += basis.nyquist_coef * np.cos(np.pi * basis.n * t)
    return out


class SpectrumRow(NamedTuple):
    frequency: float
    magnitude: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequency: np.ndarray
    magnitude: np.ndarray

    def __iter__(self) -> Iterator[SpectrumRow]:
        for f, m in zip(self.frequency, self.magnitude):
            yield SpectrumRow(float(f), float(m))

    def __len__(self) -> int:
        return self.frequency.size

    def peak(self, exclude_dc: bool = True) -> int:
        """Bin index of the largest magnitude."""
        start = 1 if exclude_dc and self.magnitude.size > 1 else 0
        return start + int(np.argmax(self.magnitude[start:]))


def magnitude_spectrum(values, zero_mean: bool = False) -> Spectrum:
    """One-sided amplitude spectrum, bins k = 0..floor(N/2).

    Interior bins are scaled by 2/N so a unit cosine reads 1; the DC bin
    and (for even N) the Nyquist bin by 1/N.
    """
    values = _check_length(values)
    if zero_mean:
        values = values - values.mean()
    n = values.size
    mag = np.abs(np.fft.rfft(values)) * (2.0 / n)
    mag[0] /= 2
    if n % 2 == 0:
        mag[-1] /= 2
    return Spectrum(np.arange(mag.size, dtype=float), mag)


def write_spectrum_csv(path, spectrum: Spectrum) -> None:
    write_columns_csv(path, ("frequency", "magnitude"), (spectrum.frequency, spectrum.magnitude))
