"""Energy-weighted frequency clustering of the trained sinusoid units.

Units are points on a frequency axis weighted by their energy. The
highest-energy units are chosen as primaries, neighbouring primaries are
merged into modes by a circle-overlap similarity, and the midpoints between
modes split the axis into bands. Every unit is then summed into the IMF of
the band its frequency falls in.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ClusteringError
from .fnn import FnnModel, forward, unit_energies


@dataclass(frozen=True)
class FrequencyPoint:
    unit_index: int
    frequency: float
    energy: float

    def __post_init__(self):
        if not self.energy >= 0:
            raise ClusteringError(f"unit {self.unit_index}: energy must be nonnegative")


@dataclass(frozen=True)
class ClusterConfig:
    energy_threshold: float = 0.95
    radius: float = 2.5
    merge_threshold: float = 0.8

    def __post_init__(self):
        if not 0 < self.energy_threshold < 1:
            raise ValueError("energy threshold P must lie in (0, 1)")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not 0 < self.merge_threshold <= 1:
            raise ValueError("merge threshold must lie in (0, 1]")


@dataclass(frozen=True)
class ModeCluster:
    members: tuple[FrequencyPoint, ...]

    @property
    def weight(self) -> float:
        return math.fsum(p.energy for p in self.members)

    @property
    def lo(self) -> float:
        return self.members[0].frequency

    @property
    def hi(self) -> float:
        return self.members[-1].frequency


def frequency_points(model: FnnModel, times) -> list[FrequencyPoint]:
    energies = unit_energies(model, times)
    freqs = model.bank.frequencies
    return [FrequencyPoint(i, float(f), float(e)) for i, (f, e) in enumerate(zip(freqs, energies))]


def _by_frequency(points) -> list[FrequencyPoint]:
    return sorted(points, key=lambda p: (p.frequency, p.unit_index))


def select_primary(points: Sequence[FrequencyPoint], energy_threshold: float) -> list[FrequencyPoint]:
    """Smallest top-energy set whose energy exceeds ``energy_threshold`` of the total.

    Ranking is by energy descending, ties broken by lower frequency and then
    lower unit index. The selection is returned sorted by frequency.
    """
    total = math.fsum(p.energy for p in points)
    if not total > 0:
        raise ClusteringError("all unit energies are zero; nothing to cluster")
    ranked = sorted(points, key=lambda p: (-p.energy, p.frequency, p.unit_index))
    target = energy_threshold * total
    chosen, partial = [], []
    for p in ranked:
        chosen.append(p)
        partial.append(p.energy)
        if math.fsum(partial) > target:
            break
    return _by_frequency(chosen)


def _in_circle(point: FrequencyPoint, centers: Sequence[FrequencyPoint], radius: float) -> bool:
    return any(abs(point.frequency - c.frequency) <= radius for c in centers)


def circle_similarity(cluster_i: ModeCluster, cluster_j: ModeCluster,
                      primaries: Sequence[FrequencyPoint], radius: float) -> tuple[float, float]:
    """Overlap shares (S_ij, S_ji) of the two clusters' circles.

    A cluster's circle is the union of closed radius intervals around its
    members; its weight is the energy of all primaries inside it.
    """
    in_i = [_in_circle(p, cluster_i.members, radius) for p in primaries]
    in_j = [_in_circle(p, cluster_j.members, radius) for p in primaries]
    w_i = math.fsum(p.energy for p, a in zip(primaries, in_i) if a)
    w_j = math.fsum(p.energy for p, b in zip(primaries, in_j) if b)
    if not (w_i > 0 and w_j > 0):
        raise ClusteringError("circle with zero primary weight")
    overlap = math.fsum(p.energy for p, a, b in zip(primaries, in_i, in_j) if a and b)
    return overlap / w_i, overlap / w_j


def merge_clusters(primaries: Sequence[FrequencyPoint],
                   config: ClusterConfig = ClusterConfig()) -> list[ModeCluster]:
    """Single left-to-right pass merging each primary into the running mode
    when either overlap share exceeds the merge threshold."""
    primaries = list(primaries)
    if not primaries:
        raise ClusteringError("no primary components to merge")
    clusters: list[ModeCluster] = []
    current = [primaries[0]]
    for p in primaries[1:]:
        s_ij, s_ji = circle_similarity(ModeCluster(tuple(current)), ModeCluster((p,)),
                                       primaries, config.radius)
        if max(s_ij, s_ji) > config.merge_threshold:
            current.append(p)
        else:
            clusters.append(ModeCluster(tuple(current)))
            current = [p]
    clusters.append(ModeCluster(tuple(current)))
    return clusters


def division_points(clusters: Sequence[ModeCluster], nyquist: float) -> np.ndarray:
    """Band edges: 0, midpoints between adjacent modes, and ``nyquist``."""
    edges = [0.0]
    edges += [(a.hi + b.lo) / 2 for a, b in zip(clusters, clusters[1:])]
    edges.append(float(nyquist))
    edges = np.array(edges)
    if np.any(np.diff(edges) <= 0):
        raise ClusteringError(f"band edges are not strictly increasing: {edges.tolist()}")
    return edges


def band_of(frequencies, edges) -> np.ndarray:
    """Index of the band [edges[b], edges[b+1]) holding each frequency.

    The outer bands are open-ended, so frequencies beyond the last edge
    (fine-tuned past Nyquist) land in the last band.
    """
    return np.searchsorted(np.asarray(edges)[1:-1], frequencies, side="right")


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """IMFs ordered high frequency first, plus the residual series.

    ``unit_bands`` lists the unit indices summed into each IMF, and
    ``bands`` the matching [lo, hi) frequency interval.
    """

    times: np.ndarray
    imfs: np.ndarray
    residual: np.ndarray
    edges: np.ndarray
    bands: list[tuple[float, float]]
    unit_bands: list[np.ndarray]
    dominant_frequencies: np.ndarray

    @property
    def reconstruction(self) -> np.ndarray:
        return self.imfs.sum(axis=0) + self.residual

    @property
    def components(self) -> np.ndarray:
        """IMFs and residual stacked as (K+1, N)."""
        return np.vstack([self.imfs, self.residual[None, :]])


def assemble_imfs(model: FnnModel, times, edges, energies: np.ndarray | None = None) -> DecompositionResult:
    """Sum the AM units of each band into one IMF.

    ``energies`` (per unit) picks each IMF's dominant frequency; by default
    they are computed on ``times``. Empty bands are dropped with a warning.
    """
    edges = np.asarray(edges, dtype=float)
    series = forward(model, times)
    if energies is None:
        energies = np.mean(series.amplitudes**2, axis=1)
    freqs = model.bank.frequencies
    band = band_of(freqs, edges)

    imfs, bands, members, dominant = [], [], [], []
    for b in range(edges.size - 2, -1, -1):
        idx = np.flatnonzero(band == b)
        if idx.size == 0:
            warnings.warn(f"band [{edges[b]:g}, {edges[b + 1]:g}) holds no units; dropped",
                          stacklevel=2)
            continue
        imfs.append(series.am_signals[idx].sum(axis=0))
        bands.append((float(edges[b]), float(edges[b + 1])))
        members.append(idx)
        dominant.append(float(freqs[idx[np.argmax(energies[idx])]]))
    n = series.times.size
    return DecompositionResult(
        series.times,
        np.array(imfs) if imfs else np.zeros((0, n)),
        series.residual,
        edges,
        bands,
        members,
        np.array(dominant),
    )
