"""End-to-end decomposition and its file exports."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .clustering import (ClusterConfig, DecompositionResult, FrequencyPoint, ModeCluster,
                         assemble_imfs, division_points, frequency_points, merge_clusters,
                         select_primary)
from .errors import InputError
from .fnn import DEFAULT_HIDDEN_AMP, DEFAULT_HIDDEN_RES, DEFAULT_UNIT_CAP, FnnModel, init_model
from .metrics import MetricsReport, evaluate
from .signal import NormParams, Signal, normalize, write_columns_csv
from .trainer import TrainConfig, TrainReport, train


@dataclass(frozen=True)
class DecomposeConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    hidden_amp: int = DEFAULT_HIDDEN_AMP
    hidden_res: int = DEFAULT_HIDDEN_RES
    unit_cap: int = DEFAULT_UNIT_CAP


@dataclass(frozen=True)
class Clustering:
    points: list[FrequencyPoint]
    primaries: list[FrequencyPoint]
    clusters: list[ModeCluster]
    result: DecompositionResult


def cluster_model(model: FnnModel, times, config: ClusterConfig, nyquist: float) -> Clustering:
    """Group the units of a trained model into IMFs on the grid ``times``."""
    points = frequency_points(model, times)
    primaries = select_primary(points, config.energy_threshold)
    clusters = merge_clusters(primaries, config)
    edges = division_points(clusters, nyquist)
    energies = np.array([p.energy for p in points])
    return Clustering(points, primaries, clusters, assemble_imfs(model, times, edges, energies))


@dataclass(eq=False)
class Decomposition:
    """A finished run. ``imfs``/``residual`` are in the original value units."""

    signal: Signal
    normalized: Signal
    norm: NormParams
    model: FnnModel
    report: TrainReport
    clustering: Clustering
    metrics: MetricsReport

    @property
    def result(self) -> DecompositionResult:
        return self.clustering.result

    @property
    def imfs(self) -> np.ndarray:
        return self.result.imfs * self.norm.x_scale

    @property
    def residual(self) -> np.ndarray:
        return self.result.residual * self.norm.x_scale + self.norm.x_min

    @property
    def components(self) -> np.ndarray:
        return np.vstack([self.imfs, self.residual[None, :]])

    @property
    def reconstruction(self) -> np.ndarray:
        return self.components.sum(axis=0)


def nyquist_for(n: int) -> float:
    return n / 2


def recluster(run: Decomposition, config: ClusterConfig) -> Decomposition:
    """Re-run only the clustering stage of ``run`` with new settings."""
    clustering = cluster_model(run.model, run.normalized.times, config, nyquist_for(len(run.signal)))
    return _finish(run.signal, run.normalized, run.norm, run.model, run.report, clustering)


def _finish(signal, normalized, norm, model, report, clustering) -> Decomposition:
    result = clustering.result
    components = np.vstack([result.imfs * norm.x_scale,
                            (result.residual * norm.x_scale + norm.x_min)[None, :]])
    metrics = evaluate(components, signal.values, result.dominant_frequencies)
    return Decomposition(signal, normalized, norm, model, report, clustering, metrics)


def decompose(signal: Signal, config: DecomposeConfig = DecomposeConfig(),
              model: FnnModel | None = None, backend=None) -> Decomposition:
    """Normalize, fit the network, cluster its units and score the result.

    ``model`` overrides the freshly initialized network (e.g. a loaded
    checkpoint or an exact-reconstruction model).
    """
    normalized, norm = normalize(signal)
    n = len(signal)
    if model is None:
        model = init_model(n, (config.hidden_amp, config.hidden_res), config.unit_cap,
                           config.train.seed)
    else:
        model = model.copy()
    model.norm = norm
    trained, report = train(model, normalized, config.train, backend=backend)
    trained.norm = norm
    clustering = cluster_model(trained, normalized.times, config.cluster, nyquist_for(n))
    return _finish(signal, normalized, norm, trained, report, clustering)


# ----------------------------------------------------------------------------
# Exports


def decomposition_header(k: int) -> list[str]:
    return ["t"] + [f"imf{i + 1}" for i in range(k)] + ["residual", "reconstruction", "original"]


def write_decomposition_csv(path, run: Decomposition) -> None:
    imfs = run.imfs
    columns = [run.signal.times, *imfs, run.residual, run.reconstruction, run.signal.values]
    write_columns_csv(path, decomposition_header(imfs.shape[0]), columns)


def decomposition_metadata(run: Decomposition, config: DecomposeConfig | None = None) -> dict:
    result = run.result
    meta = {
        "imf_count": int(result.imfs.shape[0]),
        "order": "high frequency first",
        "frequency_unit": "cycles per normalized time span",
        "band_edges": result.edges.tolist(),
        "bands": [list(b) for b in result.bands],
        "dominant_frequencies": result.dominant_frequencies.tolist(),
        "units_per_imf": [idx.tolist() for idx in result.unit_bands],
        "primaries": [asdict(p) for p in run.clustering.primaries],
        "clusters": [[p.unit_index for p in c.members] for c in run.clustering.clusters],
        "norm": run.norm.to_dict(),
        "training": {
            "epochs_run": run.report.epochs_run,
            "stopped_early": run.report.stopped_early,
            "final_loss": run.report.final_loss,
        },
    }
    if config is not None:
        meta["config"] = {
            "train": asdict(config.train),
            "cluster": asdict(config.cluster),
            "hidden_amp": config.hidden_amp,
            "hidden_res": config.hidden_res,
            "unit_cap": config.unit_cap,
        }
    return meta


def write_metadata(path, meta: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)


@dataclass(frozen=True, eq=False)
class DecompositionTable:
    times: np.ndarray
    imfs: np.ndarray
    residual: np.ndarray
    reconstruction: np.ndarray
    original: np.ndarray

    @property
    def components(self) -> np.ndarray:
        return np.vstack([self.imfs, self.residual[None, :]])


def read_decomposition_csv(path) -> DecompositionTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    k = sum(1 for h in header if h.startswith("imf"))
    if header != decomposition_header(k):
        raise InputError(f"{path}: not a decomposition table (header {header})")
    try:
        data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InputError(f"{path}: ragged rows")
    return DecompositionTable(data[:, 0], data[:, 1:1 + k].T, data[:, 1 + k],
                              data[:, 2 + k], data[:, 3 + k])
