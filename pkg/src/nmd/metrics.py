"""Decomposition quality metrics.

``components`` is always a (K+1, N) stack of the IMFs followed by the
residual.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError


def _stack(components) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(components, dtype=float))
    if arr.size == 0:
        raise InputError("no components given")
    return arr


def index_of_orthogonality(components, original) -> float:
    """Sum over ordered pairs i != j of sum_t u_i(t) u_j(t), over sum_t x(t)^2.

    Both orderings of each pair are counted, so a duplicated component
    gives 2 rather than 1.
    """
    u = _stack(components)
    x = np.asarray(original, dtype=float)
    denom = float(x @ x)
    if denom == 0:
        raise InputError("original series has zero energy")
    gram = u @ u.T
    off_diagonal = ~np.eye(gram.shape[0], dtype=bool)
    return float(gram[off_diagonal].sum()) / denom


def reconstruction_mae(components, original) -> float:
    u = _stack(components)
    return float(np.mean(np.abs(u.sum(axis=0) - np.asarray(original, dtype=float))))


def percentage_energy(components) -> np.ndarray:
    u = _stack(components)
    energy = np.einsum("kt,kt->k", u, u)
    total = energy.sum()
    if total == 0:
        raise InputError("all components are zero")
    return 100.0 * energy / total


def pearson_corr(component, original) -> float:
    a = np.asarray(component, dtype=float)
    b = np.asarray(original, dtype=float)
    if a.size < 2 or a.size != b.size:
        raise InputError("correlation needs two series of equal length >= 2")
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.sqrt(a @ a), np.sqrt(b @ b)
    if na == 0 or nb == 0:
        raise InputError("correlation is undefined for a constant series")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


@dataclass
class MetricsReport:
    io: float
    mae: float
    pe: list[float]
    corr: list[float | None]
    dominant_frequencies: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls(**json.loads(text))


def evaluate(components, original, dominant_frequencies=()) -> MetricsReport:
    """All metrics for one decomposition.

    A constant component (e.g. an all-zero IMF) has no defined correlation
    and reports ``None``.
    """
    u = _stack(components)
    corr = []
    for row in u:
        try:
            corr.append(pearson_corr(row, original))
        except InputError:
            corr.append(None)
    return MetricsReport(
        io=index_of_orthogonality(u, original),
        mae=reconstruction_mae(u, original),
        pe=percentage_energy(u).tolist(),
        corr=corr,
        dominant_frequencies=[float(f) for f in dominant_frequencies],
    )
