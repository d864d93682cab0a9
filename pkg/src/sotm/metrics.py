"""Quality and property measures of a trained SOTM.

Per-time values describe each slice; the aggregate of every measure is the
plain mean of its per-time sequence. Structural change only exists from the
second slice on, so its aggregate averages over T-1 values.
"""

from __future__ import annotations

import numpy as np

from .core import PanelDataset, QualityReport, SotmModel
from .trainer import neighborhood_matrix, sq_dists


def _per_slice(model: SotmModel, panel: PanelDataset):
    model.check_panel(panel)
    for t in range(model.T):
        X = panel.slice(t)
        yield t, X, model.arrays[t], sq_dists(X, model.arrays[t])


def quantization_error(model: SotmModel, panel: PanelDataset) -> tuple[float, np.ndarray]:
    qe_t = np.empty(model.T)
    for t, _, _, d2 in _per_slice(model, panel):
        qe_t[t] = np.sqrt(d2.min(axis=1)).mean()
    return float(qe_t.mean()), qe_t


def distortion(model: SotmModel, panel: PanelDataset,
               sigma: float | None = None) -> tuple[float, np.ndarray]:
    """Neighborhood-weighted squared distance, averaged over data and units.

    ``sigma`` defaults to the model's own radius.
    """
    sigma = model.sigma if sigma is None else float(sigma)
    H = neighborhood_matrix(model.M, sigma)
    dm_t = np.empty(model.T)
    for t, X, _, d2 in _per_slice(model, panel):
        c = np.argmin(d2, axis=1)
        # H is symmetric, so H[c] gives h_{i c(j)} as row j
        dm_t[t] = (H[c] * d2).sum() / (X.shape[0] * model.M)
    return float(dm_t.mean()), dm_t


def first_two_bmus(d2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest and second-nearest unit per row, ties to the lowest index."""
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, 0], order[:, 1]


def topographic_error(model: SotmModel, panel: PanelDataset) -> tuple[float, np.ndarray]:
    te_t = np.empty(model.T)
    for t, _, _, d2 in _per_slice(model, panel):
        c1, c2 = first_two_bmus(d2)
        te_t[t] = np.mean(np.abs(c1 - c2) > 1)
    return float(te_t.mean()), te_t


def topographic_events(model: SotmModel, panel: PanelDataset) -> list[list[tuple[int, int, int]]]:
    """Per time slice, ``(row, first_bmu, second_bmu)`` for every non-adjacent pair.

    Rows index into ``panel.slice(t)``.
    """
    events = []
    for _, _, _, d2 in _per_slice(model, panel):
        c1, c2 = first_two_bmus(d2)
        bad = np.flatnonzero(np.abs(c1 - c2) > 1)
        events.append([(int(j), int(c1[j]), int(c2[j])) for j in bad])
    return events


def structural_change(model: SotmModel) -> tuple[float, np.ndarray]:
    """Mean distance between same-index units of consecutive arrays.

    Returns ``(0.0, empty)`` for a single-slice model.
    """
    if model.T < 2:
        return 0.0, np.empty(0)
    step = np.diff(model.arrays, axis=0)
    sc_t = np.sqrt((step * step).sum(axis=2)).mean(axis=1)
    return float(sc_t.mean()), sc_t


def quality(model: SotmModel, panel: PanelDataset) -> QualityReport:
    qe, qe_t = quantization_error(model, panel)
    dm, dm_t = distortion(model, panel)
    te, te_t = topographic_error(model, panel)
    sc, sc_t = structural_change(model)
    return QualityReport(qe, dm, te, sc, qe_t, dm_t, te_t, sc_t, times=model.times)
