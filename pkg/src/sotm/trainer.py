"""SOTM training: PCA initialization, batch updates and the time loop.

Each time slice gets its own one-dimensional array of M units. The first
array starts from the data's first principal component and is trained to
convergence; every later array starts as a copy of its trained predecessor
and gets a fixed number of batch cycles on its own slice. The Gaussian
neighborhood radius stays the same for every slice.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .config import TrainConfig
from .core import PanelDataset, QualityReport, Scaler, SotmModel, standardize
from .errors import DegenerateSlice, DimensionMismatch, EmptySlice, SotmError

__all__ = [
    "TrainConfig",
    "pca_init",
    "find_bmu",
    "find_bmus",
    "neighborhood_weight",
    "neighborhood_matrix",
    "batch_cycle",
    "train_slice",
    "train_sotm",
    "fit_sotm",
    "train_pooled_baseline",
    "sigma_sweep",
    "select_sigma",
]

log = logging.getLogger(__name__)


def sq_dists(X: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (len(X), len(A))."""
    diff = X[:, None, :] - A[None, :, :]
    return np.einsum("nmd,nmd->nm", diff, diff)


def _as_array(array) -> np.ndarray:
    A = np.asarray(array, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1:
        raise DimensionMismatch(f"array of units must be (M, D), got shape {A.shape}")
    return A


def _as_slice(slice_, D: int) -> np.ndarray:
    X = np.asarray(slice_, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if D == 1 else X.reshape(1, -1)
    if X.shape[0] == 0:
        raise EmptySlice()
    if X.shape[1] != D:
        raise DimensionMismatch(f"data have {X.shape[1]} components, units have {D}")
    return X


def pca_init(slice_, M: int) -> np.ndarray:
    """Place M units evenly along the first principal component of ``slice_``.

    Units sit at ``mean + s_i * v`` with ``s_i`` linearly spaced over
    [-2*lam, 2*lam], where ``v`` is the unit-norm leading eigenvector of the
    covariance and ``lam`` the (population) std of the projections onto it.
    The sign of ``v`` is fixed so that its largest-magnitude loading is
    positive.
    """
    X = np.asarray(slice_, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if M < 2:
        raise SotmError("M must be >= 2")
    if X.shape[0] < 2 or np.all(X == X[0]):
        raise DegenerateSlice("cannot initialize from a slice without two distinct vectors")
    mu = X.mean(axis=0)
    Xc = X - mu
    cov = Xc.T @ Xc / X.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    v = evecs[:, -1]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    lam = float(np.std(Xc @ v))
    if not lam > 0:
        raise DegenerateSlice("slice has zero variance along its first principal component")
    scores = np.linspace(-2.0 * lam, 2.0 * lam, M)
    return mu + scores[:, None] * v[None, :]


def find_bmus(X, array) -> tuple[np.ndarray, np.ndarray]:
    """Best-matching unit index and distance for every row of ``X``.

    Ties go to the lowest unit index.
    """
    A = _as_array(array)
    X = _as_slice(X, A.shape[1])
    d2 = sq_dists(X, A)
    idx = np.argmin(d2, axis=1)
    return idx, np.sqrt(d2[np.arange(len(idx)), idx])


def find_bmu(x, array) -> tuple[int, float]:
    A = _as_array(array)
    x = np.asarray(x, dtype=float).reshape(1, -1)
    idx, dist = find_bmus(x, A)
    return int(idx[0]), float(dist[0])


def neighborhood_weight(i: int, c: int, sigma: float) -> float:
    return float(np.exp(-((i - c) ** 2) / (2.0 * sigma * sigma)))


def neighborhood_matrix(M: int, sigma: float) -> np.ndarray:
    """h[i, c] for unit positions 0..M-1 on the vertical axis."""
    pos = np.arange(M, dtype=float)
    return np.exp(-((pos[:, None] - pos[None, :]) ** 2) / (2.0 * sigma * sigma))


def batch_cycle(array, slice_, sigma: float) -> np.ndarray:
    """One batch update: every unit moves to its neighborhood-weighted centroid.

    BMUs are taken from the input array before anything moves. Per-unit
    weights are rescaled by their largest value before the quotient, which
    leaves the result unchanged but keeps the denominator away from underflow
    at very small ``sigma``.
    """
    A = _as_array(array)
    X = _as_slice(slice_, A.shape[1])
    M = A.shape[0]
    bmu, _ = find_bmus(X, A)

    counts = np.bincount(bmu, minlength=M)
    hit = np.flatnonzero(counts)
    sums = np.zeros((M, A.shape[1]))
    np.add.at(sums, bmu, X)

    pos = np.arange(M, dtype=float)
    d2 = (pos[:, None] - pos[None, hit]) ** 2
    d2 -= d2.min(axis=1, keepdims=True)
    W = np.exp(-d2 / (2.0 * sigma * sigma))
    num = (W[:, :, None] * sums[None, hit, :]).sum(axis=1)
    den = (W * counts[None, hit]).sum(axis=1)
    return num / den[:, None]


def train_slice(init_array, slice_, sigma: float, cycles: int, tol: float = 0.0,
                trace: list | None = None) -> np.ndarray:
    """Run up to ``cycles`` batch cycles, stopping once the largest
    per-component move drops below ``tol``.

    Displacements are appended to ``trace`` when given.
    """
    A = np.array(_as_array(init_array), dtype=float, copy=True)
    X = _as_slice(slice_, A.shape[1])
    for _ in range(cycles):
        new = batch_cycle(A, X, sigma)
        disp = float(np.max(np.abs(new - A)))
        A = new
        if trace is not None:
            trace.append(disp)
        if disp < tol:
            break
    return A


def _slice_or_raise(panel: PanelDataset, t: int) -> np.ndarray:
    X = panel.slice(t)
    if X.shape[0] == 0:
        raise EmptySlice(panel.times[t])
    return X


def train_sotm(panel: PanelDataset, config: TrainConfig, scaler: Scaler | None = None,
               trace: list | None = None) -> SotmModel:
    """Train a SOTM on an already standardized panel.

    ``scaler`` is stored in the model so feature planes can be mapped back
    to original units; an identity scaler is used when omitted. When
    ``trace`` is a list, one list of per-cycle displacements is appended per
    time slice.
    """
    if scaler is None:
        scaler = Scaler(np.zeros(panel.D), np.ones(panel.D))
    M, sigma = config.M, config.sigma
    arrays = np.empty((panel.T, M, panel.D))

    X = _slice_or_raise(panel, 0)
    disp: list = []
    A = train_slice(pca_init(X, M), X, sigma, config.first_slice_max_cycles,
                    config.first_slice_tol, trace=disp)
    log.debug("first slice %s: %d cycles, last displacement %.3g",
              panel.times[0], len(disp), disp[-1] if disp else 0.0)
    if trace is not None:
        trace.append(disp)
    arrays[0] = A

    for t in range(1, panel.T):
        X = _slice_or_raise(panel, t)
        disp = []
        # short-term memory: start from the trained predecessor
        A = train_slice(arrays[t - 1], X, sigma, config.cycles_per_slice, 0.0, trace=disp)
        if trace is not None:
            trace.append(disp)
        arrays[t] = A

    return SotmModel(arrays=arrays, sigma=sigma, config=config, scaler=scaler,
                     times=panel.times, variables=panel.variables)


def fit_sotm(raw_panel: PanelDataset, config: TrainConfig) -> tuple[SotmModel, PanelDataset]:
    """Standardize ``raw_panel`` and train; returns the model and the standardized panel."""
    std_panel, scaler = standardize(raw_panel)
    return train_sotm(std_panel, config, scaler), std_panel


def train_pooled_baseline(panel: PanelDataset, M: int, sigma: float,
                          max_cycles: int = 100, tol: float = 1e-6) -> np.ndarray:
    """Naive one-dimensional SOM on all time slices pooled together."""
    X = panel.values
    if X.shape[0] == 0:
        raise EmptySlice()
    return train_slice(pca_init(X, M), X, sigma, max_cycles, tol)


def sigma_sweep(panel: PanelDataset, M: int, sigmas: Sequence[float],
                config: TrainConfig | None = None,
                scaler: Scaler | None = None) -> list[tuple[float, QualityReport]]:
    """Train one SOTM per radius with otherwise identical settings."""
    from .metrics import quality

    sigmas = [float(s) for s in sigmas]
    if not sigmas or any(not s > 0 for s in sigmas):
        raise SotmError("sigmas must be a nonempty list of positive radii")
    if any(a > b for a, b in zip(sigmas, sigmas[1:])):
        raise SotmError("sigmas must be sorted ascending")
    base = config if config is not None else TrainConfig(M=M, sigma=sigmas[0])
    rows = []
    for s in sigmas:
        model = train_sotm(panel, base.replace(M=M, sigma=s), scaler)
        rows.append((s, quality(model, panel)))
    return rows


def select_sigma(rows: Sequence[tuple[float, QualityReport]]) -> float:
    """Pick a radius from a sweep: lowest topographic error first, then the
    lowest quantization error and distortion, then the smaller radius."""
    if not rows:
        raise SotmError("empty sweep")
    best = min(rows, key=lambda r: (r[1].te_total, r[1].qe_total, r[1].dm_total, r[0]))
    return best[0]
