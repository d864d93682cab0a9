"""One-dimensional Sammon mapping of all SOTM units."""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

from ..core import SotmModel
from ..errors import AllUnitsIdentical

log = logging.getLogger(__name__)

ZERO_DISTANCE = 1e-12


class SammonResult(NamedTuple):
    coords: np.ndarray      # (M, T)
    stress: float
    trace: list             # stress after every accepted step, initial value first
    initial_stress: float


def pairwise_distances(P: np.ndarray) -> np.ndarray:
    diff = P[:, None, :] - P[None, :, :]
    return np.sqrt(np.einsum("pqd,pqd->pq", diff, diff))


def first_pc_scores(P: np.ndarray) -> np.ndarray:
    Pc = P - P.mean(axis=0)
    _, evecs = np.linalg.eigh(Pc.T @ Pc)
    v = evecs[:, -1]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return Pc @ v


def sammon_stress(Dstar: np.ndarray, y: np.ndarray) -> float:
    """Sammon stress of 1-D coordinates ``y`` against target distances ``Dstar``."""
    iu = np.triu_indices(len(y), k=1)
    D = Dstar[iu]
    d = np.abs(y[:, None] - y[None, :])[iu]
    return float(np.sum((D - d) ** 2 / D) / np.sum(D))


def sammon(points, max_iter: int = 500, magic: float = 0.3, tol: float = 1e-9,
           max_halvings: int = 40, init=None) -> tuple[np.ndarray, float, list]:
    """Project ``points`` (n, D) to one dimension by Sammon's mapping.

    Uses Sammon's diagonal-Newton step scaled by ``magic``. A step that would
    raise the stress is halved until it does not; if no halving helps, the
    descent stops. Starts from first-principal-component scores unless
    ``init`` is given. Returns coordinates, final stress and the trace of
    accepted stresses.
    """
    P = np.asarray(points, dtype=float)
    n = P.shape[0]
    Dstar = pairwise_distances(P)
    off = ~np.eye(n, dtype=bool)
    if n < 2 or not np.any(Dstar[off] > 0):
        raise AllUnitsIdentical("Sammon mapping needs at least two distinct points")
    Dstar[off & (Dstar == 0)] = ZERO_DISTANCE
    np.fill_diagonal(Dstar, 1.0)
    scale = np.sum(np.triu(Dstar, k=1))

    y = first_pc_scores(P) if init is None else np.array(init, dtype=float)
    E = sammon_stress(Dstar, y)
    trace = [E]
    inv_D = 1.0 / Dstar
    np.fill_diagonal(inv_D, 0.0)
    # in one dimension the second derivative of the stress is constant
    hess = (2.0 / scale) * inv_D.sum(axis=1)

    for _ in range(max_iter):
        if E == 0.0:
            break
        diff = y[:, None] - y[None, :]
        # coincident coordinates get the same floor as coincident inputs
        d = np.maximum(np.abs(diff), ZERO_DISTANCE)
        np.fill_diagonal(d, 1.0)
        coef = (Dstar - d) / (Dstar * d)
        np.fill_diagonal(coef, 0.0)
        grad = (-2.0 / scale) * np.sum(coef * diff, axis=1)
        delta = -grad / hess

        step = magic
        for _ in range(max_halvings):
            y_new = y + step * delta
            E_new = sammon_stress(Dstar, y_new)
            if E_new <= E:
                break
            step *= 0.5
        else:
            log.debug("sammon: no descent step found, stopping at stress %.3g", E)
            break
        rel = (E - E_new) / E
        y, E = y_new, E_new
        trace.append(E)
        if rel < tol:
            break
    return y, E, trace


def sammon_1d(model: SotmModel, **kwargs) -> SammonResult:
    """Map all M*T reference vectors to one Sammon dimension.

    ``coords[i, t]`` is the coordinate of unit ``i`` of the array at time ``t``.
    """
    P = model.arrays.reshape(model.T * model.M, model.D)
    y0 = first_pc_scores(P) if np.ptp(P, axis=0).any() else None
    if y0 is None:
        raise AllUnitsIdentical("all reference vectors are identical")
    y, E, trace = sammon(P, init=y0, **kwargs)
    coords = y.reshape(model.T, model.M).T.copy()
    return SammonResult(coords, E, trace, trace[0])
