"""Synthetic panels with known group structure, trends and shocks.

Every value is a logistic squash of

    E(r, g, t) + w4(r, g) * e4(r, t) + w5(r, g) * e5(r, j, t)
    E(r, g, t) = w1(r) * e1(g) + w2(r) * e2(g) * t + w3(r) * e3(g, t)

with e1, e3, e4, e5 standard normal and e2 uniform on (0, 1). Shocks are
shared exactly as their indices say: e1, e2, e3 by all entities of a group
(and across variables), e4 by all entities at a given (variable, time), e5
drawn per entity. ``t`` runs from 1 to T.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .core import PanelDataset
from .errors import SotmError


@dataclass(frozen=True, eq=False)
class ToyWeights:
    """Generator weights.

    ``w1``, ``w2``, ``w3`` hold one value per variable; ``w4`` and ``w5`` are
    (variables x groups). ``w2`` may be negative to give a downward trend;
    all other weights must be nonnegative.
    """

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    w4: np.ndarray
    w5: np.ndarray
    G: int = 5
    n_per_group: int = 20
    T: int = 10
    seed: int = 0

    def __post_init__(self):
        if min(self.G, self.n_per_group, self.T) < 1:
            raise SotmError("G, n_per_group and T must be >= 1")
        R = np.asarray(self.w1).size
        if R < 1:
            raise SotmError("need at least one variable")
        for name in ("w1", "w2", "w3"):
            a = np.array(getattr(self, name), dtype=float).ravel()
            if a.size != R:
                raise SotmError(f"{name} must have one entry per variable")
            object.__setattr__(self, name, a)
        for name in ("w4", "w5"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim == 1 and a.size == R:
                a = np.repeat(a[:, None], self.G, axis=1)
            if a.shape != (R, self.G):
                raise SotmError(f"{name} must have shape ({R}, {self.G})")
            object.__setattr__(self, name, a)
        ws = (self.w1, self.w2, self.w3, self.w4, self.w5)
        if not all(np.all(np.isfinite(w)) for w in ws):
            raise SotmError("weights must be finite")
        if any(np.any(w < 0) for w in (self.w1, self.w3, self.w4, self.w5)):
            raise SotmError("w1, w3, w4 and w5 must be nonnegative")

    @property
    def R(self) -> int:
        return self.w1.size

    def with_seed(self, seed: int) -> ToyWeights:
        return replace(self, seed=seed)


class ToyData(NamedTuple):
    panel: PanelDataset
    groups: dict


def default_preset(seed: int = 7) -> ToyWeights:
    """Four variables shaped after the classic SOTM toy example.

    x1: small intercept spread, rising trend.
    x2: large intercept spread, falling trend, minor group and entity shocks.
    x3: large intercept spread, flat, minor common shocks.
    x4: large intercept spread, flat, large time-common shocks.

    The numbers are hand-tuned to produce those shapes; they are not taken
    from any published figure.
    """
    return ToyWeights(
        w1=[0.4, 2.5, 2.5, 2.5],
        w2=[0.5, -1.0, 0.0, 0.0],
        w3=[0.3, 0.3, 0.0, 0.0],
        w4=[[0.05] * 5, [0.05] * 5, [0.02] * 5, [0.3, 0.45, 0.6, 0.75, 0.9]],
        w5=[[0.05] * 5] * 4,
        G=5, n_per_group=20, T=10, seed=seed,
    )


def logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


def generate_cube(weights: ToyWeights) -> np.ndarray:
    """Raw values as an array of shape (R, G, n_per_group, T)."""
    w = weights
    G, n, T, R = w.G, w.n_per_group, w.T, w.R
    rng = np.random.default_rng(w.seed)
    e1 = rng.standard_normal(G)
    e2 = rng.uniform(0.0, 1.0, G)
    e3 = rng.standard_normal((G, T))
    e4 = rng.standard_normal((R, T))
    e5 = rng.standard_normal((R, G, n, T))

    t = np.arange(1, T + 1, dtype=float)
    E = (w.w1[:, None, None] * e1[None, :, None]
         + w.w2[:, None, None] * e2[None, :, None] * t[None, None, :]
         + w.w3[:, None, None] * e3[None, :, :])                     # (R, G, T)
    common = w.w4[:, :, None] * e4[:, None, :]                         # (R, G, T)
    z = (E + common)[:, :, None, :] + w.w5[:, :, None, None] * e5      # (R, G, n, T)
    return logistic(z)


def generate_toy(weights: ToyWeights) -> ToyData:
    """Generate a balanced panel plus the entity -> group mapping."""
    cube = generate_cube(weights)
    R, G, n, T = cube.shape
    width = len(str(G * n))
    entities = [f"e{k + 1:0{width}d}" for k in range(G * n)]
    groups = {entities[g * n + j]: f"g{g + 1}" for g in range(G) for j in range(n)}

    # rows ordered (t, g, j); entity k = g*n + j
    values = cube.transpose(3, 1, 2, 0).reshape(T * G * n, R)
    ent_idx = np.tile(np.arange(G * n), T)
    time_idx = np.repeat(np.arange(T), G * n)
    panel = PanelDataset(tuple(entities), tuple(str(t) for t in range(1, T + 1)),
                         tuple(f"x{r + 1}" for r in range(R)), ent_idx, time_idx, values)
    return ToyData(panel, groups)


def write_groups_csv(groups: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity", "group"])
        for e, g in groups.items():
            w.writerow([e, g])


def read_groups_csv(path) -> dict:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header[:2] != ["entity", "group"]:
            raise SotmError("groups CSV header must be entity,group")
        return {row[0].strip(): row[1].strip() for row in reader if len(row) >= 2}
