"""Grid-shaped views of a SOTM: feature planes, frequencies, trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from ..core import PanelDataset, Scaler, SotmModel
from ..errors import UnknownEntity
from ..metrics import topographic_events
from ..trainer import find_bmus
from .colors import cielab_unit_colors, scale_blues
from .sammon import sammon_1d


class FeaturePlanes(NamedTuple):
    values: dict            # variable -> (M, T) matrix in original units
    colors: dict            # variable -> (M, T, 3) sRGB


class Frequency(NamedTuple):
    counts: np.ndarray      # (M, T) int
    idle: np.ndarray        # (M, T) bool


def feature_planes(model: SotmModel, scaler: Scaler | None = None) -> FeaturePlanes:
    """Destandardized reference vectors, one (M, T) matrix per variable.

    Each plane is colored on a single scale spanning its own min..max over
    the whole map, so shade differences along time are comparable.
    """
    scaler = model.scaler if scaler is None else scaler
    orig = scaler.inverse_transform(model.arrays)          # (T, M, D)
    values, colors = {}, {}
    for k, var in enumerate(model.variables):
        plane = orig[:, :, k].T.copy()
        values[var] = plane
        colors[var] = scale_blues(plane)
    return FeaturePlanes(values, colors)


def frequency_plane(model: SotmModel, panel: PanelDataset) -> Frequency:
    model.check_panel(panel)
    counts = np.zeros((model.M, model.T), dtype=int)
    for t in range(model.T):
        bmu, _ = find_bmus(panel.slice(t), model.arrays[t])
        counts[:, t] = np.bincount(bmu, minlength=model.M)
    return Frequency(counts, counts == 0)


def trajectories(model: SotmModel, panel: PanelDataset,
                 entities: Iterable[str]) -> dict[str, list[tuple[int, int]]]:
    """Per entity, ``(t, bmu)`` for every time slice where it has data.

    ``t`` is the 0-based slice position; slices without data are simply absent.
    """
    model.check_panel(panel)
    lookup = {e: k for k, e in enumerate(panel.entities)}
    wanted = []
    for e in entities:
        if e not in lookup:
            raise UnknownEntity(e)
        wanted.append(e)
    out: dict[str, list[tuple[int, int]]] = {e: [] for e in wanted}
    want_idx = {lookup[e]: e for e in wanted}
    for t in range(model.T):
        ents = panel.slice_entities(t)
        rows = [r for r, e in enumerate(ents) if int(e) in want_idx]
        if not rows:
            continue
        bmu, _ = find_bmus(panel.slice(t)[rows], model.arrays[t])
        for r, c in zip(rows, bmu):
            out[want_idx[int(ents[r])]].append((t, int(c)))
    return out


def topographic_units(model: SotmModel, panel: PanelDataset) -> tuple[np.ndarray, np.ndarray]:
    """Units taking part in any non-adjacent first/second BMU pair, and event counts per t."""
    flagged = np.zeros((model.M, model.T), dtype=bool)
    n_events = np.zeros(model.T, dtype=int)
    for t, events in enumerate(topographic_events(model, panel)):
        n_events[t] = len(events)
        for _, c1, c2 in events:
            flagged[c1, t] = flagged[c2, t] = True
    return flagged, n_events


@dataclass(frozen=True, eq=False)
class VizBundle:
    sammon_y: np.ndarray
    stress: float
    unit_colors: np.ndarray
    feature_planes: dict
    plane_colors: dict
    frequency: np.ndarray
    idle: np.ndarray
    te_units: np.ndarray
    trajectories: dict
    times: tuple
    groups: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.sammon_y.shape[0]

    @property
    def T(self) -> int:
        return self.sammon_y.shape[1]

    def to_dict(self) -> dict:
        return {
            "shape": {"M": self.M, "T": self.T, "D": len(self.feature_planes)},
            "times": list(self.times),
            "sammon_y": self.sammon_y.tolist(),
            "sammon_stress": self.stress,
            "unit_colors": self.unit_colors.tolist(),
            "feature_planes": {k: v.tolist() for k, v in self.feature_planes.items()},
            "frequency": self.frequency.tolist(),
            "idle": self.idle.tolist(),
            "topographic_error_units": self.te_units.tolist(),
            "trajectories": {
                e: [[self.times[t], c] for t, c in seq] for e, seq in self.trajectories.items()
            },
            "groups": dict(self.groups),
        }


def build_bundle(model: SotmModel, panel: PanelDataset, entities: Iterable[str] = (),
                 groups: dict | None = None) -> VizBundle:
    """Compute every numeric view needed for a report."""
    sam = sammon_1d(model)
    planes = feature_planes(model)
    freq = frequency_plane(model, panel)
    te_units, _ = topographic_units(model, panel)
    traj = trajectories(model, panel, entities)
    groups = {e: groups[e] for e in traj if groups and e in groups}
    return VizBundle(
        sammon_y=sam.coords,
        stress=sam.stress,
        unit_colors=cielab_unit_colors(sam.coords),
        feature_planes=planes.values,
        plane_colors=planes.colors,
        frequency=freq.counts,
        idle=freq.idle,
        te_units=te_units,
        trajectories=traj,
        times=model.times,
        groups=groups,
    )
