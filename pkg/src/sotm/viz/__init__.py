"""Visual outputs: Sammon projection, unit colors, planes and SVG reports."""

from .colors import cielab_unit_colors, lab_to_srgb, scale_blues
from .planes import (
    VizBundle,
    build_bundle,
    feature_planes,
    frequency_plane,
    topographic_units,
    trajectories,
)
from .render import render_report
from .sammon import sammon, sammon_1d, sammon_stress

__all__ = [
    "VizBundle",
    "build_bundle",
    "cielab_unit_colors",
    "feature_planes",
    "frequency_plane",
    "lab_to_srgb",
    "render_report",
    "sammon",
    "sammon_1d",
    "sammon_stress",
    "scale_blues",
    "topographic_units",
    "trajectories",
]
