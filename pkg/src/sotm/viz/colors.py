"""Color scales: a CIELab blue-yellow axis and a sequential blue ramp."""

from __future__ import annotations

import numpy as np

# D65 reference white, 2-degree observer
WHITE_D65 = np.array([0.95047, 1.0, 1.08883])

XYZ_TO_LINEAR_SRGB = np.array([
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
])

LAB_L = 60.0
LAB_B_RANGE = (-60.0, 60.0)

# ColorBrewer "Blues", 9 classes, light to dark
BLUES_9 = ["#f7fbff", "#deebf7", "#c6dbef", "#9ecae1", "#6baed6",
           "#4292c6", "#2171b5", "#08519c", "#08306b"]

IDLE_GREY = (189, 189, 189)


def lab_to_srgb(lab) -> np.ndarray:
    """CIELab (D65) to gamma-encoded sRGB in [0, 1], clipped to gamut."""
    lab = np.asarray(lab, dtype=float)
    L, a, b = lab[..., 0], lab[..., 1], lab[..., 2]
    fy = (L + 16.0) / 116.0
    f = np.stack([fy + a / 500.0, fy, fy - b / 200.0], axis=-1)
    delta = 6.0 / 29.0
    xyz = np.where(f > delta, f ** 3, 3 * delta ** 2 * (f - 4.0 / 29.0)) * WHITE_D65
    lin = xyz @ XYZ_TO_LINEAR_SRGB.T
    lin = np.clip(lin, 0.0, 1.0)
    return np.where(lin <= 0.0031308, 12.92 * lin, 1.055 * lin ** (1 / 2.4) - 0.055)


def to_rgb255(rgb01) -> np.ndarray:
    return np.rint(np.clip(rgb01, 0.0, 1.0) * 255.0).astype(int)


def coords_to_bstar(y) -> np.ndarray:
    """Linear map of coordinates onto b* in [-60, 60]; constant input maps to 0."""
    y = np.asarray(y, dtype=float)
    lo, hi = y.min(), y.max()
    if hi == lo:
        return np.zeros_like(y)
    b0, b1 = LAB_B_RANGE
    return b0 + (b1 - b0) * (y - lo) / (hi - lo)


def cielab_unit_colors(sammon_y) -> np.ndarray:
    """sRGB triples (0..255) running blue to yellow with the Sammon coordinate.

    Output shape is ``sammon_y.shape + (3,)``.
    """
    bstar = coords_to_bstar(sammon_y)
    lab = np.stack([np.full_like(bstar, LAB_L), np.zeros_like(bstar), bstar], axis=-1)
    return to_rgb255(lab_to_srgb(lab))


def hex_to_rgb(h: str) -> tuple[int, int, int]:
    h = h.lstrip("#")
    return tuple(int(h[k:k + 2], 16) for k in (0, 2, 4))


def rgb_to_hex(rgb) -> str:
    r, g, b = (int(c) for c in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


_BLUES = np.array([hex_to_rgb(h) for h in BLUES_9], dtype=float)


def blues(frac) -> np.ndarray:
    """Interpolate the 9-class blue ramp at ``frac`` in [0, 1] (0 = lightest)."""
    frac = np.clip(np.asarray(frac, dtype=float), 0.0, 1.0)
    pos = frac * (len(_BLUES) - 1)
    lo = np.minimum(np.floor(pos).astype(int), len(_BLUES) - 2)
    w = (pos - lo)[..., None]
    return np.rint(_BLUES[lo] * (1 - w) + _BLUES[lo + 1] * w).astype(int)


def scale_blues(values) -> np.ndarray:
    """Color a matrix on one shared min..max scale; constant input gets the lightest class."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    frac = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    return blues(frac)
