"""Write a SOTM report as SVG files plus a JSON bundle.

Output is plain SVG 1.1 text built by hand. All numbers are printed with a
fixed precision so identical inputs give byte-identical files.
"""

from __future__ import annotations

import re
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from ..core import PanelDataset, QualityReport, SotmModel, dump_json
from ..metrics import quality
from .colors import IDLE_GREY, rgb_to_hex, scale_blues
from .planes import VizBundle

CELL_W, CELL_H = 44, 28
MARGIN_L, MARGIN_T, MARGIN_R, MARGIN_B = 56, 36, 16, 40
FONT = "font-family='Helvetica,Arial,sans-serif' font-size='11'"

GROUP_PALETTE = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
                 "#a65628", "#f781bf", "#999999", "#66c2a5", "#e6ab02"]
TE_STROKE = "#d7191c"


def _f(x: float) -> str:
    s = f"{float(x):.2f}"
    return "0.00" if s == "-0.00" else s


class Svg:
    def __init__(self, width: float, height: float, title: str = ""):
        self.width, self.height = width, height
        self.parts: list[str] = []
        if title:
            self.parts.append(f"<title>{escape(title)}</title>")

    @staticmethod
    def _attrs(attrs: dict) -> str:
        out = []
        for k, v in attrs.items():
            if v is None:
                continue
            if isinstance(v, float):
                v = _f(v)
            out.append(f"{k.replace('_', '-')}={quoteattr(str(v))}")
        return " ".join(out)

    def add(self, tag: str, text: str | None = None, **attrs):
        a = self._attrs(attrs)
        if text is None:
            self.parts.append(f"<{tag} {a}/>")
        else:
            self.parts.append(f"<{tag} {a}>{escape(text)}</{tag}>")

    def rect(self, x, y, w, h, **attrs):
        self.add("rect", x=float(x), y=float(y), width=float(w), height=float(h), **attrs)

    def line(self, x1, y1, x2, y2, **attrs):
        self.add("line", x1=float(x1), y1=float(y1), x2=float(x2), y2=float(y2), **attrs)

    def circle(self, cx, cy, r, **attrs):
        self.add("circle", cx=float(cx), cy=float(cy), r=float(r), **attrs)

    def polyline(self, points, **attrs):
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
        self.add("polyline", points=pts, fill="none", **attrs)

    def text(self, x, y, s, anchor="middle", **attrs):
        self.parts.append(
            f"<text x='{_f(x)}' y='{_f(y)}' text-anchor='{anchor}' {FONT}"
            + (" " + self._attrs(attrs) if attrs else "") + f">{escape(str(s))}</text>"
        )

    def render(self) -> str:
        head = ("<?xml version='1.0' encoding='UTF-8'?>\n"
                f"<svg xmlns='http://www.w3.org/2000/svg' version='1.1' "
                f"width='{_f(self.width)}' height='{_f(self.height)}' "
                f"viewBox='0 0 {_f(self.width)} {_f(self.height)}'>\n")
        return head + "\n".join(self.parts) + "\n</svg>\n"

    def save(self, path: Path) -> Path:
        path.write_text(self.render())
        return path


def _hex(rgb) -> str:
    return rgb_to_hex(rgb)


def _grid_svg(title: str, fills: np.ndarray, times, labels=None, legend=None) -> Svg:
    """An M x T grid of colored cells, unit 0 at the top, time left to right."""
    M, T = fills.shape[:2]
    W = MARGIN_L + T * CELL_W + MARGIN_R
    H = MARGIN_T + M * CELL_H + MARGIN_B + (18 if legend else 0)
    svg = Svg(W, H, title)
    svg.text(W / 2, 20, title)
    for t in range(T):
        x = MARGIN_L + t * CELL_W
        for i in range(M):
            y = MARGIN_T + i * CELL_H
            svg.rect(x, y, CELL_W, CELL_H, fill=_hex(fills[i, t]), stroke="#ffffff")
            if labels is not None:
                svg.text(x + CELL_W / 2, y + CELL_H / 2 + 4, labels[i][t])
        svg.text(x + CELL_W / 2, MARGIN_T + M * CELL_H + 14, times[t])
    for i in range(M):
        svg.text(MARGIN_L - 6, MARGIN_T + i * CELL_H + CELL_H / 2 + 4, i, anchor="end")
    if legend:
        svg.text(MARGIN_L, H - 8, legend, anchor="start")
    return svg


def _cell_center(i: int, t: int) -> tuple[float, float]:
    return MARGIN_L + t * CELL_W + CELL_W / 2, MARGIN_T + i * CELL_H + CELL_H / 2


def grid_svg(bundle: VizBundle) -> Svg:
    fills = bundle.unit_colors.copy()
    fills[bundle.idle] = IDLE_GREY
    return _grid_svg("SOTM units (Sammon dimension, blue to yellow; grey = idle)",
                     fills, bundle.times)


def net_svg(bundle: VizBundle) -> Svg:
    """Sammon coordinate against time with data-topology and time-topology links."""
    M, T = bundle.M, bundle.T
    plot_h = 320
    W = MARGIN_L + T * CELL_W + MARGIN_R
    H = MARGIN_T + plot_h + MARGIN_B
    svg = Svg(W, H, "Sammon mapping of SOTM units")
    svg.text(W / 2, 20, "Sammon mapping (solid: data topology, dashed: time topology)")
    y = bundle.sammon_y
    lo, hi = float(y.min()), float(y.max())
    span = hi - lo if hi > lo else 1.0

    def pos(i, t):
        px = MARGIN_L + t * CELL_W + CELL_W / 2
        py = MARGIN_T + plot_h - (y[i, t] - lo) / span * plot_h
        return px, py

    svg.line(MARGIN_L, MARGIN_T + plot_h, W - MARGIN_R, MARGIN_T + plot_h, stroke="#444444")
    svg.line(MARGIN_L, MARGIN_T, MARGIN_L, MARGIN_T + plot_h, stroke="#444444")
    for t in range(T):
        svg.text(pos(0, t)[0], MARGIN_T + plot_h + 14, bundle.times[t])
    for t in range(T):
        for i in range(M - 1):
            svg.line(*pos(i, t), *pos(i + 1, t), stroke="#555555", stroke_width="1.2")
    for t in range(T - 1):
        for i in range(M):
            svg.line(*pos(i, t), *pos(i, t + 1), stroke="#999999",
                     stroke_dasharray="4,3", stroke_width="1")
    for t in range(T):
        for i in range(M):
            fill = _hex(IDLE_GREY if bundle.idle[i, t] else bundle.unit_colors[i, t])
            stroke = TE_STROKE if bundle.te_units[i, t] else "#333333"
            svg.circle(*pos(i, t), 5, fill=fill, stroke=stroke,
                       stroke_width="2" if bundle.te_units[i, t] else "0.8")
    return svg


def plane_svg(var: str, plane: np.ndarray, colors: np.ndarray, times) -> Svg:
    legend = f"light = {plane.min():.4g}, dark = {plane.max():.4g}"
    return _grid_svg(f"Feature plane: {var}", colors, times, legend=legend)


def frequency_svg(bundle: VizBundle) -> Svg:
    counts = bundle.frequency
    fills = scale_blues(counts)
    fills[bundle.idle] = IDLE_GREY
    labels = [[str(int(c)) for c in row] for row in counts]
    return _grid_svg("Frequency plane (grey = idle)", fills, bundle.times, labels=labels)


def quality_svg(report: QualityReport) -> Svg:
    """Four small line charts of the per-time measures."""
    series = [("quantization error", report.qe_t, 0),
              ("distortion", report.dm_t, 0),
              ("topographic error", report.te_t, 0),
              ("structural change", report.sc_t, 1)]
    T = report.qe_t.size
    panel_w, panel_h, gap = max(T * 40, 200), 110, 46
    W = MARGIN_L + panel_w + MARGIN_R
    H = MARGIN_T + len(series) * (panel_h + gap)
    svg = Svg(W, H, "Property measures over time")
    svg.text(W / 2, 20, "Property measures over time")
    step = panel_w / max(T - 1, 1)
    for k, (name, vals, first) in enumerate(series):
        top = MARGIN_T + k * (panel_h + gap) + 14
        svg.text(MARGIN_L, top - 4, name, anchor="start")
        svg.rect(MARGIN_L, top, panel_w, panel_h, fill="#fafafa", stroke="#888888")
        for t in range(T):
            svg.text(MARGIN_L + t * step, top + panel_h + 13, report.times[t])
        if vals.size == 0:
            continue
        lo, hi = 0.0, float(vals.max())
        span = hi - lo if hi > lo else 1.0
        svg.text(MARGIN_L - 4, top + 8, f"{hi:.3g}", anchor="end")
        svg.text(MARGIN_L - 4, top + panel_h, "0", anchor="end")
        pts = [(MARGIN_L + (t + first) * step, top + panel_h - (v - lo) / span * panel_h)
               for t, v in enumerate(vals)]
        svg.polyline(pts, stroke="#2171b5", stroke_width="1.5")
        for p in pts:
            svg.circle(*p, 2.5, fill="#08519c")
    return svg


def trajectories_svg(bundle: VizBundle) -> Svg:
    fills = np.full(bundle.unit_colors.shape, 240, dtype=int)
    svg = _grid_svg("Trajectories on the SOTM", fills, bundle.times)
    group_names = sorted(set(bundle.groups.values()))
    color_of = {g: GROUP_PALETTE[k % len(GROUP_PALETTE)] for k, g in enumerate(group_names)}
    for entity, seq in bundle.trajectories.items():
        color = color_of.get(bundle.groups.get(entity), "#333333")
        run: list = []
        for t, c in seq:
            if run and t != run[-1][0] + 1:
                _draw_run(svg, run, color)
                run = []
            run.append((t, c))
        _draw_run(svg, run, color)
    for k, g in enumerate(group_names):
        svg.text(MARGIN_L + k * 60, svg.height - 6, g, anchor="start", fill=color_of[g])
    return svg


def _draw_run(svg: Svg, run, color):
    if not run:
        return
    pts = [_cell_center(c, t) for t, c in run]
    if len(pts) > 1:
        svg.polyline(pts, stroke=color, stroke_width="1.2", stroke_opacity="0.5")
    for p in pts:
        svg.circle(*p, 2, fill=color, fill_opacity="0.6")


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "var"


def render_report(model: SotmModel, panel: PanelDataset, bundle: VizBundle, out_dir,
                  report: QualityReport | None = None) -> list[Path]:
    """Write grid, Sammon net, feature planes, frequency, quality, trajectories
    and ``bundle.json`` into ``out_dir``; returns the written paths.

    ``trajectories.svg`` is only written when the bundle holds trajectories.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = report if report is not None else quality(model, panel)
    written = [
        grid_svg(bundle).save(out / "sotm-grid.svg"),
        net_svg(bundle).save(out / "sammon-net.svg"),
    ]
    used = set()
    for var in model.variables:
        name = _safe(var)
        while name in used:
            name += "_"
        used.add(name)
        written.append(plane_svg(var, bundle.feature_planes[var], bundle.plane_colors[var],
                                 bundle.times).save(out / f"plane-{name}.svg"))
    written.append(frequency_svg(bundle).save(out / "frequency.svg"))
    written.append(quality_svg(report).save(out / "quality.svg"))
    if bundle.trajectories:
        written.append(trajectories_svg(bundle).save(out / "trajectories.svg"))
    doc = bundle.to_dict()
    doc["quality"] = report.to_dict()
    with open(out / "bundle.json", "w") as fh:
        dump_json(doc, fh)
    written.append(out / "bundle.json")
    return written
