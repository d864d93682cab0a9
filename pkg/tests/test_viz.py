import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from skimage.color import lab2rgb

from sotm import TrainConfig, train_sotm
from sotm.core import PanelDataset, Scaler
from sotm.errors import AllUnitsIdentical, MismatchedPanel, UnknownEntity
from sotm.viz import (
    build_bundle,
    cielab_unit_colors,
    feature_planes,
    frequency_plane,
    render_report,
    sammon,
    sammon_1d,
    topographic_units,
    trajectories,
)
from sotm.viz.colors import BLUES_9, blues, coords_to_bstar, hex_to_rgb, scale_blues
from sotm.viz.sammon import sammon_stress, pairwise_distances

from conftest import make_model

# -- Sammon ------------------------------------------------------------------

def test_sammon_collinear_units():
    rng = np.random.default_rng(0)
    direction = np.array([1.0, -2.0, 0.5])
    s = np.sort(rng.uniform(-3, 3, 12))
    pts = 1.0 + s[:, None] * direction
    y, E, _ = sammon(pts)
    assert E <= 1e-6
    order = np.argsort(y)
    assert list(order) == list(range(12)) or list(order) == list(range(11, -1, -1))
    # affine reproduction
    fit = np.polyfit(s, y, 1)
    assert np.allclose(np.polyval(fit, s), y, atol=1e-3)


def test_sammon_two_points():
    y, E, _ = sammon(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert abs(abs(y[1] - y[0]) - 5.0) < 1e-9
    assert E < 1e-12


def test_sammon_trace_descends(toy_model):
    res = sammon_1d(toy_model)
    assert res.coords.shape == (5, 10)
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))
    assert res.stress <= res.initial_stress
    P = toy_model.arrays.reshape(-1, toy_model.D)
    y = res.coords.T.ravel()
    D = pairwise_distances(P)
    np.fill_diagonal(D, 1.0)
    assert sammon_stress(D, y) == pytest.approx(res.stress, rel=1e-12)


def test_sammon_identical_units():
    with pytest.raises(AllUnitsIdentical):
        sammon_1d(make_model(np.ones((3, 2, 2))))
    with pytest.raises(AllUnitsIdentical):
        sammon(np.ones((4, 2)))


def test_sammon_with_duplicate_points():
    pts = np.array([[0.0], [0.0], [1.0], [2.0]])
    y, E, _ = sammon(pts)
    assert np.isfinite(E) and np.all(np.isfinite(y))


# -- colors -------------------------------------------------------------------

def lab_reference(L, a, b):
    return np.rint(lab2rgb(np.array([[[L, a, b]]], dtype=float), illuminant="D65")[0, 0] * 255).astype(int)


def test_color_endpoints_and_midpoint():
    cols = cielab_unit_colors(np.array([[0.0, 5.0, 10.0]]))
    assert np.array_equal(cols[0, 0], lab_reference(60, 0, -60))
    assert np.array_equal(cols[0, 2], lab_reference(60, 0, 60))
    mid = cols[0, 1]
    assert np.max(np.abs(mid - lab_reference(60, 0, 0))) <= 1
    assert mid[0] == mid[1] == mid[2]


def test_colors_constant_input():
    cols = cielab_unit_colors(np.full((3, 4), 2.5))
    assert np.all(cols == cols[0, 0])
    assert np.array_equal(cols[0, 0], lab_reference(60, 0, 0))


def test_color_order_follows_coordinates():
    y = np.random.default_rng(1).normal(size=(5, 6))
    bstar = coords_to_bstar(y)
    assert np.array_equal(np.argsort(bstar, axis=None), np.argsort(y, axis=None))
    cols = cielab_unit_colors(y)
    # blue falls and red rises as b* grows
    order = np.argsort(y, axis=None)
    flat = cols.reshape(-1, 3)[order]
    assert np.all(np.diff(flat[:, 2]) <= 0) and np.all(np.diff(flat[:, 0]) >= 0)
    assert cols.min() >= 0 and cols.max() <= 255


def test_blues_ramp():
    assert np.array_equal(blues(0.0), hex_to_rgb(BLUES_9[0]))
    assert np.array_equal(blues(1.0), hex_to_rgb(BLUES_9[-1]))
    assert np.array_equal(blues(0.5), hex_to_rgb(BLUES_9[4]))
    assert np.all(scale_blues(np.full((2, 2), 7.0)) == hex_to_rgb(BLUES_9[0]))


# -- planes -------------------------------------------------------------------

def test_feature_planes_destandardize_exactly(toy_model):
    planes = feature_planes(toy_model)
    for k, var in enumerate(toy_model.variables):
        expected = toy_model.arrays[:, :, k].T * toy_model.scaler.stds[k] + toy_model.scaler.means[k]
        assert np.allclose(planes.values[var], expected, rtol=0, atol=1e-12)
        assert planes.colors[var].shape == (5, 10, 3)


def test_constant_plane_single_color():
    arrays = np.zeros((3, 4, 2))
    arrays[:, :, 0] = np.arange(4)
    planes = feature_planes(make_model(arrays))
    assert np.all(planes.colors["x2"] == planes.colors["x2"][0, 0])


def test_x1_plane_trend(toy_model):
    plane = feature_planes(toy_model).values["x1"]
    assert plane[:, -1].mean() > plane[:, 0].mean()


def test_frequency_partitions_slices(toy_model, toy_std):
    panel = toy_std[0]
    freq = frequency_plane(toy_model, panel)
    assert np.array_equal(freq.counts.sum(axis=0), panel.counts)
    assert np.array_equal(freq.idle, freq.counts == 0)


def test_frequency_one_point_per_slice():
    rng = np.random.default_rng(2)
    model = make_model(rng.normal(size=(4, 3, 2)))
    panel = PanelDataset.from_slices([rng.normal(size=(1, 2)) for _ in range(4)])
    counts = frequency_plane(model, panel).counts
    assert np.all((counts != 0).sum(axis=0) == 1) and np.all(counts.sum(axis=0) == 1)


@pytest.mark.xfail(strict=True, reason="the tuned toy preset leaves gap units between "
                   "separated groups idle at sigma=1.6; see the decisions ledger")
def test_toy_model_has_no_idle_units(toy_model, toy_std):
    assert not frequency_plane(toy_model, toy_std[0]).idle.any()


def test_frequency_mismatch(toy_model):
    with pytest.raises(MismatchedPanel):
        frequency_plane(toy_model, PanelDataset.from_slices([np.eye(4)]))


# -- trajectories -----------------------------------------------------------------

def test_trajectory_on_unit():
    rng = np.random.default_rng(3)
    arrays = rng.normal(size=(5, 4, 2))
    model = make_model(arrays)
    slices = [np.vstack([arrays[t, 2], rng.normal(size=2)]) for t in range(5)]
    traj = trajectories(model, PanelDataset.from_slices(slices), ["e1"])
    assert traj == {"e1": [(t, 2) for t in range(5)]}


def test_trajectory_gap():
    recs = [("a", str(t), [float(t), 0.0]) for t in (1, 2, 4)] + \
           [("b", str(t), [0.0, float(t)]) for t in (1, 2, 3, 4)]
    panel = PanelDataset.from_records(recs, ["x1", "x2"])
    model = make_model(np.random.default_rng(4).normal(size=(4, 3, 2)))
    traj = trajectories(model, panel, ["a", "b"])
    assert [t for t, _ in traj["a"]] == [0, 1, 3]
    assert len(traj["b"]) == 4
    with pytest.raises(UnknownEntity):
        trajectories(model, panel, ["zz"])


def test_topographic_units_count(toy_std):
    rng = np.random.default_rng(5)
    model = make_model(rng.normal(size=(10, 5, 4)), times=toy_std[0].times)
    flagged, n_events = topographic_units(model, toy_std[0])
    from sotm.metrics import topographic_error
    _, te_t = topographic_error(model, toy_std[0])
    assert np.array_equal(n_events, np.rint(te_t * toy_std[0].counts).astype(int))
    assert flagged.any() == (n_events.sum() > 0)


# -- rendering ---------------------------------------------------------------------

def test_render_full_report(tmp_path, toy, toy_model, toy_std):
    panel = toy_std[0]
    bundle = build_bundle(toy_model, panel, list(panel.entities), toy.groups)
    written = render_report(toy_model, panel, bundle, tmp_path)
    names = sorted(p.name for p in written)
    assert names == sorted(["sotm-grid.svg", "sammon-net.svg", "plane-x1.svg", "plane-x2.svg",
                            "plane-x3.svg", "plane-x4.svg", "frequency.svg", "quality.svg",
                            "trajectories.svg", "bundle.json"])
    for p in written:
        if p.suffix == ".svg":
            root = ET.parse(p).getroot()
            assert root.tag.endswith("svg")
    doc = json.loads((tmp_path / "bundle.json").read_text())
    assert doc["shape"] == {"M": 5, "T": 10, "D": 4}
    assert np.array_equal(np.array(doc["frequency"]).sum(axis=0), panel.counts)


def test_render_without_entities(tmp_path, toy_model, toy_std):
    bundle = build_bundle(toy_model, toy_std[0])
    names = {p.name for p in render_report(toy_model, toy_std[0], bundle, tmp_path)}
    assert "trajectories.svg" not in names and "sotm-grid.svg" in names


def test_rerender_is_byte_identical(tmp_path, toy_model, toy_std):
    bundle = build_bundle(toy_model, toy_std[0], ["e001", "e050"])
    a = render_report(toy_model, toy_std[0], bundle, tmp_path / "a")
    b = render_report(toy_model, toy_std[0], bundle, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_net_marks_topographic_units(tmp_path):
    rng = np.random.default_rng(6)
    model = make_model(rng.normal(size=(3, 5, 2)))
    panel = PanelDataset.from_slices([rng.normal(size=(20, 2)) for _ in range(3)])
    bundle = build_bundle(model, panel)
    render_report(model, panel, bundle, tmp_path)
    svg = (tmp_path / "sammon-net.svg").read_text()
    assert ("#d7191c" in svg) == bool(bundle.te_units.any())
    assert "stroke-dasharray" in svg


def test_bundle_invariants(toy_model, toy_std):
    b = build_bundle(toy_model, toy_std[0], ["e001"])
    assert b.unit_colors.shape == (5, 10, 3)
    assert b.sammon_y.shape == b.frequency.shape == b.idle.shape == (5, 10)
    assert np.array_equal(b.idle, b.frequency == 0)
    assert b.unit_colors.min() >= 0 and b.unit_colors.max() <= 255
