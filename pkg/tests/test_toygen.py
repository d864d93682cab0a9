import numpy as np
import pytest

from sotm import ToyWeights, default_preset, generate_toy
from sotm.errors import SotmError
from sotm.toygen import generate_cube, logistic, read_groups_csv, write_groups_csv


def zeros(R=2, G=3, **kw):
    z = np.zeros(R)
    return dict(w1=z, w2=z, w3=z, w4=z, w5=z, G=G, **kw)


def test_all_zero_weights_give_half():
    cube = generate_cube(ToyWeights(**zeros(n_per_group=4, T=6)))
    assert np.all(cube == 0.5)


def test_slope_only_closed_form():
    kw = zeros(n_per_group=3, T=8, seed=11)
    kw["w2"] = np.array([0.7, 0.0])
    cube = generate_cube(ToyWeights(**kw))
    rng = np.random.default_rng(11)
    rng.standard_normal(3)
    e2 = rng.uniform(0, 1, 3)
    t = np.arange(1, 9)
    for g in range(3):
        expected = logistic(0.7 * e2[g] * t)
        assert np.allclose(cube[0, g], expected[None, :], rtol=0, atol=1e-15)
        assert np.all(np.diff(cube[0, g], axis=-1) >= 0)
    assert np.all(cube[1] == 0.5)


def test_default_shape(toy):
    panel = toy.panel
    assert (len(panel.entities), panel.T, panel.D) == (100, 10, 4)
    assert sorted(set(toy.groups.values())) == ["g1", "g2", "g3", "g4", "g5"]
    assert all(list(toy.groups.values()).count(g) == 20 for g in set(toy.groups.values()))


def test_values_in_open_unit_interval(toy):
    assert np.all((toy.panel.values > 0) & (toy.panel.values < 1))


def test_same_seed_same_panel():
    a = generate_toy(default_preset(3)).panel.values
    b = generate_toy(default_preset(3)).panel.values
    c = generate_toy(default_preset(4)).panel.values
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def _cube(toy):
    R, G, n, T = 4, 5, 20, 10
    return toy.panel.values.reshape(T, G, n, R).transpose(3, 1, 2, 0)


def test_x3_flat(toy):
    cube = _cube(toy)
    t = np.arange(1, 11)
    for g in range(5):
        slope = np.polyfit(t, cube[2, g].mean(axis=0), 1)[0]
        assert abs(slope) < 0.005


def test_x4_common_shock_correlation(toy):
    cube = _cube(toy)
    # within-group deviations from each group's own time mean, averaged per group
    dev = cube[3].mean(axis=1) - cube[3].mean(axis=(1, 2))[:, None]     # (G, T)
    corr = np.corrcoef(dev)
    off = corr[~np.eye(5, dtype=bool)]
    assert off.mean() > 0.8


def test_x1_rises(toy):
    panel = toy.panel
    assert panel.slice(9)[:, 0].mean() > panel.slice(0)[:, 0].mean()


def test_x2_falls(toy):
    panel = toy.panel
    assert panel.slice(9)[:, 1].mean() < panel.slice(0)[:, 1].mean()


def test_group_shocks_shared_within_group():
    kw = zeros(R=1, G=2, n_per_group=5, T=4, seed=1)
    kw["w1"], kw["w3"] = np.array([1.0]), np.array([1.0])
    cube = generate_cube(ToyWeights(**kw))
    for g in range(2):
        assert np.all(cube[0, g] == cube[0, g, :1])


def test_common_shock_shared_across_groups():
    kw = zeros(R=2, G=3, n_per_group=2, T=5, seed=2)
    kw["w4"] = np.array([1.0, 0.5])
    cube = generate_cube(ToyWeights(**kw))
    assert np.all(cube == cube[:, :1, :1, :])


def test_weight_validation():
    kw = zeros()
    kw["w1"] = np.array([-1.0, 0.0])
    with pytest.raises(SotmError):
        ToyWeights(**kw)
    kw = zeros()
    kw["w2"] = np.array([-1.0, 0.0])
    ToyWeights(**kw)
    with pytest.raises(SotmError):
        ToyWeights(**zeros(G=0))
    kw = zeros()
    kw["w4"] = np.zeros((2, 7))
    with pytest.raises(SotmError):
        ToyWeights(**kw)


def test_groups_csv_round_trip(tmp_path, toy):
    path = tmp_path / "g.csv"
    write_groups_csv(toy.groups, path)
    assert read_groups_csv(path) == toy.groups
