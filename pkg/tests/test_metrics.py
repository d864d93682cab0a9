import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sotm import quality
from sotm.core import PanelDataset
from sotm.errors import MismatchedPanel
from sotm.metrics import (
    distortion,
    quantization_error,
    structural_change,
    topographic_error,
    topographic_events,
)

import oracles
from conftest import make_model, random_panel


def random_instance(rng, T=3, M=None, D=None, sigma=None):
    M = M or int(rng.integers(2, 5))
    D = D or int(rng.integers(1, 4))
    panel = random_panel(rng, T=T, n=(1, 10), D=D)
    model = make_model(rng.normal(size=(T, M, D)), sigma or rng.uniform(0.3, 3.0))
    return model, panel


def test_exact_coverage_gives_zero_qe():
    model = make_model([[[0.0], [1.0]]])
    panel = PanelDataset.from_slices([[0.0, 1.0]])
    total, per_t = quantization_error(model, panel)
    assert total == 0.0 and per_t.tolist() == [0.0]


def test_measures_match_loop_oracles():
    rng = np.random.default_rng(0)
    for _ in range(100):
        model, panel = random_instance(rng)
        _, qe_t = quantization_error(model, panel)
        _, dm_t = distortion(model, panel)
        _, te_t = topographic_error(model, panel)
        _, sc_t = structural_change(model)
        for t in range(model.T):
            units, data = model.arrays[t].tolist(), panel.slice(t).tolist()
            assert qe_t[t] == pytest.approx(oracles.qe(units, data), abs=1e-12)
            assert dm_t[t] == pytest.approx(oracles.dm(units, data, model.sigma), abs=1e-12)
            assert te_t[t] == pytest.approx(oracles.te(units, data), abs=1e-12)
        for t in range(1, model.T):
            expected = oracles.sc(model.arrays[t - 1].tolist(), model.arrays[t].tolist())
            assert sc_t[t - 1] == pytest.approx(expected, abs=1e-12)


def test_te_five_units_against_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        model, panel = random_instance(rng, M=5)
        _, te_t = topographic_error(model, panel)
        for t in range(model.T):
            assert te_t[t] == oracles.te(model.arrays[t].tolist(), panel.slice(t).tolist())


def test_aggregates_are_means(toy_model, toy_std):
    rep = quality(toy_model, toy_std[0])
    assert abs(rep.qe_total - rep.qe_t.mean()) < 1e-12
    assert abs(rep.dm_total - rep.dm_t.mean()) < 1e-12
    assert abs(rep.te_total - rep.te_t.mean()) < 1e-12
    assert abs(rep.sc_total - rep.sc_t.sum() / (toy_model.T - 1)) < 1e-12
    assert rep.sc_t.size == toy_model.T - 1


def test_report_fields_equal_operations(toy_model, toy_std):
    panel = toy_std[0]
    rep = quality(toy_model, panel)
    for total, per_t, fn in [(rep.qe_total, rep.qe_t, quantization_error),
                             (rep.dm_total, rep.dm_t, distortion),
                             (rep.te_total, rep.te_t, topographic_error)]:
        a, b = fn(toy_model, panel)
        assert total == a and np.array_equal(per_t, b)
    a, b = structural_change(toy_model)
    assert rep.sc_total == a and np.array_equal(rep.sc_t, b)


def test_two_units_never_topographic_error():
    rng = np.random.default_rng(2)
    for _ in range(20):
        model, panel = random_instance(rng, M=2)
        assert topographic_error(model, panel)[0] == 0.0


def test_sc_identical_arrays_and_translation():
    base = np.random.default_rng(3).normal(size=(4, 3))
    model = make_model(np.stack([base] * 5))
    assert np.array_equal(structural_change(model)[1], np.zeros(4))
    delta = np.array([0.3, -0.4, 1.2])
    model = make_model(np.stack([base + k * delta for k in range(5)]))
    assert np.allclose(structural_change(model)[1], np.linalg.norm(delta), atol=1e-12)


def test_sc_single_slice():
    total, per_t = structural_change(make_model(np.zeros((1, 2, 1)) + [[[0], [1]]]))
    assert total == 0.0 and per_t.size == 0


def test_dm_vanishes_for_small_sigma_on_exact_fit():
    model = make_model([[[0.0], [1.0], [2.0]]], sigma=1e-3)
    panel = PanelDataset.from_slices([[0.0, 1.0, 2.0, 2.0]])
    assert distortion(model, panel)[0] < 1e-100


def test_dm_grows_with_sigma():
    rng = np.random.default_rng(4)
    for _ in range(30):
        model, panel = random_instance(rng, M=4)
        _, small = distortion(model, panel, 0.5)
        _, large = distortion(model, panel, 1.5)
        assert np.all(large > small)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_measures_nonnegative_and_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    model, panel = random_instance(rng)
    rep = quality(model, panel)
    assert min(rep.qe_total, rep.dm_total, rep.te_total, rep.sc_total) >= 0
    assert np.all((rep.te_t >= 0) & (rep.te_t <= 1))
    perm = rng.permutation(panel.N)
    shuffled = PanelDataset(panel.entities, panel.times, panel.variables,
                            panel.entity_index[perm], panel.time_index[perm],
                            panel.values[perm])
    rep2 = quality(model, shuffled)
    assert rep2.qe_t == pytest.approx(rep.qe_t, abs=1e-12)
    assert rep2.dm_t == pytest.approx(rep.dm_t, abs=1e-12)
    assert np.array_equal(rep2.te_t, rep.te_t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 4.0), st.floats(0.0, 4.0))
def test_dm_monotone_in_sigma(seed, s, ds):
    rng = np.random.default_rng(seed)
    model, panel = random_instance(rng)
    _, a = distortion(model, panel, s)
    _, b = distortion(model, panel, s + ds)
    assert np.all(b >= a - 1e-15)


def test_event_count_matches_te():
    rng = np.random.default_rng(5)
    model, panel = random_instance(rng, T=4, M=5)
    _, te_t = topographic_error(model, panel)
    events = topographic_events(model, panel)
    for t in range(model.T):
        assert len(events[t]) == round(te_t[t] * panel.counts[t])


def test_mismatched_panel():
    model = make_model(np.zeros((2, 3, 2)) + np.arange(3)[None, :, None])
    with pytest.raises(MismatchedPanel):
        quality(model, PanelDataset.from_slices([np.eye(3)] * 2))
