import numpy as np
import pytest

from sotm import TrainConfig, default_preset, generate_toy, standardize, train_sotm
from sotm.core import PanelDataset, Scaler, SotmModel

TOY_SIGMA = 1.6


@pytest.fixture(scope="session")
def toy():
    return generate_toy(default_preset(7))


@pytest.fixture(scope="session")
def toy_std(toy):
    return standardize(toy.panel)


@pytest.fixture(scope="session")
def toy_model(toy_std):
    panel, scaler = toy_std
    return train_sotm(panel, TrainConfig(M=5, sigma=TOY_SIGMA, seed=7), scaler)


def make_model(arrays, sigma=1.0, scaler=None, times=None):
    """Wrap raw (T, M, D) arrays in a model with an identity scaler."""
    arrays = np.asarray(arrays, dtype=float)
    T, M, D = arrays.shape
    scaler = scaler or Scaler(np.zeros(D), np.ones(D))
    return SotmModel(arrays, sigma, TrainConfig(M=M, sigma=sigma), scaler,
                     tuple(times or (str(t + 1) for t in range(T))),
                     tuple(f"x{k + 1}" for k in range(D)))


def random_panel(rng, T=3, n=(1, 10), D=2) -> PanelDataset:
    slices = [rng.normal(size=(int(rng.integers(n[0], n[1] + 1)), D)) for _ in range(T)]
    return PanelDataset.from_slices(slices)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (
        f" ({detail})" if detail else "")
    print(ACCEPTANCE[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
