"""Self-Organizing Time Maps: per-time-slice batch SOMs with short-term memory."""

__version__ = "0.1.0"

from .config import TrainConfig
from .core import (
    PanelDataset,
    QualityReport,
    Scaler,
    SotmModel,
    destandardize,
    load_model,
    read_panel_csv,
    save_model,
    standardize,
    write_panel_csv,
)
from .errors import SotmError
from .metrics import distortion, quality, quantization_error, structural_change, topographic_error
from .toygen import ToyWeights, default_preset, generate_toy
from .trainer import (
    batch_cycle,
    find_bmu,
    fit_sotm,
    pca_init,
    select_sigma,
    sigma_sweep,
    train_pooled_baseline,
    train_slice,
    train_sotm,
)

__all__ = [
    "PanelDataset", "QualityReport", "Scaler", "SotmModel", "SotmError", "ToyWeights",
    "TrainConfig", "batch_cycle", "default_preset", "destandardize", "distortion",
    "find_bmu", "fit_sotm", "generate_toy", "load_model", "pca_init", "quality",
    "quantization_error", "read_panel_csv", "save_model", "select_sigma", "sigma_sweep",
    "standardize", "structural_change", "topographic_error", "train_pooled_baseline",
    "train_slice", "train_sotm", "write_panel_csv",
]
