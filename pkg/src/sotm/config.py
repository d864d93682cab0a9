from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import SotmError


@dataclass(frozen=True)
class TrainConfig:
    """Training settings for a SOTM.

    ``first_slice_tol`` is the maximum per-component displacement below which
    training of the first array stops early. Later arrays always run exactly
    ``cycles_per_slice`` batch cycles. ``seed`` is carried for provenance only;
    training itself draws no random numbers.
    """

    M: int
    sigma: float
    first_slice_max_cycles: int = 100
    first_slice_tol: float = 1e-6
    cycles_per_slice: int = 10
    seed: int | None = None

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise SotmError(f"M must be an integer >= 2, got {self.M!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise SotmError(f"sigma must be finite and positive, got {self.sigma!r}")
        if self.first_slice_max_cycles < 1 or self.cycles_per_slice < 1:
            raise SotmError("cycle counts must be >= 1")
        if not (math.isfinite(self.first_slice_tol) and self.first_slice_tol > 0):
            raise SotmError("first_slice_tol must be finite and positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> TrainConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SotmError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> TrainConfig:
        return TrainConfig(**{**self.to_dict(), **changes})
