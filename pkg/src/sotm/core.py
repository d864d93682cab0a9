"""Panel data, standardization, trained models and their file formats."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import TrainConfig
from .errors import (
    CorruptFile,
    DimensionMismatch,
    EmptySlice,
    MismatchedPanel,
    MissingValue,
    SchemaVersionMismatch,
    SotmError,
    ZeroVarianceVariable,
)

SCHEMA_VERSION = 1
MODEL_FORMAT = "sotm-model"


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def parse_time_labels(labels: Sequence[str]) -> list:
    """Parse time labels into comparable values.

    All labels must share one kind: integers, decimal numbers or ISO dates.
    """
    labels = [str(s).strip() for s in labels]
    for parse in (int, float, _dt.date.fromisoformat, _dt.datetime.fromisoformat):
        try:
            return [parse(s) for s in labels]
        except ValueError:
            continue
    raise SotmError("time labels must all be integers, numbers or ISO dates")


def sort_time_labels(labels: Iterable[str]) -> tuple[str, ...]:
    labels = list(dict.fromkeys(str(s).strip() for s in labels))
    keys = parse_time_labels(labels)
    order = sorted(range(len(labels)), key=lambda k: keys[k])
    return tuple(labels[k] for k in order)


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Entities observed over time on a fixed set of variables.

    Rows are stored sorted by (time, entity). ``entity_index`` and
    ``time_index`` point into ``entities`` and ``times``. The panel may be
    unbalanced, but every time slice holds at least one row.
    """

    entities: tuple[str, ...]
    times: tuple[str, ...]
    variables: tuple[str, ...]
    entity_index: np.ndarray
    time_index: np.ndarray
    values: np.ndarray
    _offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        entities = tuple(str(e) for e in self.entities)
        times = tuple(str(t).strip() for t in self.times)
        variables = tuple(str(v) for v in self.variables)
        if not times:
            raise SotmError("panel needs at least one time slice")
        if not variables:
            raise SotmError("panel needs at least one variable")
        if len(set(times)) != len(times):
            raise SotmError("time labels must be unique")
        if len(set(entities)) != len(entities):
            raise SotmError("entity identifiers must be unique")
        keys = parse_time_labels(times)
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise SotmError("time labels must be sorted ascending")

        values = np.asarray(self.values, dtype=float)
        ei = np.asarray(self.entity_index, dtype=np.int64).ravel()
        ti = np.asarray(self.time_index, dtype=np.int64).ravel()
        if values.ndim != 2 or values.shape[1] != len(variables):
            raise DimensionMismatch(
                f"values must have shape (N, {len(variables)}), got {values.shape}"
            )
        if not (len(ei) == len(ti) == values.shape[0]):
            raise DimensionMismatch("index arrays and values disagree in length")
        if not np.all(np.isfinite(values)):
            raise SotmError("panel values must be finite")
        if len(ei) and (ei.min() < 0 or ei.max() >= len(entities)):
            raise SotmError("entity index out of range")
        if len(ti) and (ti.min() < 0 or ti.max() >= len(times)):
            raise SotmError("time index out of range")

        order = np.lexsort((ei, ti))
        ei, ti, values = ei[order], ti[order], values[order]
        pairs = ti * max(len(entities), 1) + ei
        if len(pairs) > 1 and np.any(pairs[1:] == pairs[:-1]):
            raise SotmError("duplicate (entity, time) row")
        counts = np.bincount(ti, minlength=len(times))
        if np.any(counts == 0):
            raise EmptySlice(times[int(np.argmin(counts))])

        set_ = object.__setattr__
        set_(self, "entities", entities)
        set_(self, "times", times)
        set_(self, "variables", variables)
        set_(self, "entity_index", _frozen(ei, np.int64))
        set_(self, "time_index", _frozen(ti, np.int64))
        set_(self, "values", _frozen(values))
        set_(self, "_offsets", _frozen(np.concatenate([[0], np.cumsum(counts)]), np.int64))

    @property
    def T(self) -> int:
        return len(self.times)

    @property
    def D(self) -> int:
        return len(self.variables)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def counts(self) -> np.ndarray:
        """N(t) for every time slice."""
        return np.diff(self._offsets)

    def slice(self, t: int) -> np.ndarray:
        """Rows of time slice ``t`` (0-based position in ``times``)."""
        return self.values[self._offsets[t]:self._offsets[t + 1]]

    def slice_entities(self, t: int) -> np.ndarray:
        return self.entity_index[self._offsets[t]:self._offsets[t + 1]]

    def slices(self) -> list[np.ndarray]:
        return [self.slice(t) for t in range(self.T)]

    def with_values(self, values) -> PanelDataset:
        """Same entities, times and row layout with replaced values."""
        return PanelDataset(self.entities, self.times, self.variables,
                            self.entity_index, self.time_index, values)

    @classmethod
    def from_records(cls, records: Iterable[tuple], variables: Sequence[str]) -> PanelDataset:
        """Build a panel from ``(entity, time, vector)`` triples."""
        records = [(str(e), str(t).strip(), v) for e, t, v in records]
        entities = tuple(dict.fromkeys(r[0] for r in records))
        times = sort_time_labels(r[1] for r in records)
        e_pos = {e: k for k, e in enumerate(entities)}
        t_pos = {t: k for k, t in enumerate(times)}
        values = np.array([np.asarray(r[2], dtype=float) for r in records], dtype=float)
        if values.size == 0:
            values = values.reshape(0, len(variables))
        return cls(entities, times, tuple(variables),
                   [e_pos[r[0]] for r in records], [t_pos[r[1]] for r in records], values)

    @classmethod
    def from_slices(cls, slices: Sequence, times: Sequence[str] | None = None,
                    variables: Sequence[str] | None = None) -> PanelDataset:
        """Build a panel from per-time arrays; row ``j`` of every slice is entity ``e{j+1}``."""
        slices = [np.asarray(s, dtype=float) for s in slices]
        # 1-D slices hold scalar observations
        slices = [s.reshape(-1, 1) if s.ndim == 1 else s for s in slices]
        if not slices:
            raise SotmError("panel needs at least one time slice")
        D = slices[0].shape[1]
        times = tuple(str(t) for t in (times or range(1, len(slices) + 1)))
        variables = tuple(variables or (f"x{k + 1}" for k in range(D)))
        n_ent = max(s.shape[0] for s in slices)
        ei = np.concatenate([np.arange(s.shape[0]) for s in slices])
        ti = np.concatenate([np.full(s.shape[0], t) for t, s in enumerate(slices)])
        return cls(tuple(f"e{j + 1}" for j in range(n_ent)), times, variables,
                   ei, ti, np.vstack(slices))


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-variable affine map between original units and z-scores."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = _frozen(self.means).ravel()
        stds = _frozen(self.stds).ravel()
        if means.shape != stds.shape or means.size == 0:
            raise DimensionMismatch("means and stds must be nonempty vectors of equal length")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(stds)) and np.all(stds > 0)):
            raise SotmError("scaler needs finite means and finite positive stds")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def D(self) -> int:
        return self.means.size

    @classmethod
    def fit(cls, values, names: Sequence[str] | None = None) -> Scaler:
        """Fit on pooled rows using the sample standard deviation (ddof=1)."""
        values = np.asarray(values, dtype=float)
        names = names or [f"x{k + 1}" for k in range(values.shape[1])]
        if values.shape[0] < 2:
            raise ZeroVarianceVariable(names[0])
        means = values.mean(axis=0)
        stds = values.std(axis=0, ddof=1)
        for name, s in zip(names, stds):
            if not s > 0:
                raise ZeroVarianceVariable(name)
        return cls(means, stds)

    def _check(self, values: np.ndarray):
        if values.shape[-1] != self.D:
            raise DimensionMismatch(f"expected {self.D} components, got {values.shape[-1]}")

    def transform(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        self._check(values)
        return (values - self.means) / self.stds

    def inverse_transform(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        self._check(values)
        return values * self.stds + self.means

    def apply(self, panel: PanelDataset) -> PanelDataset:
        return panel.with_values(self.transform(panel.values))

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}


def standardize(panel: PanelDataset) -> tuple[PanelDataset, Scaler]:
    """Z-score every variable over the pooled panel.

    Raises :class:`ZeroVarianceVariable` naming the first constant variable.
    """
    scaler = Scaler.fit(panel.values, panel.variables)
    return scaler.apply(panel), scaler


def destandardize(vector, scaler: Scaler) -> np.ndarray:
    return scaler.inverse_transform(vector)


# -- panel CSV ---------------------------------------------------------------

def read_panel_csv(path_or_file, impute: bool = False) -> PanelDataset:
    """Read a panel from ``entity,time,<var1>,...,<varD>`` CSV.

    Empty cells are missing values. They raise :class:`MissingValue` unless
    ``impute`` is set, in which case they are filled with the pooled mean of
    the observed values of that variable.
    """
    if isinstance(path_or_file, (str, Path)):
        with open(path_or_file, newline="") as fh:
            return read_panel_csv(fh, impute=impute)
    reader = csv.reader(path_or_file)
    try:
        header = next(reader)
    except StopIteration:
        raise SotmError("empty panel CSV") from None
    header = [h.strip() for h in header]
    if len(header) < 3 or header[0].lower() != "entity" or header[1].lower() != "time":
        raise SotmError("panel CSV header must be entity,time,<variables...>")
    variables = header[2:]
    D = len(variables)

    records = []
    missing = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != D + 2:
            raise SotmError(f"line {lineno}: expected {D + 2} fields, got {len(row)}")
        vec = np.empty(D)
        for k, cell in enumerate(row[2:]):
            cell = cell.strip()
            if cell == "":
                vec[k] = np.nan
                missing.append((lineno, variables[k]))
                continue
            try:
                vec[k] = float(cell)
            except ValueError:
                raise SotmError(f"line {lineno}: non-numeric value {cell!r} "
                                f"for {variables[k]!r}") from None
            if not math.isfinite(vec[k]):
                raise SotmError(f"line {lineno}: non-finite value for {variables[k]!r}")
        records.append((row[0].strip(), row[1].strip(), vec))

    if missing and not impute:
        lineno, var = missing[0]
        raise MissingValue(f"line {lineno}: missing value for {var!r} "
                           f"({len(missing)} missing cells; use mean imputation to fill)")
    if missing:
        block = np.array([r[2] for r in records])
        means = np.nanmean(block, axis=0)
        if np.any(np.isnan(means)):
            bad = variables[int(np.argmax(np.isnan(means)))]
            raise MissingValue(f"variable {bad!r} has no observed values")
        records = [(e, t, np.where(np.isnan(v), means, v)) for e, t, v in records]
    if not records:
        raise SotmError("panel CSV has no data rows")
    return PanelDataset.from_records(records, variables)


def write_panel_csv(panel: PanelDataset, path_or_file) -> None:
    if isinstance(path_or_file, (str, Path)):
        with open(path_or_file, "w", newline="") as fh:
            return write_panel_csv(panel, fh)
    w = csv.writer(path_or_file, lineterminator="\n")
    w.writerow(["entity", "time", *panel.variables])
    for e, t, row in zip(panel.entity_index, panel.time_index, panel.values):
        w.writerow([panel.entities[e], panel.times[t], *(repr(float(v)) for v in row)])


# -- trained model ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SotmModel:
    """A trained Self-Organizing Time Map.

    ``arrays`` has shape (T, M, D): one one-dimensional array of M reference
    vectors per time slice, in ascending time order, in standardized space.
    """

    arrays: np.ndarray
    sigma: float
    config: TrainConfig
    scaler: Scaler
    times: tuple[str, ...]
    variables: tuple[str, ...]

    def __post_init__(self):
        arrays = np.asarray(self.arrays, dtype=float)
        if arrays.ndim != 3 or arrays.shape[0] < 1:
            raise SotmError("model needs at least one array (T >= 1)")
        T, M, D = arrays.shape
        if M < 2:
            raise SotmError("model needs at least two units per array (M >= 2)")
        if not np.all(np.isfinite(arrays)):
            raise SotmError("reference vectors must be finite")
        if len(self.times) != T:
            raise DimensionMismatch(f"{len(self.times)} time labels for {T} arrays")
        if len(self.variables) != D or self.scaler.D != D:
            raise DimensionMismatch("variables, scaler and reference vectors disagree on D")
        object.__setattr__(self, "arrays", _frozen(arrays))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "times", tuple(str(t) for t in self.times))
        object.__setattr__(self, "variables", tuple(str(v) for v in self.variables))

    @property
    def T(self) -> int:
        return self.arrays.shape[0]

    @property
    def M(self) -> int:
        return self.arrays.shape[1]

    @property
    def D(self) -> int:
        return self.arrays.shape[2]

    def check_panel(self, panel: PanelDataset) -> None:
        """Raise :class:`MismatchedPanel` unless ``panel`` lines up with this model."""
        if panel.D != self.D:
            raise MismatchedPanel(f"panel has {panel.D} variables, model has {self.D}")
        if tuple(panel.times) != self.times:
            raise MismatchedPanel("panel time labels differ from the model's")

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "schema_version": SCHEMA_VERSION,
            "T": self.T,
            "M": self.M,
            "D": self.D,
            "sigma": self.sigma,
            "config": self.config.to_dict(),
            "scaler": self.scaler.to_dict(),
            "times": list(self.times),
            "variables": list(self.variables),
            "arrays": self.arrays.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> SotmModel:
        if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
            raise CorruptFile("not a SOTM model document")
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise SchemaVersionMismatch(
                f"model schema version {doc.get('schema_version')!r}, "
                f"this library reads version {SCHEMA_VERSION}"
            )
        try:
            arrays = np.array(doc["arrays"], dtype=float)
            if arrays.shape != (doc["T"], doc["M"], doc["D"]):
                raise CorruptFile(f"arrays shape {arrays.shape} disagrees with header")
            return cls(
                arrays=arrays,
                sigma=doc["sigma"],
                config=TrainConfig.from_dict(doc["config"]),
                scaler=Scaler(doc["scaler"]["means"], doc["scaler"]["stds"]),
                times=tuple(doc["times"]),
                variables=tuple(doc["variables"]),
            )
        except CorruptFile:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptFile(f"malformed model document: {exc}") from exc


def dump_json(obj, fh) -> None:
    # repr-based float output round-trips every double exactly
    json.dump(obj, fh, indent=1, sort_keys=True, allow_nan=False)
    fh.write("\n")


def save_model(model: SotmModel, path) -> None:
    if not isinstance(model, SotmModel):
        raise SotmError("save_model expects a SotmModel")
    doc = model.to_dict()
    buf = io.StringIO()
    dump_json(doc, buf)
    Path(path).write_text(buf.getvalue())


def load_model(path) -> SotmModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path}: invalid JSON ({exc.msg})") from exc
    except UnicodeDecodeError as exc:
        raise CorruptFile(f"{path}: not a text file") from exc
    return SotmModel.from_dict(doc)


# -- quality report -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QualityReport:
    """Aggregate and per-time quality measures of a SOTM.

    ``sc_t`` has T-1 entries, one for each of the time slices 2..T.
    """

    qe_total: float
    dm_total: float
    te_total: float
    sc_total: float
    qe_t: np.ndarray
    dm_t: np.ndarray
    te_t: np.ndarray
    sc_t: np.ndarray
    times: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("qe_t", "dm_t", "te_t", "sc_t"):
            object.__setattr__(self, name, _frozen(getattr(self, name)).ravel())
        T = self.qe_t.size
        if not (self.dm_t.size == self.te_t.size == T and self.sc_t.size == max(T - 1, 0)):
            raise DimensionMismatch("per-time sequences have inconsistent lengths")
        if not self.times:
            object.__setattr__(self, "times", tuple(str(t) for t in range(1, T + 1)))

    def totals(self) -> dict:
        return {"qe": self.qe_total, "dm": self.dm_total,
                "te": self.te_total, "sc": self.sc_total}

    def to_dict(self) -> dict:
        return {
            "totals": self.totals(),
            "times": list(self.times),
            "qe_t": self.qe_t.tolist(),
            "dm_t": self.dm_t.tolist(),
            "te_t": self.te_t.tolist(),
            "sc_t": self.sc_t.tolist(),
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            dump_json(self.to_dict(), fh)

    def write_csv(self, path_or_file) -> None:
        """Per-time table with columns t, qe, dm, te, sc (sc empty at the first slice)."""
        if isinstance(path_or_file, (str, Path)):
            with open(path_or_file, "w", newline="") as fh:
                return self.write_csv(fh)
        w = csv.writer(path_or_file, lineterminator="\n")
        w.writerow(["t", "qe", "dm", "te", "sc"])
        for k, t in enumerate(self.times):
            sc = repr(float(self.sc_t[k - 1])) if k > 0 else ""
            w.writerow([t, repr(float(self.qe_t[k])), repr(float(self.dm_t[k])),
                        repr(float(self.te_t[k])), sc])
