"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data or model error, 4 I/O error.
Outputs default to ``$SOTM_OUTPUT_DIR`` (or the current directory).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import TrainConfig
from .core import dump_json, load_model, read_panel_csv, save_model, standardize, write_panel_csv
from .errors import SotmError
from .metrics import first_two_bmus, quality
from .toygen import default_preset, generate_toy, read_groups_csv, write_groups_csv
from .trainer import select_sigma, sigma_sweep, sq_dists, train_pooled_baseline, train_sotm
from .viz import build_bundle, render_report, trajectories

EXIT_USAGE, EXIT_DATA, EXIT_IO = 2, 3, 4
OUTPUT_ENV = "SOTM_OUTPUT_DIR"

log = logging.getLogger("sotm")


def parse_sigmas(text: str) -> list[float]:
    """``start:stop:step`` (both ends inclusive), a comma list, or one number."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            return [round(start + k * step, 10) for k in range(n)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sigma list {text!r}") from None


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _out_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "."))


def _out(path: str | None, default_name: str) -> Path:
    p = Path(path) if path else _out_dir() / default_name
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _config(args, sigma: float) -> TrainConfig:
    return TrainConfig(M=args.units, sigma=sigma, first_slice_max_cycles=args.first_cycles,
                       first_slice_tol=args.tol, cycles_per_slice=args.cycles, seed=args.seed)


def _load_std(args):
    """Model plus the input panel mapped with the model's own scaler."""
    model = load_model(args.model)
    panel = model.scaler.apply(read_panel_csv(args.input, impute=args.impute))
    return model, panel


def _selected_entities(args, panel) -> list[str]:
    if getattr(args, "all_entities", False):
        return list(panel.entities)
    if getattr(args, "entities", None):
        return [e.strip() for e in args.entities.split(",") if e.strip()]
    return []


# -- subcommands ------------------------------------------------------------------

def cmd_toygen(args) -> None:
    weights = default_preset(args.seed)
    if args.groups_count or args.per_group or args.periods:
        from dataclasses import replace
        G = args.groups_count or weights.G
        weights = replace(
            weights,
            w4=np.resize(weights.w4, (weights.R, G)) if G != weights.G else weights.w4,
            w5=np.resize(weights.w5, (weights.R, G)) if G != weights.G else weights.w5,
            G=G, n_per_group=args.per_group or weights.n_per_group, T=args.periods or weights.T,
        )
    toy = generate_toy(weights)
    out = _out(args.out, "toy.csv")
    groups = Path(args.groups) if args.groups else out.with_name(out.stem + "-groups.csv")
    write_panel_csv(toy.panel, out)
    write_groups_csv(toy.groups, groups)
    print(f"wrote {out} and {groups}")


def cmd_train(args) -> None:
    raw = read_panel_csv(args.input, impute=args.impute)
    panel, scaler = standardize(raw)
    model = train_sotm(panel, _config(args, args.sigma), scaler)
    report = quality(model, panel)
    model_path = _out(args.model, "model.json")
    save_model(model, model_path)
    q_path = _out(args.quality, "quality.csv")
    report.write_csv(q_path)
    print(f"wrote {model_path} and {q_path}; qe={report.qe_total:.6g} dm={report.dm_total:.6g} "
          f"te={report.te_total:.6g} sc={report.sc_total:.6g}")


def cmd_sweep(args) -> None:
    raw = read_panel_csv(args.input, impute=args.impute)
    panel, scaler = standardize(raw)
    sigmas = sorted(args.sigmas)
    rows = sigma_sweep(panel, args.units, sigmas, _config(args, sigmas[0]), scaler)
    out = _out(args.out, "sweep.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sigma", "qe", "dm", "te", "sc"])
        for s, r in rows:
            w.writerow([repr(s), *(repr(float(v)) for v in r.totals().values())])
    print(f"wrote {out} ({len(rows)} rows); selected sigma={select_sigma(rows):g}")


def cmd_quality(args) -> None:
    model, panel = _load_std(args)
    report = quality(model, panel)
    out = _out_dir() if args.out_dir is None else Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.write_json(out / "quality.json")
    report.write_csv(out / "quality.csv")
    print(f"wrote {out / 'quality.json'} and {out / 'quality.csv'}")


def cmd_render(args) -> None:
    model, panel = _load_std(args)
    groups = read_groups_csv(args.groups) if args.groups else None
    bundle = build_bundle(model, panel, _selected_entities(args, panel), groups)
    out = _out_dir() / "report" if args.out_dir is None else Path(args.out_dir)
    written = render_report(model, panel, bundle, out)
    print(f"wrote {len(written)} files to {out}")


def cmd_baseline(args) -> None:
    raw = read_panel_csv(args.input, impute=args.impute)
    panel, scaler = standardize(raw)
    units = train_pooled_baseline(panel, args.units, args.sigma, args.first_cycles, args.tol)
    d2 = sq_dists(panel.values, units)
    c1, c2 = first_two_bmus(d2)
    out = _out_dir() / "baseline" if args.out_dir is None else Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    orig = scaler.inverse_transform(units)
    with open(out / "baseline-units.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unit", *panel.variables])
        for i, row in enumerate(orig):
            w.writerow([i, *(repr(float(v)) for v in row)])
    # trajectories of every entity on the static map
    with open(out / "baseline-trajectories.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity", "time", "unit"])
        for e, t, c in zip(panel.entity_index, panel.time_index, c1):
            w.writerow([panel.entities[e], panel.times[t], int(c)])
    doc = {
        "M": args.units,
        "sigma": args.sigma,
        "variables": list(panel.variables),
        "units": units.tolist(),
        "units_original": orig.tolist(),
        "qe": float(np.sqrt(d2.min(axis=1)).mean()),
        "te": float(np.mean(np.abs(c1 - c2) > 1)),
        "frequency": np.bincount(c1, minlength=args.units).tolist(),
    }
    with open(out / "baseline.json", "w") as fh:
        dump_json(doc, fh)
    print(f"wrote baseline outputs to {out}")


def cmd_project(args) -> None:
    model, panel = _load_std(args)
    entities = _selected_entities(args, panel)
    if not entities:
        raise SotmError("no entities selected (use --entities or --all-entities)")
    traj = trajectories(model, panel, entities)
    out = _out(args.out, "trajectories.csv")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity", "time", "unit"])
        for e, seq in traj.items():
            for t, c in seq:
                w.writerow([e, model.times[t], c])
    print(f"wrote {out}")


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sotm", description="Self-Organizing Time Map toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def training_flags(sp, sigma=True):
        sp.add_argument("--input", "-i", required=True, help="panel CSV")
        sp.add_argument("--units", "-M", type=int, default=5, help="units per array")
        if sigma:
            sp.add_argument("--sigma", type=_positive_float, default=1.6)
        sp.add_argument("--first-cycles", type=int, default=100,
                        help="max batch cycles for the first array")
        sp.add_argument("--tol", type=_positive_float, default=1e-6,
                        help="convergence tolerance for the first array")
        sp.add_argument("--cycles", type=int, default=10, help="batch cycles per later array")
        sp.add_argument("--seed", type=int, default=None, help="recorded in the model")
        sp.add_argument("--impute", action="store_true",
                        help="fill missing cells with the pooled variable mean")

    def model_flags(sp):
        sp.add_argument("--model", "-m", required=True)
        sp.add_argument("--input", "-i", required=True, help="panel CSV")
        sp.add_argument("--impute", action="store_true")

    def entity_flags(sp):
        sp.add_argument("--entities", help="comma-separated entity ids")
        sp.add_argument("--all-entities", action="store_true")

    sp = sub.add_parser("toygen", help="write the synthetic toy panel")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--out", "-o")
    sp.add_argument("--groups", help="entity,group sidecar CSV path")
    sp.add_argument("--groups-count", type=int)
    sp.add_argument("--per-group", type=int)
    sp.add_argument("--periods", type=int)
    sp.set_defaults(func=cmd_toygen)

    sp = sub.add_parser("train", help="train a SOTM from a panel CSV")
    training_flags(sp)
    sp.add_argument("--model", "-m", help="output model JSON")
    sp.add_argument("--quality", "-q", help="output per-time quality CSV")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("sweep", help="quality measures over a list of radii")
    training_flags(sp, sigma=False)
    sp.add_argument("--sigmas", type=parse_sigmas, default=parse_sigmas("0.4:8:0.4"),
                    help="start:stop:step (inclusive) or comma list")
    sp.add_argument("--out", "-o")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("quality", help="quality report of a trained model")
    model_flags(sp)
    sp.add_argument("--out-dir", "-o")
    sp.set_defaults(func=cmd_quality)

    sp = sub.add_parser("render", help="write the SVG/JSON report")
    model_flags(sp)
    entity_flags(sp)
    sp.add_argument("--groups", help="entity,group CSV for trajectory colors")
    sp.add_argument("--out-dir", "-o")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("baseline", help="pooled one-dimensional SOM for comparison")
    training_flags(sp)
    sp.add_argument("--out-dir", "-o")
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("project", help="trajectory CSV for selected entities")
    model_flags(sp)
    entity_flags(sp)
    sp.add_argument("--out", "-o")
    sp.set_defaults(func=cmd_project)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except SotmError as exc:
        print(f"sotm: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"sotm: error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
