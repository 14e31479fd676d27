"""Command line entry point: ``nilmrec generate | detect | benchmark``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .core import make_context, make_rng
from .errors import FormatError, NilmError
from .events import (EventThresholds, default_thresholds, detect_events,
                     load_threshold_table)
from .experiment import ExperimentConfig, run_experiment
from .ingest import PowerSeries, default_signatures, generate_dataset, write_segments
from .modelfile import save_models
from .benchmark import format_table, write_reports

log = logging.getLogger("nilmrec")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def read_power_csv(path) -> PowerSeries:
    """Read ``timestamp, watts`` rows; a non-numeric first row is a header."""
    ts, watts = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise FormatError(f"{path}:{lineno}: expected 'timestamp, watts'")
            try:
                t, p = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1:
                    continue
                raise FormatError(f"{path}:{lineno}: non-numeric value in {row}") from None
            ts.append(t)
            watts.append(p)
    if not ts:
        raise FormatError(f"{path}: no samples")
    try:
        return PowerSeries(ts, watts)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def cmd_generate(args) -> int:
    ctx = make_context(args.fs, args.f0, args.duration)
    sigs = default_signatures(args.classes, noise_std=args.noise)
    ds = generate_dataset(sigs, args.per_class, ctx, make_rng(args.seed, "data"))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_segments(ds, out)
    print(f"wrote {len(ds)} segments of {len(ds.class_names)} classes to {out}")
    return 0


def cmd_detect(args) -> int:
    overrides = load_threshold_table(args.thresholds) if args.thresholds else None
    if args.on is not None or args.off is not None:
        if args.on is None or args.off is None:
            raise SystemExit("detect: --on and --off must be given together")
        th = EventThresholds(args.on, args.off)
    else:
        th = default_thresholds(args.appliance, overrides)
    events = detect_events(read_power_csv(args.power_csv), th)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "timestamp"])
        for e in events:
            w.writerow([e.kind.value, repr(e.timestamp)])
    print(f"{len(events)} events ({th.on:g} W on / {th.off:g} W off) -> {out}")
    return 0


def _benchmark_config(args) -> ExperimentConfig:
    base = json.loads(Path(args.config).read_text()) if args.config else {}
    cfg = ExperimentConfig.from_dict(base)
    changes = {}
    for flag, key in (("fs", "f_s"), ("f0", "f_0"), ("duration", "duration"), ("seed", "seed"),
                      ("out", "out"), ("data", "data_path"), ("classes", "classes"),
                      ("per_class", "per_class"), ("epochs", "epochs"), ("dims", "dims"),
                      ("feature_norm", "feature_norm")):
        value = getattr(args, flag)
        if value is not None:
            changes[key] = value
    if args.models:
        changes["models"] = tuple(_csv_list(args.models))
    if args.classifiers:
        changes["classifiers"] = tuple(_csv_list(args.classifiers))
    if args.preset:
        from .nn import preset
        presets = dict(cfg.presets)
        for name in args.preset:
            presets[preset(name).architecture.value] = name
        changes["presets"] = presets
    merged = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    merged.update(changes)
    return ExperimentConfig(**merged)


def cmd_benchmark(args) -> int:
    cfg = _benchmark_config(args)
    reports = run_experiment(cfg)
    paths = write_reports(reports, cfg.out)
    if args.save_models:
        entries = {}
        for i, r in enumerate(reports):
            for key, obj in r.artifacts.items():
                entries[f"{i:02d}:{r.label}:{key}"] = obj
        save_models(Path(cfg.out) / "models.nilmmdl", entries)
    print(format_table(reports))
    print(f"\nreports written to {paths['json'].parent}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nilmrec", description="Event-based appliance recognition")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic segment file")
    g.add_argument("--classes", type=int, default=8)
    g.add_argument("--per-class", type=int, default=100)
    g.add_argument("--fs", type=int, default=2000)
    g.add_argument("--f0", type=int, default=50)
    g.add_argument("--duration", type=float, default=0.5)
    g.add_argument("--noise", type=float, default=0.02, help="current noise std (A)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("detect", help="threshold event detection on a power CSV")
    d.add_argument("power_csv")
    d.add_argument("--appliance", default="blond_default")
    d.add_argument("--thresholds", help="file of 'name, on, off' lines overriding built-ins")
    d.add_argument("--on", type=float)
    d.add_argument("--off", type=float)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_detect)

    b = sub.add_parser("benchmark", help="run the model x classifier benchmark")
    b.add_argument("--config", help="JSON experiment config")
    b.add_argument("--data", help="segment file (default: synthetic data)")
    b.add_argument("--classes", type=int)
    b.add_argument("--per-class", type=int)
    b.add_argument("--fs", type=int)
    b.add_argument("--f0", type=int)
    b.add_argument("--duration", type=float)
    b.add_argument("--models")
    b.add_argument("--classifiers")
    b.add_argument("--preset", action="append", help="network preset, e.g. ukdale-cnn")
    b.add_argument("--epochs", type=int)
    b.add_argument("--dims", type=int)
    b.add_argument("--feature-norm", choices=("maxabs", "variance"))
    b.add_argument("--seed", type=int)
    b.add_argument("--out")
    b.add_argument("--save-models", action="store_true")
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (NilmError, ValueError, KeyError, OSError) as exc:
        print(f"nilmrec {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
