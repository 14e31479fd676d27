"""Run a reduced model x classifier benchmark and write plot-ready reports.

The full suite (all seven models, 8 classes x 100 segments, 50 epochs)
takes a few minutes; this version trims the networks to keep it short.
"""

from pathlib import Path

from nilmrec.benchmark import format_table, write_reports
from nilmrec.experiment import ExperimentConfig, run_experiment

cfg = ExperimentConfig(classes=6, per_class=40, epochs=10, seed=5, out="demo_results",
                       models=("handcrafted", "rms25", "random_subsample", "pca", "cnn"))
reports = run_experiment(cfg)
print(format_table(reports))

paths = write_reports(reports, cfg.out)
print("\nwrote", ", ".join(str(p) for p in paths.values()))

best = max(reports, key=lambda r: r.macro_f)
print(f"best: {best.label} (macro F {best.macro_f:.3f})")
print(f"row sums of its normalized confusion: {best.confusion.normalized.sum(axis=1)}")
assert Path(cfg.out, "reports.json").exists()
