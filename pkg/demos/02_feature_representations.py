"""Compare the fixed-length representations of one synthetic dataset.

Hand-crafted features, the per-cycle RMS vector, random sub-sampling and
PCA of the raw current each turn a 1000-sample segment into a short vector.
"""

import numpy as np

from nilmrec.core import make_context, make_rng
from nilmrec.features import (FeatureConfig, RandomSubsampler, extract_handcrafted,
                              extract_matrix, rms25)
from nilmrec.ingest import default_signatures, generate_dataset
from nilmrec.transform import apply, fit_norm, fit_pca

ctx = make_context(2000, 50, 0.5)
ds = generate_dataset(default_signatures(4), 20, ctx, make_rng(7, "demo-data"))
print(f"{len(ds)} segments, classes {ds.class_names}")

# %% hand-crafted features of the first segment
fv = extract_handcrafted(ds.segments[0])
for name in ("active_power", "reactive_power", "phase_shift", "thd", "crest_factor",
             "inrush_current_ratio"):
    print(f"  {name:22s} {fv.as_dict()[name]: .4f}")
print(f"default configuration: {len(FeatureConfig().column_names())} columns")

# %% per-class mean of the 25 cycle RMS values
r = extract_matrix(ds, rms25)
y = r.label_indices()
for k, name in enumerate(ds.class_names):
    mean = r.values[y == k].mean(axis=0)
    print(f"  {name:16s} first cycle {mean[0]:6.2f} A, last cycle {mean[-1]:6.2f} A")

# %% random sub-sampling shares one index set across all segments
sub = RandomSubsampler(ctx.samples_per_segment, 64, make_rng(7, "demo-subsample"))
rs = extract_matrix(ds, sub)
print(f"random sub-sampling: {rs.shape}, first indices {sub.indices[:6]}")

# %% PCA on z-scored raw current
raw = ds.currents()
norm = fit_norm(raw, "variance", use_std=True)
pca = fit_pca(norm.transform(raw), 10)
share = pca.explained_variances / np.var(norm.transform(raw), axis=0, ddof=1).sum()
print("explained variance share of the first 10 components:", np.round(share, 3))
print("projected shape:", apply(pca, norm.transform(raw)).shape)
