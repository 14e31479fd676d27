"""The end-to-end CNN with pool sizes derived from the sampling context.

At 16 kHz the derivation gives seven blocks [5,2,2,2,2,2,2]; at the 2 kHz
desk rate it gives [5,2,2,2].  Either way the last block leaves one value
per mains cycle.
"""

import numpy as np

from nilmrec import nn
from nilmrec.core import make_context, make_rng
from nilmrec.evaluation import SplitSpec, confusion, macro_metrics, stratified_split
from nilmrec.ingest import default_signatures, generate_dataset
from nilmrec.transform import fit_norm

for fs in (16000, 50000, 2000):
    fv = nn.derive_cnn_architecture(make_context(fs, 50, 0.5))
    print(f"{fs:6d} Hz: factors {list(fv.factors)}, product {fv.product}")

ctx = make_context(2000, 50, 0.5)
ds = generate_dataset(default_signatures(6), 40, ctx, make_rng(4, "demo-data"))
train, val, test = stratified_split(ds, SplitSpec(), make_rng(4, "split"))

cfg = nn.scale_config(nn.preset("ukdale-cnn"), ctx, epochs=30)
net = nn.build_from_config(cfg, ctx, n_classes=len(ds.class_names))
print(net.summary())

norm = fit_norm(train.currents(), cfg.input_norm)
prep = lambda d: norm.transform(d.currents())[:, None, :]
net, hist = nn.train_network(net, (prep(train), train.label_indices()),
                             (prep(val), val.label_indices()), cfg, make_rng(4, "cnn"))
pred = [ds.class_names[i] for i in nn.predict_cnn(net, prep(test))]
m = macro_metrics(test.labels, pred, ds.class_names)
print(f"{hist.epochs_run} epochs, test macro F {m.macro_f:.3f}")
print("confusion (rows sum to 100):")
print(np.array2string(confusion(test.labels, pred, ds.class_names).normalized))
