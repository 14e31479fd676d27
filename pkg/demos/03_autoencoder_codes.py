"""Train a small dense autoencoder and classify its coding-layer output.

The preset factors [2, 4, 5] shrink a 1000-sample segment to a 25-value
code at 2 kHz (200 at 16 kHz).  A KNN classifier then runs on the codes.
"""

from nilmrec import classify, nn
from nilmrec.core import make_context, make_rng
from nilmrec.evaluation import SplitSpec, macro_metrics, stratified_split
from nilmrec.features import FeatureMatrix
from nilmrec.ingest import default_signatures, generate_dataset
from nilmrec.transform import fit_norm

ctx = make_context(2000, 50, 0.5)
ds = generate_dataset(default_signatures(5), 40, ctx, make_rng(3, "demo-data"))
train, val, test = stratified_split(ds, SplitSpec(), make_rng(3, "split"))

# a larger step than the preset so 40 epochs suffice here
cfg = nn.scale_config(nn.preset("ukdale-ae"), ctx, epochs=40).replace(learning_rate=1e-3)
net = nn.build_from_config(cfg, ctx)
print(net.summary())

norm = fit_norm(train.currents(), cfg.input_norm)
x_tr, x_va, x_te = (norm.transform(d.currents()) for d in (train, val, test))
net, hist = nn.train_network(net, (x_tr, x_tr), (x_va, x_va), cfg, make_rng(3, "ae"))
print(f"trained {hist.epochs_run} epochs, best validation MSE {min(hist.val_loss):.4f}")

codes = {name: nn.encode(net, x) for name, x in (("train", x_tr), ("test", x_te))}
fm = FeatureMatrix(codes["train"], tuple(f"code_{j}" for j in range(net.coding_width)),
                   tuple(train.labels), ds.class_names)
model = classify.train("knn", fm)
pred = model.predict(codes["test"])
m = macro_metrics(test.labels, pred, ds.class_names)
print(f"KNN on AE codes: macro F {m.macro_f:.3f}")
print("per class F:", {c: round(float(f), 3) for c, f in zip(ds.class_names, m.f_score)})
