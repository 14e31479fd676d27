import itertools

import numpy as np
import pytest

from nilmrec import classify
from nilmrec.core import make_rng
from nilmrec.errors import DimMismatch, EmptyTrainSet, SingleClass
from nilmrec.features import FeatureMatrix


def fm(x, labels, classes=None):
    x = np.asarray(x, dtype=float)
    x = x[:, None] if x.ndim == 1 else x
    classes = classes or tuple(sorted(set(labels)))
    return FeatureMatrix(x, tuple(f"f{j}" for j in range(x.shape[1])), tuple(labels), classes)


def blobs(seed, n=30, k=3, d=2, spread=0.3):
    rng = make_rng(seed)
    centers = rng.normal(0, 4, size=(k, d))
    x = np.concatenate([c + spread * rng.normal(size=(n, d)) for c in centers])
    labels = [f"c{j}" for j in range(k) for _ in range(n)]
    return x, labels


def accuracy(model, x, labels):
    return np.mean(np.array(model.predict(x)) == np.array(labels))


def test_knn_k1_reproduces_training_labels():
    x, y = blobs(0)
    m = classify.train("knn", fm(x, y), {"k": 1})
    assert m.predict(x) == y


def test_lda_symmetric_boundary():
    rng = make_rng(1)
    a = rng.normal(size=(200, 2)) + [-1, 0]
    b = rng.normal(size=(200, 2)) + [1, 0]
    # make the sample means and covariances exactly mirror images
    a = np.concatenate([a, -b])
    b = -a
    m = classify.train("lda", fm(np.concatenate([a, b]), ["1"] * 400 + ["2"] * 400))
    assert m.predict(np.array([[2.0, 0.0]])) == ["2"]
    assert m.predict(np.array([[-0.01, 3.0], [0.01, -3.0]])) == ["1", "2"]


def test_lda_affine_and_translation_invariance():
    x, y = blobs(2, d=3)
    test = blobs(3, d=3)[0]
    base = classify.train("lda", fm(x, y)).predict(test)
    shift = np.array([5.0, -2.0, 100.0])
    assert classify.train("lda", fm(x + shift, y)).predict(test + shift) == base
    a = make_rng(4).normal(size=(3, 3)) + 3 * np.eye(3)
    assert classify.train("lda", fm(x @ a.T + shift, y)).predict(test @ a.T + shift) == base


def test_bdt_three_points():
    x = np.repeat([0.0, 10.0, 20.0], 4)
    y = ["0"] * 4 + ["1"] * 4 + ["2"] * 4
    m = classify.train("bdt", fm(x, y))
    assert accuracy(m, x[:, None], y) == 1.0
    assert classify.tree_depth(m) >= 2
    # exhaustive oracle: no single threshold separates three classes
    for t in np.unique(x):
        left = {c for v, c in zip(x, y) if v <= t}
        right = {c for v, c in zip(x, y) if v > t}
        assert len(left) > 1 or len(right) > 1
    np.testing.assert_array_equal(m.predict_indices(np.array([[4.0], [6.0], [16.0]])), [0, 1, 2])


def test_bdt_accuracy_non_decreasing_in_depth():
    x, y = blobs(5, k=4, spread=2.0)
    accs = [accuracy(classify.train("bdt", fm(x, y), {"max_depth": d, "min_leaf": 1}), x, y)
            for d in range(1, 10)]
    assert all(b >= a for a, b in zip(accs, accs[1:]))
    assert accs[-1] == 1.0


def test_svm_objective_non_increasing():
    x, y = blobs(6, k=2, spread=1.5)
    t = np.where(np.array(y) == "c0", 1.0, -1.0)
    _, _, hist = classify.train_binary_svm(x, t, reg=1e-3, epochs=300)
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    assert hist[-1] < hist[0]


def test_svm_separable():
    x, y = blobs(7, k=4)
    assert accuracy(classify.train("svm", fm(x, y)), x, y) == 1.0


@pytest.mark.parametrize("kind", ["knn", "lda", "svm", "bdt"])
def test_permutation_stability(kind):
    x, y = blobs(8, k=3, spread=0.8)
    test = blobs(9, k=3, spread=3.0)[0]
    base = classify.train(kind, fm(x, y)).predict(test)
    perm = make_rng(10).permutation(len(y))
    again = classify.train(kind, fm(x[perm], [y[i] for i in perm])).predict(test)
    assert again == base


@pytest.mark.parametrize("kind", ["knn", "lda", "svm", "bdt"])
def test_predicts_only_seen_classes(kind):
    x, y = blobs(11, k=2)
    m = classify.train(kind, fm(x, y, ("c0", "c1", "unused")))
    assert set(m.predict(make_rng(0).normal(0, 10, size=(50, 2)))) <= {"c0", "c1"}
    for arr in m.params.values():
        if arr.dtype.kind == "f":
            assert np.all(np.isfinite(arr))


def test_errors():
    x, y = blobs(12, k=2)
    with pytest.raises(SingleClass):
        classify.train("knn", fm(x[:5], y[:5]))
    with pytest.raises(EmptyTrainSet):
        classify.train("knn", FeatureMatrix(np.zeros((0, 2)), ("a", "b"), (), ("c0",)))
    m = classify.train("knn", fm(x, y))
    with pytest.raises(DimMismatch):
        m.predict(np.zeros((1, 3)))


def test_knn_tie_goes_to_lowest_class():
    m = classify.train("knn", fm([-1.0, 1.0], ["a", "b"]), {"k": 2})
    assert m.predict(np.array([[0.0]])) == ["a"]
    for order in itertools.permutations(range(2)):
        xs = np.array([-1.0, 1.0])[list(order)]
        ys = [["a", "b"][i] for i in order]
        assert classify.train("knn", fm(xs, ys, ("a", "b")), {"k": 2}).predict(np.array([[0.0]])) == ["a"]
