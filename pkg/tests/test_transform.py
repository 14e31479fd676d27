import numpy as np
import pytest

from nilmrec.core import make_rng
from nilmrec.errors import DimMismatch, KTooLarge
from nilmrec.features import FeatureMatrix
from nilmrec.transform import (apply, fit_apply_per_set, fit_maxabs_norm, fit_pca,
                               fit_variance_norm)
from oracles import jacobi_eigh, pca_oracle


def col(*v):
    return np.array(v, dtype=float)[:, None]


def test_variance_norm_examples():
    st = fit_variance_norm(col(1, 2, 3))
    x = np.array([1.0, 2.0, 3.0])
    mean = sum(x) / 3
    var = sum((xi - mean) ** 2 for xi in x) / 3
    assert (st.mean[0], st.scale[0]) == (pytest.approx(2.0), pytest.approx(2 / 3))
    assert st.transform([[2.0]])[0, 0] == 0.0
    assert st.transform([[3.0]])[0, 0] == pytest.approx((3 - mean) / var) == 1.5
    z = fit_variance_norm(col(1, 2, 3), use_std=True).transform([[3.0]])[0, 0]
    assert z == pytest.approx(1 / np.sqrt(2 / 3))


def test_variance_norm_degenerate():
    st = fit_variance_norm(col(5, 5, 5))
    assert st.degenerate[0] and st.scale[0] == 1.0
    assert not st.transform(col(5, 5, 5)).any()


def test_maxabs_examples():
    st = fit_maxabs_norm(col(-2, 1))
    assert st.scale[0] == 2.0
    np.testing.assert_array_equal(st.transform(col(-2, 1, 4)).ravel(), [-1, 0.5, 2])
    zero = fit_maxabs_norm(col(0, 0))
    assert zero.degenerate[0] and not zero.transform(col(0, 0)).any()


def test_norm_properties():
    rng = make_rng(0)
    x = rng.normal(3, 5, size=(40, 6))
    v = fit_variance_norm(x).transform(x)
    assert np.abs(v.mean(axis=0)).max() < 1e-9
    m = fit_maxabs_norm(x).transform(x)
    np.testing.assert_allclose(np.abs(m).max(axis=0), 1.0)
    a, b = fit_variance_norm(x), fit_variance_norm(x)
    assert a.scale.tobytes() == b.scale.tobytes() and a.mean.tobytes() == b.mean.tobytes()


def test_dim_mismatch():
    st = fit_variance_norm(np.ones((4, 25)) + np.arange(4)[:, None])
    with pytest.raises(DimMismatch):
        st.transform(np.zeros((2, 24)))
    with pytest.raises(DimMismatch):
        fit_pca(make_rng(0).normal(size=(30, 25)), 3).transform(np.zeros((1, 24)))


def test_pca_line():
    t = np.linspace(-1, 1, 21)
    st = fit_pca(np.c_[t, t], 2)
    np.testing.assert_allclose(st.components[0], [1 / np.sqrt(2)] * 2, atol=1e-12)
    assert st.explained_variances[1] == pytest.approx(0, abs=1e-12)


def test_pca_full_rank_reconstruction():
    x = make_rng(1).normal(size=(15, 5))
    st = fit_pca(x, 5)
    np.testing.assert_allclose(st.inverse_transform(st.transform(x)), x, atol=1e-8)


def test_pca_against_jacobi():
    x = make_rng(2).normal(size=(20, 6))
    w, recon = pca_oracle(x, 3)
    st = fit_pca(x, 3)
    np.testing.assert_allclose(st.explained_variances, w, atol=1e-8)
    np.testing.assert_allclose(st.inverse_transform(st.transform(x)), recon, atol=1e-8)


def test_pca_wide_against_jacobi():
    x = make_rng(3).normal(size=(6, 10))
    w, recon = pca_oracle(x, 4)
    st = fit_pca(x, 4)
    np.testing.assert_allclose(st.explained_variances, w, atol=1e-8)
    np.testing.assert_allclose(st.inverse_transform(st.transform(x)), recon, atol=1e-8)


def test_jacobi_oracle_self_check():
    a = make_rng(4).normal(size=(7, 7))
    a = a + a.T
    w, v = jacobi_eigh(a)
    np.testing.assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-10)


def test_pca_invariants():
    x = make_rng(5).normal(size=(30, 8)) @ make_rng(6).normal(size=(8, 8))
    st = fit_pca(x, 8)
    np.testing.assert_allclose(st.components @ st.components.T, np.eye(8), atol=1e-8)
    assert np.all(np.diff(st.explained_variances) <= 0)
    assert st.explained_variances.sum() <= x.var(axis=0, ddof=1).sum() + 1e-8
    errs = []
    for k in range(1, 9):
        s = fit_pca(x, k)
        errs.append(np.sum((s.inverse_transform(s.transform(x)) - x) ** 2))
    assert all(b <= a + 1e-9 for a, b in zip(errs, errs[1:]))


def test_pca_k_bounds():
    x = make_rng(7).normal(size=(5, 8))
    with pytest.raises(KTooLarge):
        fit_pca(x, 5)
    with pytest.raises(KTooLarge):
        fit_pca(x, 0)


def test_apply_feature_matrix():
    x = make_rng(8).normal(size=(6, 3))
    m = FeatureMatrix(x, ("a", "b", "c"), tuple("xxxyyy"), ("x", "y"))
    out = apply(fit_pca(m, 2), m)
    assert out.names == ("pc_0", "pc_1") and out.labels == m.labels
    tr, te = fit_apply_per_set(m, m, "maxabs")
    np.testing.assert_array_equal(tr.values, te.values)
