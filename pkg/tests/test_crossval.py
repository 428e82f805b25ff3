import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import prognosis as pg
from prognosis.crossval import FoldAssignment
from prognosis.errors import ArgumentError


@pytest.fixture
def lhs_design():
    b = pg.uniform_bounds(2, 0.0, 1.0)
    return pg.lhs_sample(100, b, seed=42)


def test_loo_assignment_is_identity_partition():
    b = pg.uniform_bounds(1, 0.0, 1.0)
    d = pg.lhs_sample(10, b, seed=1)
    a = pg.assign_folds(d, 10, seed=2)
    assert a.is_loo
    assert sorted(a.map.tolist()) == list(range(10))


def test_fold_balance():
    b = pg.uniform_bounds(3, 0.0, 1.0)
    d = pg.lhs_sample(10, b, seed=3)
    a = pg.assign_folds(d, 5, seed=4)
    counts = np.bincount(a.map, minlength=5)
    assert list(counts) == [2, 2, 2, 2, 2]

    d2 = pg.lhs_sample(13, b, seed=5)
    a2 = pg.assign_folds(d2, 4, seed=6)
    counts2 = np.bincount(a2.map, minlength=4)
    assert counts2.max() - counts2.min() <= 1


def test_fold_space_covering(lhs_design):
    a = pg.assign_folds(lhs_design, 5, seed=7)
    xn = lhs_design.normalized()
    center = xn.mean(axis=0)
    for f in range(5):
        fold_center = xn[a.map == f].mean(axis=0)
        assert np.linalg.norm(fold_center - center) < 0.25


def test_fold_determinism_and_methods(lhs_design):
    a1 = pg.assign_folds(lhs_design, 5, seed=8)
    a2 = pg.assign_folds(lhs_design, 5, seed=8)
    assert np.array_equal(a1.map, a2.map)
    r = pg.assign_folds(lhs_design, 5, seed=8, method="random")
    counts = np.bincount(r.map, minlength=5)
    assert counts.max() - counts.min() <= 1


def test_fold_argument_errors(lhs_design):
    with pytest.raises(ArgumentError):
        pg.assign_folds(lhs_design, 1, seed=0)
    with pytest.raises(ArgumentError):
        pg.assign_folds(lhs_design, 101, seed=0)
    with pytest.raises(ArgumentError):
        FoldAssignment(q=3, map=np.array([0, 0, 0, 1, 1, 1]))  # empty fold
    with pytest.raises(ArgumentError):
        FoldAssignment(q=2, map=np.array([0, 0, 0, 1]))  # unbalanced


def test_exact_class_kfold_zero_residuals():
    b = pg.uniform_bounds(2, 0.0, 2.0)
    d = pg.lhs_sample(30, b, seed=9)
    y = 1.0 + 2.0 * d.values[:, 0] - 3.0 * d.values[:, 1]
    a = pg.assign_folds(d, 5, seed=10)
    cv = pg.k_fold_cv(pg.ModelSpec("polynomial"), d, y, a)
    assert np.abs(cv.cv_residuals).max() < 1e-8
    assert pg.compute_report(cv).cop == pytest.approx(1.0, abs=1e-8)


def test_constant_data_cv():
    b = pg.uniform_bounds(1, 0.0, 1.0)
    d = pg.lhs_sample(15, b, seed=11)
    y = np.full(15, 7.0)
    a = pg.assign_folds(d, 5, seed=12)
    cv = pg.k_fold_cv(pg.ModelSpec("polynomial"), d, y, a)
    assert cv.cv_pred == pytest.approx(np.full(15, 7.0), abs=1e-10)


def test_overfit_signature_small_radius_mls():
    d = pg.lhs_sample(100, pg.get_benchmark("nonlin1d-noisy").bounds, seed=13)
    y = pg.eval_benchmark("nonlin1d-noisy", d, noise_seed=14)
    a = pg.assign_folds(d, 5, seed=15)
    cv = pg.k_fold_cv(pg.ModelSpec("mls", basis="quadratic", radius=0.02), d, y, a)
    rmse_fit = np.sqrt((cv.fit_residuals**2).mean())
    rmse_cv = np.sqrt((cv.cv_residuals**2).mean())
    assert rmse_fit < 0.1 * rmse_cv


def test_loo_polynomial_shortcut_matches_explicit_retraining():
    rng = np.random.default_rng(16)
    b = pg.uniform_bounds(2, 0.0, 1.0)
    d = pg.DesignMatrix(rng.uniform(size=(20, 2)), b)
    y = rng.standard_normal(20)
    spec = pg.ModelSpec("polynomial", basis="quadratic")
    cv = pg.loo_cv(spec, d, y)

    # oracle: explicit n retrainings
    explicit = np.empty(20)
    for i in range(20):
        keep = np.ones(20, dtype=bool)
        keep[i] = False
        model = pg.train(spec, pg.DesignMatrix(d.values[keep], b), y[keep])
        explicit[i] = model.predict(d.values[i:i + 1])[0]
    assert np.abs(cv.cv_pred - explicit).max() < 1e-10


def test_loo_equals_kfold_with_q_n():
    b = pg.uniform_bounds(1, 0.0, 1.0)
    d = pg.lhs_sample(12, b, seed=17)
    y = np.sin(d.values[:, 0] * 5)
    spec = pg.ModelSpec("polynomial", basis="quadratic")
    a = pg.assign_folds(d, 12, seed=18)
    cv_k = pg.k_fold_cv(spec, d, y, a)
    cv_l = pg.loo_cv(spec, d, y)
    assert cv_k.cv_pred == pytest.approx(cv_l.cv_pred, abs=1e-9)


def test_holdout_integrity_polynomial():
    """cv_pred[j] must only depend on y-values outside fold zeta(j)."""
    b = pg.uniform_bounds(2, 0.0, 1.0)
    d = pg.lhs_sample(40, b, seed=19)
    rng = np.random.default_rng(20)
    y = rng.standard_normal(40)
    a = pg.assign_folds(d, 5, seed=21)
    spec = pg.ModelSpec("polynomial")
    base = pg.k_fold_cv(spec, d, y, a)

    fold0 = a.map == 0
    y_pert = y.copy()
    y_pert[fold0] += 1.0
    pert = pg.k_fold_cv(spec, d, y_pert, a)
    # predictions inside fold 0 come from models that never saw fold 0
    assert pert.cv_pred[fold0] == pytest.approx(base.cv_pred[fold0], abs=1e-12)
    assert not np.allclose(pert.cv_pred[~fold0], base.cv_pred[~fold0])


def test_fold_relabeling_invariance():
    b = pg.uniform_bounds(1, 0.0, 1.0)
    d = pg.lhs_sample(20, b, seed=22)
    y = d.values[:, 0] ** 3
    a = pg.assign_folds(d, 4, seed=23)
    perm = np.array([2, 0, 3, 1])
    relabeled = FoldAssignment(q=4, map=perm[a.map])
    spec = pg.ModelSpec("polynomial", basis="quadratic")
    cv1 = pg.k_fold_cv(spec, d, y, a)
    cv2 = pg.k_fold_cv(spec, d, y, relabeled)
    assert np.array_equal(cv1.cv_pred, cv2.cv_pred)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_residual_identities_hold_exactly(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 15))
    y = rng.standard_normal(n)
    fitted = rng.standard_normal(n)
    cv_pred = rng.standard_normal(n)
    cv = pg.CvResult(y=y, fitted=fitted, cv_pred=cv_pred,
                     assignment=FoldAssignment(q=n, map=np.arange(n)))
    assert np.array_equal(cv.fit_residuals, y - fitted)
    assert np.array_equal(cv.cv_residuals, y - cv_pred)


def test_kfold_threads_match_serial():
    b = pg.uniform_bounds(2, 0.0, 1.0)
    d = pg.lhs_sample(30, b, seed=24)
    y = np.sin(4 * d.values[:, 0]) + d.values[:, 1]
    a = pg.assign_folds(d, 5, seed=25)
    spec = pg.ModelSpec("polynomial", basis="quadratic")
    cv1 = pg.k_fold_cv(spec, d, y, a, threads=1)
    cv4 = pg.k_fold_cv(spec, d, y, a, threads=4)
    assert np.array_equal(cv1.cv_pred, cv4.cv_pred)
