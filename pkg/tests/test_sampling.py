import numpy as np
import pytest

import prognosis as pg
from prognosis.errors import ArgumentError, BoundsError, DataError, DimensionError


def stratum_counts(design: pg.DesignMatrix) -> np.ndarray:
    """Independent stratification oracle: count samples per stratum per column."""
    n = design.rows
    u = design.normalized()
    counts = np.zeros((n, design.cols), dtype=int)
    for j in range(design.cols):
        idx = np.clip((u[:, j] * n).astype(int), 0, n - 1)
        for i in idx:
            counts[i, j] += 1
    return counts


def test_bounds_validation():
    with pytest.raises(BoundsError):
        pg.Bounds(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(BoundsError):
        pg.Bounds(np.array([0.0]), np.array([np.inf]))
    b = pg.uniform_bounds(3, -1.0, 2.0)
    assert b.dim == 3
    assert np.allclose(b.normalize(b.denormalize(np.array([0.25, 0.5, 1.0]))),
                       [0.25, 0.5, 1.0])


def test_design_rejects_out_of_bounds_and_duplicates():
    b = pg.uniform_bounds(2, 0.0, 1.0)
    with pytest.raises(BoundsError):
        pg.DesignMatrix(np.array([[0.5, 1.5]]), b)
    with pytest.raises(DataError):
        pg.DesignMatrix(np.array([[0.5, 0.5], [0.5, 0.5 + 1e-13]]), b)


def test_lhs_single_point():
    b = pg.uniform_bounds(1, 0.0, 1.0)
    d = pg.lhs_sample(1, b, seed=0)
    assert d.rows == 1
    assert 0.0 <= d.values[0, 0] < 1.0


def test_lhs_four_strata():
    b = pg.uniform_bounds(1, 0.0, 1.0)
    d = pg.lhs_sample(4, b, seed=5)
    edges = [0.0, 0.25, 0.5, 0.75, 1.0]
    hist, _ = np.histogram(d.values[:, 0], bins=edges)
    assert list(hist) == [1, 1, 1, 1]


def test_lhs_stratification_and_seed_separation():
    b = pg.uniform_bounds(5, -2.0, 3.0)
    d1 = pg.lhs_sample(100, b, seed=1)
    d2 = pg.lhs_sample(100, b, seed=2)
    assert not np.array_equal(d1.values, d2.values)
    for d in (d1, d2):
        assert np.all(stratum_counts(d) == 1)


def test_lhs_deterministic():
    b = pg.uniform_bounds(3, 0.0, 1.0)
    assert np.array_equal(pg.lhs_sample(17, b, seed=9).values,
                          pg.lhs_sample(17, b, seed=9).values)


def test_improve_lhs_noop_cases():
    b1 = pg.uniform_bounds(1, 0.0, 1.0)
    d1 = pg.lhs_sample(10, b1, seed=3)
    assert np.array_equal(pg.improve_lhs(d1, seed=4).values, d1.values)  # m=1

    b2 = pg.uniform_bounds(3, 0.0, 1.0)
    d2 = pg.lhs_sample(10, b2, seed=3)
    assert np.array_equal(pg.improve_lhs(d2, iterations=0, seed=4).values, d2.values)


def test_improve_lhs_reduces_correlation_and_keeps_strata():
    b = pg.uniform_bounds(5, 0.0, 1.0)
    d = pg.lhs_sample(50, b, seed=11)

    def max_abs_corr(values):
        c = np.abs(np.corrcoef(values, rowvar=False))
        np.fill_diagonal(c, 0.0)
        return c.max()

    before = max_abs_corr(d.values)
    improved = pg.improve_lhs(d, iterations=1000, seed=12)
    assert max_abs_corr(improved.values) <= before
    assert np.all(stratum_counts(improved) == 1)
    # column content is only permuted, never altered
    for j in range(5):
        assert np.allclose(np.sort(improved.values[:, j]), np.sort(d.values[:, j]))


def test_coupled5d_hand_values():
    b = pg.get_benchmark("coupled5d").bounds
    pts = np.array([
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, np.pi / 2, 0.0, 0.0],
    ])
    y = pg.eval_benchmark("coupled5d", pg.DesignMatrix(pts, b))
    assert y.values == pytest.approx([0.0, 2.0, 5.0], abs=1e-12)


def test_coupled5d_zero_mean_by_antisymmetry():
    b = pg.get_benchmark("coupled5d").bounds
    d = pg.lhs_sample(100_000, b, seed=77)
    y = pg.eval_benchmark("coupled5d", d)
    assert abs(y.values.mean()) < 0.05


def test_noisy20d_noise_seed_behavior():
    bench = pg.get_benchmark("noisy20d")
    d = pg.lhs_sample(50, bench.bounds, seed=8)
    y_clean = pg.eval_benchmark("noisy20d", d)
    assert np.array_equal(y_clean.values, bench.deterministic(d.values))

    y1 = pg.eval_benchmark("noisy20d", d, noise_seed=4)
    y2 = pg.eval_benchmark("noisy20d", d, noise_seed=4)
    y3 = pg.eval_benchmark("noisy20d", d, noise_seed=5)
    assert np.array_equal(y1.values, y2.values)
    assert not np.array_equal(y1.values, y3.values)
    assert not np.array_equal(y1.values, y_clean.values)


def test_benchmark_errors():
    b3 = pg.uniform_bounds(3, -1.0, 1.0)
    d = pg.lhs_sample(5, b3, seed=0)
    with pytest.raises(DimensionError):
        pg.eval_benchmark("coupled5d", d)
    with pytest.raises(pg.UnknownBenchmarkError):
        pg.eval_benchmark("nope", d)
    with pytest.raises(ArgumentError):
        pg.lhs_sample(0, b3, seed=0)
