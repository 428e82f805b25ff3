import json

import numpy as np
import pytest

import prognosis as pg
from prognosis.errors import ArgumentError, DimensionError, SingularFitError
from prognosis.surrogate import (
    basis_size,
    from_json_dict,
    kriging_nll,
    to_json_dict,
)


@pytest.fixture
def linear_data():
    b = pg.uniform_bounds(1, -1.0, 4.0)
    d = pg.lhs_sample(12, b, seed=2)
    y = 2.0 + 3.0 * d.values[:, 0]
    return d, y


def test_polynomial_recovers_exact_linear(linear_data):
    d, y = linear_data
    model = pg.train(pg.ModelSpec("polynomial", basis="linear"), d, y)
    # coefficients live in normalized space; verify through predictions
    b = d.bounds
    probe = pg.DesignMatrix(np.array([[-1.0], [0.0], [4.0]]), b)
    assert model.predict(probe) == pytest.approx([-1.0, 2.0, 14.0], abs=1e-8)
    x10 = np.array([[10.0]])  # prediction outside bounds is extrapolation, still linear
    assert float(model.predict(x10)[0]) == pytest.approx(32.0, abs=1e-6)


def test_all_families_reproduce_constant():
    b = pg.uniform_bounds(2, 0.0, 1.0)
    d = pg.lhs_sample(12, b, seed=3)
    y = np.full(12, 4.25)
    probe = pg.lhs_sample(20, b, seed=4)
    for spec in (
        pg.ModelSpec("polynomial", basis="quadratic"),
        pg.ModelSpec("mls", basis="linear", radius=0.4),
        pg.ModelSpec("kriging"),
        pg.ModelSpec("kriging", anisotropy="anisotropic"),
    ):
        model = pg.train(spec, d, y)
        assert model.predict(probe) == pytest.approx(np.full(20, 4.25), abs=1e-8), spec


def test_quadratic_polynomial_exact_on_quadratic():
    b = pg.uniform_bounds(1, -2.0, 2.0)
    d = pg.lhs_sample(10, b, seed=5)
    y = d.values[:, 0] ** 2
    model = pg.train(pg.ModelSpec("polynomial", basis="quadratic"), d, y)
    resid = y - model.predict(d)
    ss_t = ((y - y.mean()) ** 2).sum()
    assert 1.0 - (resid**2).sum() / ss_t == pytest.approx(1.0, abs=1e-8)


def test_kriging_interpolates_supports():
    b = pg.uniform_bounds(2, 0.0, 1.0)
    d = pg.lhs_sample(25, b, seed=6)
    y = np.sin(3 * d.values[:, 0]) + d.values[:, 1] ** 2
    for aniso in ("isotropic", "anisotropic"):
        model = pg.train(pg.ModelSpec("kriging", anisotropy=aniso), d, y)
        err = np.abs(model.predict(d) - y)
        assert err.max() <= 1e-6 * (y.max() - y.min())


def test_kriging_nll_optimal_on_grid():
    b = pg.uniform_bounds(2, 0.0, 1.0)
    d = pg.lhs_sample(30, b, seed=7)
    y = np.cos(4 * d.values[:, 0]) * d.values[:, 1]
    model = pg.train(pg.ModelSpec("kriging"), d, y)
    returned = model.params["nll"]
    for g in np.linspace(-2.0, 2.0, 16):
        assert returned <= kriging_nll(model, np.array([g])) + 1e-8


def test_mls_radius_to_infinity_matches_global_fit():
    b = pg.uniform_bounds(1, -2.0, 2.0)
    d = pg.lhs_sample(30, b, seed=8)
    y = 1.0 - d.values[:, 0] + 0.5 * d.values[:, 0] ** 2
    mls = pg.train(pg.ModelSpec("mls", basis="quadratic", radius=1e6), d, y)
    resid = y - mls.predict(d)
    assert np.abs(resid).max() < 1e-7


def test_mls_prediction_continuity():
    b = pg.uniform_bounds(1, 0.0, 5.0)
    d = pg.lhs_sample(40, b, seed=9)
    y = np.sin(2 * d.values[:, 0]) + d.values[:, 0]
    model = pg.train(pg.ModelSpec("mls", basis="quadratic", radius=0.3), d, y)
    x = np.linspace(0.31, 4.7, 57).reshape(-1, 1)  # interior, away from the cutoff edge cases
    p1 = model.predict(x)
    p2 = model.predict(x + 1e-9)
    assert np.abs(p1 - p2).max() < 1e-5


def test_polynomial_affine_equivariance():
    rng = np.random.default_rng(10)
    x = rng.uniform(size=(25, 3))
    y = 1 + x @ np.array([2.0, -1.0, 0.5]) + rng.standard_normal(25)
    b1 = pg.uniform_bounds(3, 0.0, 1.0)
    m1 = pg.train(pg.ModelSpec("polynomial"), pg.DesignMatrix(x, b1), y)

    scale = np.array([10.0, 0.1, 3.0])
    shift = np.array([-5.0, 2.0, 100.0])
    b2 = pg.Bounds(shift, shift + scale)
    m2 = pg.train(pg.ModelSpec("polynomial"), pg.DesignMatrix(x * scale + shift, b2), y)

    probe = rng.uniform(size=(11, 3))
    assert m1.predict(probe) == pytest.approx(m2.predict(probe * scale + shift), abs=1e-8)


def test_active_inputs_subset():
    b = pg.uniform_bounds(4, 0.0, 1.0)
    d = pg.lhs_sample(20, b, seed=11)
    y = 5.0 * d.values[:, 2]
    model = pg.train(pg.ModelSpec("polynomial", active_inputs=(2,)), d, y)
    assert model.active == (2,)
    probe = pg.lhs_sample(10, b, seed=12)
    assert model.predict(probe) == pytest.approx(5.0 * probe.values[:, 2], abs=1e-8)


def test_train_errors():
    b = pg.uniform_bounds(2, 0.0, 1.0)
    d = pg.lhs_sample(4, b, seed=13)
    with pytest.raises(ArgumentError):
        pg.train(pg.ModelSpec("polynomial", basis="quadratic"), d, np.ones(4))  # n < terms
    # exactly collinear columns -> rank-deficient basis
    col = np.linspace(0.1, 0.9, 8)
    dd = pg.DesignMatrix(np.column_stack([col, 0.5 * col]), b)
    with pytest.raises(SingularFitError):
        pg.train(pg.ModelSpec("polynomial"), dd, np.ones(8))
    with pytest.raises(DimensionError):
        pg.train(pg.ModelSpec("polynomial", active_inputs=(5,)), d, np.ones(4))


def test_predict_dimension_check(linear_data):
    d, y = linear_data
    model = pg.train(pg.ModelSpec("polynomial"), d, y)
    with pytest.raises(DimensionError):
        model.predict(np.ones((3, 2)))


def test_basis_size():
    assert basis_size("linear", 5) == 6
    assert basis_size("quadratic", 1) == 3
    assert basis_size("quadratic", 5) == 21


def test_serialization_round_trip_bit_exact():
    b = pg.uniform_bounds(2, -1.0, 2.0)
    d = pg.lhs_sample(20, b, seed=14)
    y = d.values[:, 0] * d.values[:, 1] + np.sin(d.values[:, 0])
    probe = pg.lhs_sample(15, b, seed=15)
    for spec in (
        pg.ModelSpec("polynomial", basis="quadratic"),
        pg.ModelSpec("mls", basis="linear", radius=0.5),
        pg.ModelSpec("kriging", anisotropy="anisotropic"),
    ):
        model = pg.train(spec, d, y)
        doc = json.loads(json.dumps(to_json_dict(model)))
        clone = from_json_dict(doc)
        # every serialized numeric survives the round trip bit-exactly
        assert to_json_dict(clone) == doc, spec
        p_model = model.predict(probe)
        p_clone = clone.predict(probe)
        if spec.family == "kriging":
            # interpolation weights amplify last-ulp kernel differences that
            # come from array alignment, so exact equality is not meaningful
            scale = np.abs(model.params["alpha"]).sum()
            assert np.abs(p_model - p_clone).max() <= 1e-14 * scale, spec
        else:
            assert np.array_equal(p_model, p_clone), spec
