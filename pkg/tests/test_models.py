"""Sample containers, OLS fitting, and unit transforms."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from obdflip import (
    DegenerateMeansError,
    DimensionMismatchError,
    GroupModel,
    GroupSample,
    RankDeficientError,
    TooFewRowsError,
    decompose_both,
    fit_ols,
    out_of_unit_interval_share,
    standardize_units,
    transform_model,
    transform_sample,
)
from obdflip.rng import STREAM_SIMULATION, generator


def _sample(n=200, d=2, seed=0, noise=0.5, beta=None, alpha=1.5):
    rng = generator(seed, STREAM_SIMULATION, 9)
    beta = np.arange(1, d + 1, dtype=float) if beta is None else np.asarray(beta)
    x = rng.normal(size=(n, d)) * 2.0 + 1.0
    y = alpha + x @ beta + noise * rng.normal(size=n)
    return GroupSample(label="g", covariates=x, outcome=y)


def test_group_sample_validation():
    with pytest.raises(DimensionMismatchError):
        GroupSample(label="g", covariates=np.zeros(5), outcome=np.zeros(5))
    with pytest.raises(DimensionMismatchError):
        GroupSample(label="g", covariates=np.zeros((5, 2)), outcome=np.zeros(4))
    with pytest.raises(ValueError):
        GroupSample(label="g", covariates=np.full((5, 2), np.nan), outcome=np.zeros(5))


def test_group_sample_is_frozen_copy():
    x = np.ones((4, 1))
    y = np.ones(4)
    s = GroupSample(label="g", covariates=x, outcome=y)
    x[0, 0] = 99.0
    assert s.covariates[0, 0] == 1.0
    with pytest.raises(ValueError):
        s.outcome[0] = 2.0


def test_group_model_validation():
    with pytest.raises(DimensionMismatchError):
        GroupModel(label="g", alpha=0.0, beta=[1.0, 2.0], mu=[1.0])
    m = GroupModel(label="g", alpha=2.0, beta=[3.0], mu=[10.0])
    assert m.mean_outcome == 32.0
    assert m.n_covariates == 1


def test_fit_ols_exact_noiseless():
    s = _sample(n=50, d=3, noise=0.0, beta=[2.0, -1.0, 0.5], alpha=4.0)
    m = fit_ols(s)
    assert m.alpha == pytest.approx(4.0, abs=1e-9)
    assert m.beta == pytest.approx([2.0, -1.0, 0.5], abs=1e-9)
    assert np.array_equal(m.mu, s.covariates.mean(axis=0))


def test_fit_ols_noisy_recovery():
    s = _sample(n=50_000, d=2, noise=1.0, beta=[1.0, -2.0], alpha=0.5, seed=3)
    m = fit_ols(s)
    assert m.alpha == pytest.approx(0.5, abs=0.05)
    assert m.beta == pytest.approx([1.0, -2.0], abs=0.05)


def test_fit_ols_too_few_rows():
    s = _sample(n=3, d=2, noise=0.0)
    with pytest.raises(TooFewRowsError):
        fit_ols(s)
    fit_ols(_sample(n=4, d=2, noise=0.0))


def test_fit_ols_rejects_constant_column():
    x = np.column_stack([np.ones(30), np.arange(30.0)])
    y = np.arange(30.0)
    with pytest.raises(RankDeficientError):
        fit_ols(GroupSample(label="g", covariates=x, outcome=y))


def test_fit_ols_rejects_collinear_columns():
    rng = generator(1, STREAM_SIMULATION, 5)
    a = rng.normal(size=40)
    x = np.column_stack([a, 2.0 * a])
    with pytest.raises(RankDeficientError):
        fit_ols(GroupSample(label="g", covariates=x, outcome=a + 1.0))


def test_standardize_units_degenerate():
    with pytest.raises(DegenerateMeansError) as err:
        standardize_units(np.array([1.0, 2.0, 5.0]), np.array([0.0, 2.0, 1.0]))
    assert err.value.indices == (1,)
    assert "1" in str(err.value)


def test_standardized_units_pin_means():
    mu_h = np.array([3.0, -1.0])
    mu_k = np.array([1.0, 1.0])
    units = standardize_units(mu_h, mu_k)
    assert np.allclose(units.apply(mu_k), [0.0, 0.0])
    assert np.allclose(units.apply(mu_h), [1.0, 1.0])


def test_transform_round_trip_decomposition_invariant():
    rng = generator(2, STREAM_SIMULATION, 11)
    for _ in range(20):
        d = rng.integers(1, 4)
        mh = GroupModel(label="H", alpha=rng.normal(), beta=rng.normal(size=d),
                        mu=rng.normal(size=d))
        mk = GroupModel(label="K", alpha=rng.normal(), beta=rng.normal(size=d),
                        mu=rng.normal(size=d) + 2.5)
        units = standardize_units(mh.mu, mk.mu)
        base = decompose_both(mh, mk)
        moved = decompose_both(transform_model(mh, units), transform_model(mk, units))
        for ref in ("by_h", "by_k"):
            assert getattr(moved, ref).explained == pytest.approx(
                getattr(base, ref).explained, rel=1e-9, abs=1e-9
            )
            assert getattr(moved, ref).unexplained == pytest.approx(
                getattr(base, ref).unexplained, rel=1e-9, abs=1e-9
            )


@given(st.integers(0, 2**31 - 1))
def test_transform_sample_fit_commutes(seed):
    # fitting then transforming equals transforming rows then fitting
    s = _sample(n=60, d=2, seed=seed, noise=0.3)
    units = standardize_units(np.array([2.0, 3.0]), np.array([-1.0, 0.5]))
    direct = transform_model(fit_ols(s), units)
    refit = fit_ols(transform_sample(s, units))
    assert refit.alpha == pytest.approx(direct.alpha, rel=1e-7, abs=1e-7)
    assert refit.beta == pytest.approx(direct.beta, rel=1e-7, abs=1e-7)
    assert refit.mu == pytest.approx(direct.mu, rel=1e-7, abs=1e-7)


def test_out_of_unit_interval_share():
    x = np.linspace(0.0, 1.0, 11)[:, None]
    binary = (x[:, 0] > 0.45).astype(float)
    s = GroupSample(label="g", covariates=x, outcome=binary)
    m = GroupModel(label="g", alpha=-0.25, beta=[1.5], mu=[0.5])
    share = out_of_unit_interval_share(s, m)
    # fitted values -0.25 + 1.5x leave [0, 1] for x < 1/6 and x > 5/6
    assert share == pytest.approx(4 / 11)
    continuous = GroupSample(label="g", covariates=x, outcome=x[:, 0] * 3.0)
    assert out_of_unit_interval_share(continuous, m) is None
