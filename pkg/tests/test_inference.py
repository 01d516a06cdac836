from dataclasses import replace

import numpy as np
import pytest

from extsample.errors import BootstrapDegeneracyError, DomainError
from extsample.extension import ExtensionConfig
from extsample.inference import (BootstrapSpec, actual_se_approximation, bootstrap_se,
                                 standard_error_study)
from extsample.regression import Dataset
from extsample.simulation import FixedPollution, RandomPollution, ScenarioSpec, gen_scenario


def small_fixed(seed=1, noise=1.0):
    return ScenarioSpec(2, 40, 60, 60, (0, 0), 0.3, (1, 1, 2), noise, noise, 4 * noise,
                        FixedPollution((1, 1), (1, 2, 1)), seed)


def test_bootstrap_zero_noise():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 2))
    prob = Dataset(1 + X @ [2, -1], X)
    Xn = rng.normal(size=(20, 2))
    nonprob = Dataset(1 + Xn @ [2, -1], Xn)
    se = bootstrap_se(prob, nonprob, spec=BootstrapSpec(50, 3))
    assert np.all(se <= 1e-8)


def test_bootstrap_reproducible():
    prob, nonprob, _ = gen_scenario(small_fixed())
    a = bootstrap_se(prob, nonprob, spec=BootstrapSpec(40, 7))
    b = bootstrap_se(prob, nonprob, spec=BootstrapSpec(40, 7))
    assert a.tobytes() == b.tobytes()
    c = bootstrap_se(prob, nonprob, spec=BootstrapSpec(40, 8))
    assert not np.array_equal(a, c)


def test_bootstrap_row_order_only_changes_monte_carlo_noise():
    prob, nonprob, _ = gen_scenario(small_fixed(2))
    a = bootstrap_se(prob, nonprob, spec=BootstrapSpec(400, 1))
    perm = np.random.default_rng(4).permutation(prob.n)
    b = bootstrap_se(prob.subset(perm), nonprob, spec=BootstrapSpec(400, 1))
    # relative MC error of an SD from 400 draws is about 1/sqrt(800) ~ 3.5%
    np.testing.assert_allclose(a, b, rtol=0.2)


def test_bootstrap_spec_validation():
    with pytest.raises(DomainError):
        BootstrapSpec(n_boot=0)
    with pytest.raises(DomainError):
        BootstrapSpec(resample_scheme="pooled")


def test_bootstrap_gives_up_on_hopeless_sample():
    # a constant predictor makes every resample singular
    prob = Dataset([0.0, 1.1, 0.1, 0.9], [2.0, 2.0, 2.0, 2.0])
    with pytest.raises(BootstrapDegeneracyError) as exc:
        bootstrap_se(prob, Dataset.empty(1), spec=BootstrapSpec(200, 0))
    assert 0 < exc.value.failure_rate <= 1


def test_actual_se_near_zero_noise():
    se = actual_se_approximation(small_fixed(3, noise=1e-24), n_rep=30)
    assert np.all(se <= 1e-8)


def test_actual_se_requires_fixed_pollution():
    spec = replace(small_fixed(), pollution=RandomPollution(1.0, 1.0))
    with pytest.raises(DomainError):
        actual_se_approximation(spec)


def test_actual_se_stabilises_with_more_draws():
    spec = small_fixed(5)
    coarse = actual_se_approximation(spec, n_rep=100)
    fine = actual_se_approximation(replace(spec, seed=6), n_rep=1000)
    # SD estimated from 100 draws has relative error about 1/sqrt(200) ~ 7%; allow 4 of those
    np.testing.assert_allclose(coarse, fine, rtol=0.3)


def test_actual_se_matches_pooled_variance_without_nonprob():
    # with no non-probability rows the estimator is plain OLS, whose SD is known
    spec = ScenarioSpec(1, 50, 0, 0, (0,), 0.0, (1, 2), 1.0, 1.0, 1.0,
                        FixedPollution((0,), (1, 2)), 9)
    se = actual_se_approximation(spec, n_rep=2000)
    # Var(intercept) ~ 1/n and Var(slope) ~ 1/(n - 3) for standard normal x
    np.testing.assert_allclose(se, [np.sqrt(1 / 50), np.sqrt(1 / 47)], rtol=0.1)


def test_standard_error_study_shape():
    out = standard_error_study(small_fixed(4), ExtensionConfig(), n_studies=3, n_rep=20, n_boot=20)
    for m in ("prob_sample", "naive", "actual", "bootstrap"):
        assert out[m].shape == (3,)
        assert out["per_study"][m].shape == (3, 3)
        np.testing.assert_allclose(out[m], out["per_study"][m].mean(axis=0))
