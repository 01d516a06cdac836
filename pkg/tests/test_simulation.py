import math
from dataclasses import replace

import numpy as np
import pytest

from extsample.errors import AlignmentError, DimensionError, DomainError, StudyFailureError
from extsample.extension import ExtensionConfig, extend_sample
from extsample.fileio import load_scenario
from extsample.regression import fit_ols
from extsample.simulation import (METRICS, FixedPollution, RandomPollution, ReplicationRecord,
                                  ScenarioSpec, aggregate, gen_correlated_normals, gen_scenario,
                                  hits_false_positives, mse, relative_mse, replication_rng, run_study)

import oracles


def spec_a(seed=3, **kw):
    base = ScenarioSpec(1, 40, 200, 200, (1,), 0.0, (1, 1), 1, 1, 4, FixedPollution((1,), (2, -1)), seed)
    return replace(base, **kw)


@pytest.mark.parametrize("rho", [0.0, 0.3])
def test_correlated_normal_moments(rho):
    mu = np.array([1.0, -2.0, 0.5, 3.0])
    Z = gen_correlated_normals(100_000, mu, rho, np.random.default_rng(0))
    np.testing.assert_allclose(Z.mean(axis=0), mu, atol=0.02)
    C = np.corrcoef(Z, rowvar=False)
    off = C[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, rho, atol=0.02)
    np.testing.assert_allclose(Z.var(axis=0), 1.0, atol=0.02)


def test_correlated_normals_edge_cases():
    assert gen_correlated_normals(0, [0, 0], 0.3, np.random.default_rng(0)).shape == (0, 2)
    with pytest.raises(DomainError):
        gen_correlated_normals(5, [0, 0, 0], -0.6, np.random.default_rng(0))


def test_spec_validation():
    with pytest.raises(DimensionError):
        spec_a(mu0=(1, 2))
    with pytest.raises(DomainError):
        spec_a(noise_var_prob=0)
    with pytest.raises(DomainError):
        spec_a(n1=-1)
    with pytest.raises(DomainError):
        ScenarioSpec(3, 40, 10, 10, (0, 0, 0), -0.6, (1, 1, 1, 1), 1, 1, 1, RandomPollution(1, 1))


def test_gen_scenario_sizes_and_flags():
    prob, nonprob, flags = gen_scenario(spec_a(n1=30, n2=70))
    assert prob.n == 40 and nonprob.n == 100
    assert flags.sum() == 30 and flags.shape == (100,)
    prob, nonprob, flags = gen_scenario(spec_a(n1=0, n2=0))
    assert nonprob.n == 0 and flags.size == 0


def test_gen_scenario_deterministic():
    a = gen_scenario(spec_a(), replication_rng(5, 2))
    b = gen_scenario(spec_a(), replication_rng(5, 2))
    assert a[1].responses.tobytes() == b[1].responses.tobytes()
    assert np.array_equal(a[2], b[2])


def test_polluted_rows_follow_polluted_model():
    _, nonprob, flags = gen_scenario(spec_a(n1=0, n2=2000))
    fit = fit_ols(nonprob.subset(np.flatnonzero(~flags)))
    assert fit.coefficients[1] == pytest.approx(-1.0, abs=0.3)
    assert nonprob.predictors.mean() == pytest.approx(2.0, abs=0.15)


def test_random_pollution_with_zero_spread_is_unpolluted():
    spec = ScenarioSpec(2, 40, 0, 3000, (0, 1), 0.3, (1, 2, 3), 1, 1, 1, RandomPollution(0.0, 0.0), 4)
    _, nonprob, _ = gen_scenario(spec)
    np.testing.assert_allclose(fit_ols(nonprob).coefficients, [1, 2, 3], atol=0.1)


def test_random_pollution_drawn_once_per_dataset():
    spec = ScenarioSpec(1, 40, 0, 3000, (0,), 0.0, (1, 1), 1, 1, 1e-6, RandomPollution(2.0, 2.0), 4)
    _, nonprob, _ = gen_scenario(spec, replication_rng(0, 0))
    # one shared polluted model: near-exact fit across all 3000 rows
    assert fit_ols(nonprob).sigma2_hat < 1e-5


def test_mse_values():
    assert mse([1, 2], [0, 0]) == 5.0
    assert mse([0.5, 0.5], [0.5, 0.5]) == 0.0
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=7), rng.normal(size=7)
    assert mse(a, b) == pytest.approx(oracles.loop_sse(a, b), abs=1e-12)
    with pytest.raises(DimensionError):
        mse([1, 2], [1, 2, 3])


def test_relative_mse():
    t = np.array([1.0, 2.0])
    assert relative_mse(t + 1, t + 1, t) == 1.0
    assert relative_mse(t + 2, t + 1, t) == 4.0
    assert relative_mse(t + 1, t, t) == math.inf


def test_hits_false_positives_examples():
    prob, nonprob, flags = gen_scenario(spec_a(n1=4, n2=4))
    res = extend_sample(prob, nonprob)
    h, fp = hits_false_positives(res, flags)
    assert h == res.included[flags].mean()
    assert fp == res.included[~flags].mean()
    with pytest.raises(AlignmentError):
        hits_false_positives(res, flags[:-1])


def test_hits_false_positives_hand_counted():
    class Fake:
        included = np.array([True, True, False, True, False])

    flags = np.array([True, False, True, True, False])
    assert hits_false_positives(Fake, flags) == (2 / 3, 1 / 2)


def test_run_study_deterministic_and_aggregates():
    a = run_study(spec_a(), n_datasets=8)
    b = run_study(spec_a(), n_datasets=8)
    assert a.per_replication == b.per_replication
    assert len(a.per_replication) == 8 and not a.failures
    for m in METRICS:
        v = np.array([getattr(r, m) for r in a.per_replication])
        mean, sd = a.aggregates[m]
        assert mean == pytest.approx(v.mean(), abs=1e-12)
        assert sd == pytest.approx(v.std(ddof=1), abs=1e-12)


def test_run_study_fixed_alphas_recorded():
    rep = run_study(spec_a(), ExtensionConfig(0.1, 0.2), n_datasets=3)
    assert all(r.alpha_st == 0.1 and r.alpha_ch == 0.2 for r in rep.per_replication)


def test_run_study_with_cv_records_grid_choice():
    rep = run_study(spec_a(n1=40, n2=40), n_datasets=4, use_cv=True)
    for r in rep.per_replication:
        assert r.alpha_st == r.alpha_ch and r.alpha_st in (0.3, 0.2, 0.1, 0.05)


def test_run_study_failure_ceiling():
    # n = 2 cannot be fitted with an intercept and a slope
    with pytest.raises(StudyFailureError):
        run_study(spec_a(n=2), n_datasets=5)


def test_aggregate_skips_failures():
    rep = run_study(spec_a(), n_datasets=4)
    recs = rep.per_replication + [ReplicationRecord(99, error="x")]
    assert aggregate(recs) == rep.aggregates


def test_indistinguishable_rows_hit_at_similar_rates():
    # no pollution and equal noise: target and "polluted" rows come from one model
    spec = ScenarioSpec(2, 40, 100, 100, (0, 0), 0.3, (1, 2, 3), 1, 1, 1, RandomPollution(0.0, 0.0), 7)
    rep = run_study(spec, n_datasets=100)
    assert abs(rep.aggregates["hits"][0] - rep.aggregates["false_positives"][0]) <= 0.15


def test_builtin_setting_a_false_positive_rate():
    rep = run_study(load_scenario("setting_a"), n_datasets=50)
    assert rep.aggregates["hits"][0] >= 0.8
    assert 0.1 <= rep.aggregates["false_positives"][0] <= 0.45
