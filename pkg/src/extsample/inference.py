"""Standard errors for the extended-sample estimator.

Bootstrap resamples the probability and non-probability samples separately
(sizes preserved) and reruns the whole pipeline, thresholds included. The
"actual" reference error is the spread of estimates over fresh draws from a
fixed scenario.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import BootstrapDegeneracyError, DomainError, ExtSampleError
from .extension import ExtensionConfig, extend_sample
from .regression import naive_standard_errors
from .simulation import FixedPollution, gen_scenario, replication_rng

MAX_RETRIES = 10


@dataclass(frozen=True)
class BootstrapSpec:
    n_boot: int = 100
    seed: int = 0
    resample_scheme: str = "stratified"

    def __post_init__(self):
        if self.n_boot < 1:
            raise DomainError(f"n_boot must be >= 1, got {self.n_boot}")
        if self.resample_scheme != "stratified":
            raise DomainError(f"unsupported resample scheme {self.resample_scheme!r}")


def _sd(estimates):
    estimates = np.asarray(estimates)
    ddof = 1 if len(estimates) > 1 else 0
    return np.std(estimates, axis=0, ddof=ddof)


def _one_replicate(prob, nonprob, config, rng):
    failures = 0
    while True:
        i0 = rng.integers(0, prob.n, prob.n)
        i1 = rng.integers(0, nonprob.n, nonprob.n)
        try:
            return extend_sample(prob.subset(i0), nonprob.subset(i1), config).extended_fit.coefficients, failures
        except ExtSampleError as exc:
            failures += 1
            if failures > MAX_RETRIES:
                raise BootstrapDegeneracyError(
                    f"resample stayed degenerate after {MAX_RETRIES} redraws: {exc}",
                    failure_rate=1.0)


def bootstrap_se(prob_sample, nonprob_sample, config=ExtensionConfig(), spec=BootstrapSpec()):
    """Per-coefficient bootstrap standard deviation (divisor n_boot - 1).

    Replicate b draws from its own stream keyed by (seed, b), so results do
    not depend on execution order.
    """
    coefs = []
    failures = 0
    for b in range(spec.n_boot):
        rng = replication_rng(spec.seed, b)
        try:
            beta, f = _one_replicate(prob_sample, nonprob_sample, config, rng)
        except BootstrapDegeneracyError as exc:
            rate = (failures + MAX_RETRIES + 1) / (failures + MAX_RETRIES + 1 + len(coefs))
            raise BootstrapDegeneracyError(f"replication {b}: {exc} (failure rate {rate:.3f})",
                                           failure_rate=rate)
        failures += f
        coefs.append(beta)
    return _sd(coefs)


def actual_se_approximation(scenario, config=ExtensionConfig(), n_rep=100):
    """Spread of extended-sample estimates over ``n_rep`` fresh draws of ``scenario``."""
    if not isinstance(scenario.pollution, FixedPollution):
        raise DomainError("actual standard errors need fixed pollution parameters")
    coefs = []
    for r in range(n_rep):
        rng = replication_rng(scenario.seed, r)
        for _ in range(MAX_RETRIES + 1):
            prob, nonprob, _flags = gen_scenario(scenario, rng)
            try:
                coefs.append(extend_sample(prob, nonprob, config).extended_fit.coefficients)
                break
            except ExtSampleError:
                continue
        else:
            raise BootstrapDegeneracyError(f"draw {r} stayed degenerate after {MAX_RETRIES} redraws",
                                           failure_rate=1.0)
    return _sd(coefs)


SE_METHODS = ("prob_sample", "naive", "actual", "bootstrap")


def standard_error_study(scenario, config=ExtensionConfig(), n_studies=20, n_rep=100, n_boot=100):
    """Average the four kinds of standard error over ``n_studies`` independent studies.

    Each study draws one dataset, reports the model-based errors of the
    probability-sample and extended fits, bootstraps the pipeline, and runs
    its own actual-error approximation. Returns ``{method: mean SE vector}``
    plus the per-study arrays under ``"per_study"``.
    """
    per = {m: [] for m in SE_METHODS}
    for s in range(n_studies):
        rng = replication_rng(scenario.seed, s)
        study_seed = int(rng.integers(2 ** 32))
        prob, nonprob, _flags = gen_scenario(scenario, rng)
        res = extend_sample(prob, nonprob, config)
        per["prob_sample"].append(naive_standard_errors(res.base_fit))
        per["naive"].append(naive_standard_errors(res.extended_fit))
        per["bootstrap"].append(bootstrap_se(prob, nonprob, config, BootstrapSpec(n_boot, study_seed)))
        per["actual"].append(actual_se_approximation(replace(scenario, seed=study_seed + 1), config, n_rep))
    out = {m: np.mean(v, axis=0) for m, v in per.items()}
    out["per_study"] = {m: np.array(v) for m, v in per.items()}
    return out
