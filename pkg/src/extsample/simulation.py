"""Scenario generators, accuracy metrics and multi-replication studies."""
import math
from dataclasses import dataclass, field, fields, replace
from typing import Union

import numpy as np

from .errors import AlignmentError, DimensionError, DomainError, ExtSampleError, StudyFailureError
from .extension import ExtensionConfig, extend_sample
from .regression import Dataset
from .tuning import CvPlan, select_alphas

EXACT_EPS = 1e-300
FAILURE_CEILING = 0.10


@dataclass(frozen=True)
class FixedPollution:
    """Polluted predictors have mean mu0 + mu_shift and coefficients beta_polluted."""

    mu_shift: tuple
    beta_polluted: tuple


@dataclass(frozen=True)
class RandomPollution:
    """Per-dataset shifts: mean mu0 + sigma_loc * N(0,1), coefficients beta0 + sigma_par * N(0,1)."""

    sigma_loc: float
    sigma_par: float


@dataclass(frozen=True)
class ScenarioSpec:
    p: int
    n: int
    n1: int
    n2: int
    mu0: tuple
    pairwise_corr: float
    beta0: tuple
    noise_var_prob: float
    noise_var_target_np: float
    noise_var_polluted: float
    pollution: Union[FixedPollution, RandomPollution]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mu0", tuple(float(v) for v in self.mu0))
        object.__setattr__(self, "beta0", tuple(float(v) for v in self.beta0))
        if len(self.mu0) != self.p:
            raise DimensionError(f"mu0 has length {len(self.mu0)}, expected p = {self.p}")
        if len(self.beta0) != self.p + 1:
            raise DimensionError(f"beta0 has length {len(self.beta0)}, expected p + 1 = {self.p + 1}")
        if min(self.n, self.n1, self.n2) < 0:
            raise DomainError("sample sizes must be non-negative")
        _check_corr(self.p, self.pairwise_corr)
        for name in ("noise_var_prob", "noise_var_target_np", "noise_var_polluted"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if isinstance(self.pollution, FixedPollution):
            pol = FixedPollution(tuple(float(v) for v in self.pollution.mu_shift),
                                 tuple(float(v) for v in self.pollution.beta_polluted))
            if len(pol.mu_shift) != self.p or len(pol.beta_polluted) != self.p + 1:
                raise DimensionError("fixed pollution needs mu_shift of length p and beta_polluted of length p + 1")
            object.__setattr__(self, "pollution", pol)
        elif isinstance(self.pollution, RandomPollution):
            if self.pollution.sigma_loc < 0 or self.pollution.sigma_par < 0:
                raise DomainError("sigma_loc and sigma_par must be non-negative")
        else:
            raise DomainError(f"unknown pollution mode {self.pollution!r}")


def _check_corr(p, rho):
    lower = -1.0 / (p - 1) if p > 1 else -math.inf
    if not lower < rho < 1.0 and p > 1:
        raise DomainError(f"pairwise correlation {rho} not in ({lower:.4g}, 1) for p = {p}")


def replication_rng(seed, index):
    """Independent generator for replication ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def gen_correlated_normals(count, mu, pairwise_corr, rng):
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    p = mu.size
    corr = np.full((p, p), float(pairwise_corr))
    np.fill_diagonal(corr, 1.0)
    try:
        chol = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        raise DomainError(f"correlation matrix with off-diagonal {pairwise_corr} is not positive definite")
    z = rng.standard_normal((count, p))
    return mu + z @ chol.T


def _draw(count, mu, rho, beta, noise_var, rng):
    X = gen_correlated_normals(count, mu, rho, rng)
    y = beta[0] + X @ beta[1:] + math.sqrt(noise_var) * rng.standard_normal(count)
    return X, y


def polluted_parameters(spec, rng):
    mu0 = np.array(spec.mu0)
    beta0 = np.array(spec.beta0)
    pol = spec.pollution
    if isinstance(pol, FixedPollution):
        return mu0 + np.array(pol.mu_shift), np.array(pol.beta_polluted)
    mu = mu0 + pol.sigma_loc * rng.standard_normal(spec.p)
    beta = beta0 + pol.sigma_par * rng.standard_normal(spec.p + 1)
    return mu, beta


def gen_scenario(spec, rng=None):
    """Draw (probability sample, non-probability sample, target flags).

    The non-probability sample is a shuffled mix of n1 target rows and n2
    polluted rows; ``target_flags[i]`` marks row i as a target row.
    """
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    mu_pol, beta_pol = polluted_parameters(spec, rng)
    beta0 = np.array(spec.beta0)
    X0, y0 = _draw(spec.n, spec.mu0, spec.pairwise_corr, beta0, spec.noise_var_prob, rng)
    X1, y1 = _draw(spec.n1, spec.mu0, spec.pairwise_corr, beta0, spec.noise_var_target_np, rng)
    X2, y2 = _draw(spec.n2, mu_pol, spec.pairwise_corr, beta_pol, spec.noise_var_polluted, rng)
    order = rng.permutation(spec.n1 + spec.n2)
    Xnp = np.vstack([X1, X2])[order]
    ynp = np.concatenate([y1, y2])[order]
    flags = np.concatenate([np.ones(spec.n1, bool), np.zeros(spec.n2, bool)])[order]
    return Dataset(y0, X0), Dataset(ynp, Xnp), flags


def mse(beta_hat, beta_true):
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    if beta_hat.shape != beta_true.shape:
        raise DimensionError(f"length mismatch: {beta_hat.shape} vs {beta_true.shape}")
    d = beta_hat - beta_true
    return float(d @ d)


def relative_mse(beta_pse, beta_exte, beta_true):
    """MSE of the probability-sample estimate over that of the extended one.

    Returns ``math.inf`` as the exact-recovery flag when the extended
    estimate hits the truth (denominator at or below ``EXACT_EPS``).
    """
    den = mse(beta_exte, beta_true)
    if den <= EXACT_EPS:
        return math.inf
    return mse(beta_pse, beta_true) / den


def hits_false_positives(result, target_flags):
    flags = np.asarray(target_flags, dtype=bool)
    if flags.shape != result.included.shape:
        raise AlignmentError(
            f"{flags.size} target flags for {result.included.size} non-probability observations")
    inc = result.included
    n1, n2 = int(flags.sum()), int((~flags).sum())
    hits = float((inc & flags).sum()) / n1 if n1 else 0.0
    fp = float((inc & ~flags).sum()) / n2 if n2 else 0.0
    return hits, fp


METRICS = ("mse_pse", "mse_exte", "mse_r", "hits", "false_positives", "extended_size",
           "alpha_st", "alpha_ch")


@dataclass(frozen=True)
class ReplicationRecord:
    replication: int
    mse_pse: float = math.nan
    mse_exte: float = math.nan
    mse_r: float = math.nan
    hits: float = math.nan
    false_positives: float = math.nan
    extended_size: float = math.nan
    alpha_st: float = math.nan
    alpha_ch: float = math.nan
    error: str = ""

    @property
    def ok(self):
        return not self.error


def aggregate(records):
    """Mean and sample standard deviation of every metric over successful replications."""
    good = [r for r in records if r.ok]
    out = {}
    for m in METRICS:
        v = np.array([getattr(r, m) for r in good], dtype=float)
        if v.size == 0 or np.all(np.isnan(v)):
            out[m] = (math.nan, math.nan)
            continue
        mean = float(np.mean(v))
        sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        out[m] = (mean, sd)
    return out


@dataclass
class StudyReport:
    scenario: ScenarioSpec
    config: ExtensionConfig
    per_replication: list
    aggregates: dict = field(default_factory=dict)

    @property
    def failures(self):
        return [r for r in self.per_replication if not r.ok]


def run_replication(spec, config, rng, use_cv=False, plan=None):
    prob, nonprob, flags = gen_scenario(spec, rng)
    if use_cv:
        plan = CvPlan() if plan is None else plan
        plan = replace(plan, seed=int(rng.integers(2 ** 32)))
        a_st, a_ch = select_alphas(prob, nonprob, plan, config.norm_scope)
        config = replace(config, alpha_st=a_st, alpha_ch=a_ch)
    res = extend_sample(prob, nonprob, config)
    beta0 = np.array(spec.beta0)
    b_pse = res.base_fit.coefficients
    b_ext = res.extended_fit.coefficients
    hits, fp = hits_false_positives(res, flags)
    return dict(mse_pse=mse(b_pse, beta0), mse_exte=mse(b_ext, beta0),
                mse_r=relative_mse(b_pse, b_ext, beta0), hits=hits, false_positives=fp,
                extended_size=float(res.extended_sample.n),
                alpha_st=config.alpha_st, alpha_ch=config.alpha_ch)


def run_study(spec, config=ExtensionConfig(), n_datasets=100, use_cv=False, plan=None):
    """Replicate the full pipeline on ``n_datasets`` independent draws of ``spec``.

    Failed replications are kept in the report with their error text; more
    than 10% failures raises ``StudyFailureError``.
    """
    records = []
    for i in range(n_datasets):
        rng = replication_rng(spec.seed, i)
        try:
            rec = ReplicationRecord(i, **run_replication(spec, config, rng, use_cv, plan))
        except ExtSampleError as exc:
            rec = ReplicationRecord(i, error=f"{exc.code}: {exc}")
        records.append(rec)
    n_fail = sum(not r.ok for r in records)
    if n_fail > FAILURE_CEILING * n_datasets:
        raise StudyFailureError(f"{n_fail} of {n_datasets} replications failed; first: "
                                f"{next(r.error for r in records if not r.ok)}")
    return StudyReport(spec, config, records, aggregate(records))


RECORD_FIELDS = tuple(f.name for f in fields(ReplicationRecord))
