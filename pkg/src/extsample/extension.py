"""Screening non-probability observations against a probability sample.

Each candidate is added on its own to the probability sample. It is kept
when its studentized residual in the augmented fit stays within the normal
quantile ``t_s`` and the relative coefficient change it causes stays below
``t_c``, the empirical quantile of leave-one-out changes within the
probability sample.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegenerateNormError, DomainError, EmptyDistributionError, ExtSampleError
from .regression import EXACT_FIT_REL, Dataset, OlsFit, all_delta_betas, fit_ols, studentized_residuals

NORM_EPS = 1e-12


class NormScope(str, enum.Enum):
    FULL = "full_coefficients"
    SLOPES = "slopes_only"


@dataclass(frozen=True)
class ExtensionConfig:
    alpha_st: float = 0.05
    alpha_ch: float = 0.05
    norm_scope: NormScope = NormScope.FULL

    def __post_init__(self):
        for name in ("alpha_st", "alpha_ch"):
            a = getattr(self, name)
            if not 0.0 < a < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {a!r}")
        object.__setattr__(self, "norm_scope", NormScope(self.norm_scope))


@dataclass(frozen=True)
class CandidateDecision:
    r_star: float
    delta: float
    pass_residual: bool
    pass_change: bool
    diagnostic: str = ""

    @property
    def included(self):
        return self.pass_residual and self.pass_change


@dataclass(frozen=True)
class ExtensionResult:
    """Outcome of screening; per-candidate arrays are indexed by nonprob row."""

    included_ids: np.ndarray
    r_star: np.ndarray
    delta: np.ndarray
    pass_residual: np.ndarray
    pass_change: np.ndarray
    degenerate: np.ndarray
    t_s: float
    t_c: float
    base_fit: OlsFit
    extended_fit: OlsFit
    extended_sample: Dataset
    loo_changes: np.ndarray

    @property
    def included(self):
        return self.pass_residual & self.pass_change

    def decision(self, i):
        return CandidateDecision(
            float(self.r_star[i]), float(self.delta[i]),
            bool(self.pass_residual[i]), bool(self.pass_change[i]),
            "degenerate augmented fit" if self.degenerate[i] else "")

    @property
    def decisions(self):
        return [self.decision(i) for i in range(len(self.r_star))]


def _scope_mask(n_coef, has_intercept, scope):
    mask = np.ones(n_coef, dtype=bool)
    if NormScope(scope) is NormScope.SLOPES and has_intercept:
        mask[0] = False
    return mask


def _base_norm(beta, mask):
    nb = float(np.linalg.norm(beta[mask]))
    if not nb > NORM_EPS:
        raise DegenerateNormError(
            f"norm of the probability-sample coefficients is {nb:.3e}; relative changes undefined")
    return nb


def loo_change_distribution(prob_sample, norm_scope=NormScope.FULL, fit=None):
    """Relative coefficient change ch_i for deleting each probability-sample row."""
    fit = fit_ols(prob_sample) if fit is None else fit
    mask = _scope_mask(prob_sample.n_coef, prob_sample.has_intercept, norm_scope)
    nb = _base_norm(fit.coefficients, mask)
    deltas = all_delta_betas(fit)
    return np.linalg.norm(deltas[:, mask], axis=1) / nb


def threshold_tc(changes, alpha_ch):
    """Nearest-rank empirical (1 - alpha_ch)-quantile: the ceil((1-a)m)-th order statistic."""
    changes = np.asarray(changes, dtype=float)
    m = changes.size
    if m == 0:
        raise EmptyDistributionError("no leave-one-out changes to take a quantile of")
    if not 0.0 < alpha_ch < 1.0:
        raise DomainError(f"alpha_ch must lie in (0, 1), got {alpha_ch!r}")
    # round() strips representation noise such as (1 - 0.05) * 100 = 95.00000000000001
    rank = max(1, math.ceil(round((1.0 - alpha_ch) * m, 9)))
    return float(np.sort(changes)[rank - 1])


def threshold_ts(alpha_st):
    if not 0.0 < alpha_st < 1.0:
        raise DomainError(f"alpha_st must lie in (0, 1), got {alpha_st!r}")
    return float(norm.ppf(1.0 - alpha_st))


def evaluate_candidate(prob_sample, candidate, config, t_s, t_c, base_fit=None):
    """Decide one candidate ``(y, x)`` by explicitly refitting S0 plus the candidate.

    This is the direct form of the screening rule; ``extend_sample`` uses an
    equivalent rank-one update for all candidates at once.
    """
    base_fit = fit_ols(prob_sample) if base_fit is None else base_fit
    y, x = candidate
    aug = prob_sample.concat(Dataset(np.atleast_1d(float(y)),
                                     np.asarray(x, dtype=float).reshape(1, -1),
                                     prob_sample.has_intercept))
    mask = _scope_mask(prob_sample.n_coef, prob_sample.has_intercept, config.norm_scope)
    try:
        fit = fit_ols(aug)
        r_star = float(studentized_residuals(fit)[-1])
        diff = base_fit.coefficients - fit.coefficients
        delta = float(np.linalg.norm(diff[mask]) / _base_norm(base_fit.coefficients, mask))
    except (ExtSampleError, FloatingPointError) as exc:
        return CandidateDecision(math.nan, math.nan, False, False, f"{exc.__class__.__name__}: {exc}")
    if not (math.isfinite(r_star) and math.isfinite(delta)):
        return CandidateDecision(r_star, delta, False, False, "non-finite diagnostic")
    return CandidateDecision(r_star, delta, abs(r_star) <= t_s, delta < t_c)


def screen_candidates(base_fit, nonprob_sample, mask, t_s, t_c):
    """Vectorised screening via the rank-one update of adding one row.

    With h0 = x'(X'X)^-1 x and r0 = y - x'b0, the augmented fit has
    b = b0 + (X'X)^-1 x r0 / (1 + h0), RSS = RSS0 + r0^2 / (1 + h0) and the
    candidate's studentized residual is r0 / (sigma_aug * sqrt(1 + h0)).
    """
    Xc = nonprob_sample.design()
    yc = nonprob_sample.responses
    beta0 = base_fit.coefficients
    nb = _base_norm(beta0, mask)
    ax = Xc @ base_fit.xtx_inverse
    h0 = np.einsum("ij,ij->i", ax, Xc)
    r0 = yc - Xc @ beta0
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.linalg.norm(ax[:, mask], axis=1) * np.abs(r0) / (1.0 + h0) / nb
        # the augmented fit has one more residual degree of freedom
        sigma2 = (base_fit.rss + r0 ** 2 / (1.0 + h0)) / (base_fit.dof + 1)
        r_star = r0 / np.sqrt(sigma2 * (1.0 + h0))
    yss = (base_fit.response_ss + yc ** 2) / (base_fit.residuals.size + 1)
    exact = ~(sigma2 > EXACT_FIT_REL ** 2 * yss)
    degenerate = ~(np.isfinite(r_star) & np.isfinite(delta)) | exact
    pass_residual = ~degenerate & (np.abs(r_star) <= t_s)
    pass_change = ~degenerate & (delta < t_c)
    return r_star, delta, pass_residual, pass_change, degenerate


def extend_sample(prob_sample, nonprob_sample, config=ExtensionConfig()):
    if nonprob_sample.p != prob_sample.p or nonprob_sample.has_intercept != prob_sample.has_intercept:
        raise DomainError("probability and non-probability samples must share predictors")
    base_fit = fit_ols(prob_sample)
    mask = _scope_mask(prob_sample.n_coef, prob_sample.has_intercept, config.norm_scope)
    changes = loo_change_distribution(prob_sample, config.norm_scope, fit=base_fit)
    t_c = threshold_tc(changes, config.alpha_ch)
    t_s = threshold_ts(config.alpha_st)
    r_star, delta, pass_res, pass_ch, degenerate = screen_candidates(
        base_fit, nonprob_sample, mask, t_s, t_c)
    ids = np.flatnonzero(pass_res & pass_ch)
    if ids.size:
        extended = prob_sample.concat(nonprob_sample.subset(ids))
        extended_fit = fit_ols(extended)
    else:
        extended, extended_fit = prob_sample, base_fit
    return ExtensionResult(
        included_ids=ids, r_star=r_star, delta=delta, pass_residual=pass_res,
        pass_change=pass_ch, degenerate=degenerate, t_s=t_s, t_c=t_c,
        base_fit=base_fit, extended_fit=extended_fit, extended_sample=extended,
        loo_changes=changes)


def robustify(prob_sample, config=ExtensionConfig()):
    """Screen the probability sample against itself; return the kept rows."""
    result = extend_sample(prob_sample, prob_sample, config)
    return prob_sample.subset(result.included_ids)
