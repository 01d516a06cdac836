"""Least-squares fitting and case diagnostics.

The design matrix always gets a leading column of ones when the dataset
carries ``has_intercept``; callers pass raw covariates only.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (DegenerateFitError, DomainError, InsufficientDataError,
                     LeverageDegenerateError, SingularDesignError)

RANK_TOL = 1e-10
LEVERAGE_EPS = 1e-10
# sigma_hat below this fraction of the rms response counts as an exact fit
EXACT_FIT_REL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Responses plus raw covariates (no constant column)."""

    responses: np.ndarray
    predictors: np.ndarray
    has_intercept: bool = True

    def __post_init__(self):
        y = _frozen(self.responses).reshape(-1)
        X = np.array(self.predictors, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DomainError(
                f"predictors must have {y.shape[0]} rows, got shape {X.shape}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise DomainError("dataset contains non-finite entries")
        X.flags.writeable = False
        object.__setattr__(self, "responses", y)
        object.__setattr__(self, "predictors", X)

    @property
    def n(self):
        return self.responses.shape[0]

    @property
    def p(self):
        return self.predictors.shape[1]

    @property
    def n_coef(self):
        return self.p + int(self.has_intercept)

    def design(self):
        if self.has_intercept:
            return np.column_stack([np.ones(self.n), self.predictors])
        return np.array(self.predictors)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.responses[idx], self.predictors[idx], self.has_intercept)

    def concat(self, other):
        if other.p != self.p or other.has_intercept != self.has_intercept:
            raise DomainError("datasets disagree on predictor count or intercept convention")
        return Dataset(np.concatenate([self.responses, other.responses]),
                       np.vstack([self.predictors, other.predictors]),
                       self.has_intercept)

    @classmethod
    def empty(cls, p, has_intercept=True):
        return cls(np.empty(0), np.empty((0, p)), has_intercept)


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    hat_diagonals: np.ndarray
    sigma2_hat: float
    dof: int
    xtx_inverse: np.ndarray
    design: np.ndarray

    @property
    def rss(self):
        return float(self.residuals @ self.residuals)

    @property
    def response_ss(self):
        y = self.design @ self.coefficients + self.residuals
        return float(y @ y)

    @property
    def exact(self):
        n = self.residuals.shape[0]
        return self.sigma2_hat <= EXACT_FIT_REL ** 2 * self.response_ss / max(n, 1)


def fit_ols(data):
    """Fit by Householder QR of the intercept-augmented design.

    Raises ``SingularDesignError`` when the smallest diagonal entry of the
    triangular factor is below ``RANK_TOL`` relative to the largest.
    """
    X = data.design()
    n, k = X.shape
    if n - k < 1:
        raise InsufficientDataError(
            f"need at least {k + 1} observations for {k} coefficients, got {n}")
    Q, R = np.linalg.qr(X, mode="reduced")
    d = np.abs(np.diag(R))
    dmax = d.max() if k else 1.0
    cond = d.min() / dmax if k and dmax > 0 else 0.0
    if k and cond < RANK_TOL:
        raise SingularDesignError(
            f"design is rank deficient: min/max |R_jj| = {cond:.3e} < {RANK_TOL:g}",
            condition=cond)
    y = data.responses
    beta = solve_triangular(R, Q.T @ y)
    r_inv = solve_triangular(R, np.eye(k))
    resid = y - X @ beta
    hat = np.einsum("ij,ij->i", Q, Q)
    dof = n - k
    return OlsFit(
        coefficients=_frozen(beta),
        residuals=_frozen(resid),
        hat_diagonals=_frozen(hat),
        sigma2_hat=float(resid @ resid) / dof,
        dof=dof,
        xtx_inverse=_frozen(r_inv @ r_inv.T),
        design=_frozen(X),
    )


def _check_leverage(h):
    if np.any(h >= 1.0 - LEVERAGE_EPS):
        i = int(np.argmax(h))
        raise LeverageDegenerateError(f"observation {i} has leverage {h[i]:.12g} ~ 1")


def studentized_residuals(fit):
    """Internally studentized residuals r_i / (sigma_hat * sqrt(1 - h_ii))."""
    if fit.dof < 1:
        raise InsufficientDataError("residual degrees of freedom must be >= 1")
    if fit.exact:
        raise DegenerateFitError("sigma2_hat is zero: the model fits exactly")
    h = fit.hat_diagonals
    _check_leverage(h)
    return fit.residuals / (np.sqrt(fit.sigma2_hat) * np.sqrt(1.0 - h))


def case_delta_beta(fit, index):
    """beta_hat - beta_hat_(i) for deleting observation ``index``, no refit."""
    h = fit.hat_diagonals[index]
    if h >= 1.0 - LEVERAGE_EPS:
        raise LeverageDegenerateError(
            f"observation {index} has leverage {h:.12g}; deleting it leaves a singular design")
    x = fit.design[index]
    return fit.xtx_inverse @ x * (fit.residuals[index] / (1.0 - h))


def all_delta_betas(fit):
    """Rows are case_delta_beta for every observation."""
    _check_leverage(fit.hat_diagonals)
    X = fit.design
    scale = fit.residuals / (1.0 - fit.hat_diagonals)
    return (X @ fit.xtx_inverse) * scale[:, None]


def naive_standard_errors(fit):
    return np.sqrt(fit.sigma2_hat * np.diag(fit.xtx_inverse))


def predict(fit, predictors, has_intercept=True):
    X = np.asarray(predictors, dtype=float)
    if has_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    return X @ fit.coefficients
