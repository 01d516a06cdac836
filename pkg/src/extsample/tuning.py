"""Cross-validated choice of the screening levels alpha_st and alpha_ch."""
from dataclasses import dataclass, replace

import numpy as np

from .errors import (DomainError, ExtSampleError, FoldDegeneracyError, InfeasibleSplitError,
                     InsufficientDataError, LeverageDegenerateError, NoValidAlphaError,
                     SingularDesignError)
from .extension import ExtensionConfig, NormScope, extend_sample
from .regression import predict

DEFAULT_ALPHAS = (0.3, 0.2, 0.1, 0.05)


@dataclass(frozen=True)
class CvPlan:
    k: int = 5
    grid: tuple = tuple((a, a) for a in DEFAULT_ALPHAS)
    reduced_grid: bool = True
    seed: int = 0

    def __post_init__(self):
        grid = tuple((float(s), float(c)) for s, c in self.grid)
        if not grid:
            raise DomainError("alpha grid is empty")
        if self.k < 2:
            raise DomainError(f"k must be at least 2, got {self.k}")
        for s, c in grid:
            if not (0 < s < 1 and 0 < c < 1):
                raise DomainError(f"grid point {(s, c)} outside (0, 1)")
            if self.reduced_grid and s != c:
                raise DomainError(f"reduced grid requires alpha_st == alpha_ch, got {(s, c)}")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def reduced(cls, alphas=DEFAULT_ALPHAS, k=5, seed=0):
        return cls(k, tuple((a, a) for a in alphas), True, seed)

    @classmethod
    def full(cls, alphas=DEFAULT_ALPHAS, k=5, seed=0):
        return cls(k, tuple((s, c) for s in alphas for c in alphas), False, seed)


def kfold_split(n, k, seed):
    """Random partition of range(n) into k folds whose sizes differ by at most one."""
    if k < 2:
        raise InfeasibleSplitError(f"k must be at least 2, got {k}")
    if k > n:
        raise InfeasibleSplitError(f"cannot split {n} observations into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def cv_score(prob_sample, nonprob_sample, config, plan, folds=None):
    """Mean squared prediction error on held-out folds of the probability sample."""
    n = prob_sample.n
    folds = kfold_split(n, plan.k, plan.seed) if folds is None else folds
    sse = 0.0
    for j, held in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(n), held, assume_unique=True)
        try:
            res = extend_sample(prob_sample.subset(train_idx), nonprob_sample, config)
        except (SingularDesignError, InsufficientDataError, LeverageDegenerateError) as exc:
            raise FoldDegeneracyError(f"training set without fold {j} is degenerate: {exc}", fold=j)
        pred = predict(res.extended_fit, prob_sample.predictors[held], prob_sample.has_intercept)
        err = prob_sample.responses[held] - pred
        sse += float(err @ err)
    return sse / n


def cv_scores(prob_sample, nonprob_sample, plan, norm_scope=NormScope.FULL):
    """Score every grid point; degenerate points map to ``None``."""
    folds = kfold_split(prob_sample.n, plan.k, plan.seed)
    scores = []
    for a_st, a_ch in plan.grid:
        config = ExtensionConfig(a_st, a_ch, norm_scope)
        try:
            scores.append(cv_score(prob_sample, nonprob_sample, config, plan, folds))
        except ExtSampleError:
            scores.append(None)
    return scores


def select_alphas(prob_sample, nonprob_sample, plan, norm_scope=NormScope.FULL):
    """Grid point with the smallest CV score; exact ties go to the larger alphas."""
    return best_grid_point(cv_scores(prob_sample, nonprob_sample, plan, norm_scope), plan.grid)


def best_grid_point(scores, grid):
    valid = [(s, g) for s, g in zip(scores, grid) if s is not None]
    if not valid:
        raise NoValidAlphaError("every grid point failed during cross-validation")
    return min(valid, key=lambda sg: (sg[0], -sg[1][0], -sg[1][1]))[1]
