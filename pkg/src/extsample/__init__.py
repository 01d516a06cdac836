"""Improve regression estimates from a small probability sample by adding
non-probability observations that pass residual and influence screens."""
from .errors import ExtSampleError
from .extension import (ExtensionConfig, ExtensionResult, NormScope, evaluate_candidate,
                        extend_sample, loo_change_distribution, robustify, threshold_tc,
                        threshold_ts)
from .fileio import load_csv, load_scenario, write_csv
from .inference import BootstrapSpec, actual_se_approximation, bootstrap_se, standard_error_study
from .regression import (Dataset, OlsFit, case_delta_beta, fit_ols, naive_standard_errors,
                         studentized_residuals)
from .simulation import (FixedPollution, RandomPollution, ScenarioSpec, StudyReport,
                         gen_correlated_normals, gen_scenario, hits_false_positives, mse,
                         relative_mse, run_study)
from .tuning import CvPlan, cv_score, kfold_split, select_alphas

__version__ = "0.1.0"
