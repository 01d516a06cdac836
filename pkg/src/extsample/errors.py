"""Exception hierarchy.

Every error carries a stable ``code`` (used in the CLI's machine-readable
error line) and the ``origin`` module that raised it.
"""


class ExtSampleError(Exception):
    code = "EXTSAMPLE_ERROR"
    origin = "extsample"


class DomainError(ExtSampleError, ValueError):
    code = "DOMAIN"
    origin = "extsample"


class InsufficientDataError(ExtSampleError, ValueError):
    code = "INSUFFICIENT_DATA"
    origin = "regression"


class SingularDesignError(ExtSampleError):
    code = "SINGULAR_DESIGN"
    origin = "regression"

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DegenerateFitError(ExtSampleError):
    code = "DEGENERATE_FIT"
    origin = "regression"


class LeverageDegenerateError(ExtSampleError):
    code = "LEVERAGE_DEGENERATE"
    origin = "regression"


class DegenerateNormError(ExtSampleError):
    code = "DEGENERATE_NORM"
    origin = "extension"


class EmptyDistributionError(ExtSampleError, ValueError):
    code = "EMPTY_DISTRIBUTION"
    origin = "extension"


class InfeasibleSplitError(ExtSampleError, ValueError):
    code = "INFEASIBLE_SPLIT"
    origin = "tuning"


class FoldDegeneracyError(ExtSampleError):
    code = "FOLD_DEGENERATE"
    origin = "tuning"

    def __init__(self, message, fold=None):
        super().__init__(message)
        self.fold = fold


class NoValidAlphaError(ExtSampleError):
    code = "NO_VALID_ALPHA"
    origin = "tuning"


class BootstrapDegeneracyError(ExtSampleError):
    code = "BOOTSTRAP_DEGENERATE"
    origin = "inference"

    def __init__(self, message, failure_rate=None):
        super().__init__(message)
        self.failure_rate = failure_rate


class DimensionError(ExtSampleError, ValueError):
    code = "DIMENSION"
    origin = "simulation"


class AlignmentError(ExtSampleError, ValueError):
    code = "ALIGNMENT"
    origin = "simulation"


class StudyFailureError(ExtSampleError):
    code = "STUDY_FAILURE"
    origin = "simulation"


class DataFormatError(ExtSampleError, ValueError):
    code = "DATA_FORMAT"
    origin = "io"

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
