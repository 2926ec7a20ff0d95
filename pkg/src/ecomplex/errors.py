"""Exception hierarchy.

``InputError`` covers anything wrong with what the caller handed in (files,
parameters, empty tables). ``ComputationError`` covers inputs that are
well-formed but on which a computation is undefined.
"""


class EcomplexError(Exception):
    """Base class for all package errors."""


class InputError(EcomplexError, ValueError):
    pass


class NoDataError(InputError):
    pass


class MalformedRowError(InputError):
    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}: line {line}: {reason}")


class ComputationError(EcomplexError):
    pass


class NothingToIterateError(ComputationError):
    pass


class DegenerateDistributionError(ComputationError):
    """A statistic needs variance that the data does not have."""


class InsufficientOverlapError(ComputationError):
    pass


class CollinearityError(ComputationError):
    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(
            "design matrix is rank deficient; collinear columns: " + ", ".join(self.columns)
        )
