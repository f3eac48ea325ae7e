"""Exception and warning types shared across the pipeline."""


class EigenmarketError(Exception):
    """Base class for every error this package raises on purpose."""


class PanelParseError(EigenmarketError):
    """An input file could not be parsed (bad date, non-numeric cell, ...)."""


class PanelIntegrityError(EigenmarketError):
    """A panel is structurally invalid (duplicate dates, empty instrument, ...)."""


class DataDomainError(EigenmarketError):
    """Values lie outside an operation's domain (non-positive price, zero variance)."""


class UndefinedFitError(DataDomainError):
    """A regression is undefined because the regressor has zero variance."""


class ParameterError(EigenmarketError):
    """A parameter is out of range or inconsistent with the data."""


class DegeneratePortfolioError(EigenmarketError):
    """An eigenportfolio normalizer is too close to zero to divide by."""


class NumericalError(EigenmarketError):
    """A numerical routine failed, e.g. the eigensolver did not converge."""


class SyntheticSpecError(EigenmarketError):
    """A synthetic panel specification is inconsistent or infeasible."""


class ExclusionWarning(UserWarning):
    """An exclusion date was ignored because it is absent from the panel."""
