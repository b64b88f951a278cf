"""Exception types shared across the package."""


class BadlabError(Exception):
    """Base class for all badlab errors."""


class FormatError(BadlabError):
    """Input text is not a parsable delimiter-separated table."""


class MappingError(BadlabError):
    """A column mapping refers to a header that does not exist."""


class InsufficientDataError(BadlabError):
    """Too few usable rows for the requested fit or estimate."""


class SingularDesignError(BadlabError):
    """The design matrix is rank deficient (constant or collinear columns)."""


class DegenerateDistributionError(BadlabError):
    """A sample has zero spread, so no density can be estimated."""


class DecompositionError(BadlabError):
    """A correlation matrix is not positive definite."""
