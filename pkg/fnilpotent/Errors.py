class FNilpotentError(Exception):
    """
    Base class for every error raised by this package.
    """


class FieldError(FNilpotentError):
    """
    Raised for invalid finite fields (non-prime characteristic, reducible or mis-sized modulus, fields that are too
    large) and for arithmetic that mixes elements of different fields or divides by zero.
    """


class DimensionError(FNilpotentError):
    """
    Raised when vector, matrix, exponent-vector or weight lengths do not match.
    """


class PolynomialError(FNilpotentError):
    """
    Raised for malformed or zero polynomials where a nonzero one is required.
    """


class ExponentOverflowError(PolynomialError):
    """
    Raised when powering a polynomial would push an exponent past the supported bound.
    """


class NotQuasiHomogeneousError(PolynomialError):
    """
    Raised when a polynomial is not quasi-homogeneous for the weights it was paired with.
    """


class SearchSpaceError(FNilpotentError):
    """
    Raised when an exhaustive search would exceed its documented bound.
    """


class ConfigurationError(FNilpotentError):
    """
    Raised for curve configurations that are not simple normal crossing inputs.
    """


class SweepError(FNilpotentError):
    """
    Raised for invalid prime ranges and for aggregation over empty evidence.
    """


class SchemaError(FNilpotentError):
    """
    Raised when an input document or an export format does not follow the published schema.
    """


class OptionError(FNilpotentError):
    """
    Raised when a command-line option holds an invalid value.
    """
