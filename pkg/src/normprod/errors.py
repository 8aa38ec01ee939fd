"""Exception hierarchy shared across the package."""


class NormProdError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NormProdError):
    """Invalid distribution parameters."""


class NonPositiveSigma(ValidationError):
    """A standard deviation was zero or negative."""


class CorrelationOutOfRange(ValidationError):
    """|rho| >= 1; the correlation must lie strictly inside (-1, 1)."""


class CaseMismatch(NormProdError):
    """Operation invoked outside its supported parameter case."""


class SingularPoint(NormProdError):
    """Density evaluation requested at a point where it diverges."""


class NotConverged(NormProdError):
    """Series or quadrature failed to converge within its budget."""


class NonPositiveArgument(NormProdError):
    """Bessel argument must be positive."""


class OverflowUnscaled(NormProdError):
    """Unscaled Bessel value exceeds the representable floating range."""


class DegenerateVariance(NormProdError):
    """Variance is zero; skewness/kurtosis undefined."""


class ParameterNotRational(NormProdError):
    """Exact mode requires parameters convertible to rationals."""


class NotSquare(NormProdError):
    """Determinant requested for a non-square matrix."""
