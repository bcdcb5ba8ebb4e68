"""Exception hierarchy shared by all curvcert modules."""


class CurvCertError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(CurvCertError):
    """A matrix that must be positive definite is not (Cholesky failed)."""


class MaxSubdivisions(CurvCertError):
    """Adaptive quadrature hit its recursion cap before reaching tolerance."""


class DomainError(CurvCertError):
    """Evaluation left the mathematical domain (log <= 0, sqrt < 0, x/0)."""


class OutOfDomain(CurvCertError):
    """A point lies outside the declared chart domain box."""


class DegeneratePlane(CurvCertError):
    """Sectional curvature requested for (nearly) dependent vectors."""


class RankDeficient(CurvCertError):
    """The projection differential has numerical rank below the base dimension."""


class NotTotallyGeodesic(CurvCertError):
    """The fiber second fundamental form exceeds tolerance."""


class ToleranceExceeded(CurvCertError):
    """A cross-check discrepancy exceeded its declared tolerance."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class HypothesisViolated(CurvCertError):
    """Base or fiber Ricci positivity hypothesis fails on samples."""


class NotFound(CurvCertError):
    """A parameter search exhausted its schedule without success."""


class SameSign(CurvCertError):
    """Bisection endpoints have the same verdict / sign."""


class NoSignChange(CurvCertError):
    """No sign change detected for root bracketing."""


class InvalidSpec(CurvCertError):
    """A Dancer-Wang integral spec violates its structural invariants."""


class UnknownBuiltin(CurvCertError):
    """Requested catalog builtin does not exist."""


class BadParams(CurvCertError):
    """Catalog builtin called with invalid parameters."""


class NotUnit(CurvCertError):
    """A quaternion or sphere point that must be unit-norm is not."""


class ConstraintViolated(CurvCertError):
    """A group-element constraint (Sp(2), Sp(2,m)) residual is too large."""


class ProjectionFailed(CurvCertError):
    """Projection onto a constraint set failed on degenerate input."""


class ConfigError(CurvCertError):
    """CLI configuration file is malformed."""
