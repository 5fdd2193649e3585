"""Exception hierarchy shared by all modules."""


class RStabError(Exception):
    """Base class for every error raised by rstab."""

    code = "RSTAB_ERROR"


class NonSymmetricInput(RStabError, ValueError):
    code = "NON_SYMMETRIC_INPUT"


class EmptyField(RStabError, ValueError):
    code = "EMPTY_FIELD"


class UnknownSurface(RStabError, KeyError):
    code = "UNKNOWN_SURFACE"


class BadParams(RStabError, ValueError):
    code = "BAD_PARAMS"


class DegenerateMetric(RStabError, ValueError):
    code = "DEGENERATE_METRIC"


class OracleFailure(RStabError, RuntimeError):
    code = "ORACLE_FAILURE"


class NotSpaceForm(RStabError, ValueError):
    code = "NOT_SPACE_FORM"


class NotAdmissible(RStabError, ValueError):
    code = "NOT_ADMISSIBLE"


class AmbientMismatch(RStabError, ValueError):
    code = "AMBIENT_MISMATCH"


class SingularPr(RStabError, ValueError):
    code = "SINGULAR_PR"


class IdentityCheckFailed(RStabError, ArithmeticError):
    code = "IDENTITY_CHECK_FAILED"


class InsufficientStencil(RStabError, ValueError):
    code = "INSUFFICIENT_STENCIL"


class ImmersionLost(RStabError, ValueError):
    code = "IMMERSION_LOST"


class NotConstantHr1(RStabError, ValueError):
    code = "NOT_CONSTANT_HR1"


class SolverDivergence(RStabError, RuntimeError):
    code = "SOLVER_DIVERGENCE"


class PositivityLost(RStabError, RuntimeError):
    code = "POSITIVITY_LOST"


class NonPositiveTestFunction(RStabError, ValueError):
    code = "NON_POSITIVE_TEST_FUNCTION"


class GeneralAmbientUnsupported(RStabError, ValueError):
    code = "GENERAL_AMBIENT_UNSUPPORTED"


class EmptyDomain(RStabError, ValueError):
    code = "EMPTY_DOMAIN"


class EmptyBoundary(RStabError, ValueError):
    code = "EMPTY_BOUNDARY"


class MissingSecInfimum(RStabError, ValueError):
    code = "MISSING_SEC_INFIMUM"


class PinchingFails(RStabError, ValueError):
    code = "PINCHING_FAILS"


class MeshFormatError(RStabError, ValueError):
    code = "MESH_FORMAT_ERROR"


class ConfigError(RStabError, ValueError):
    code = "CONFIG_ERROR"


class MeshNotFound(RStabError, FileNotFoundError):
    code = "MESH_NOT_FOUND"
