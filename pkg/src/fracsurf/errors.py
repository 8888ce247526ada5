"""Exception hierarchy shared across the package.

Every error raised deliberately by fracsurf derives from :class:`FracsurfError`,
so callers (and the CLI) can catch one base class for validation failures.
"""


class FracsurfError(Exception):
    """Base class for all fracsurf errors."""


class NonMonotoneNodesError(FracsurfError):
    """Node abscissae are not strictly increasing."""


class DimensionMismatchError(FracsurfError):
    """Array shapes do not match the declared grid dimensions."""


class InvalidRectError(FracsurfError):
    """Rectangle bounds are degenerate or reversed."""


class BadEndpointIndexError(FracsurfError):
    """Index-map argument is neither 0 nor the endpoint index."""


class PatchIndexError(FracsurfError):
    """Patch or map index outside 1..N (resp. 1..M)."""


class OutOfDomainError(FracsurfError):
    """Point lies outside the interpolation rectangle."""


class ScalingOutOfRangeError(FracsurfError):
    """Vertical scaling magnitude is not strictly below 1."""


class NonContractiveError(FracsurfError):
    """Requested iteration needs contraction the system does not provide."""


class MismatchedDomainError(FracsurfError):
    """Sampled field does not cover the system's rectangle."""


class GeometryMismatchError(FracsurfError):
    """Two systems do not share the same node geometry."""


class InvalidOrderError(FracsurfError):
    """Fractional order outside the valid range for the operation."""


class GammaPoleError(FracsurfError):
    """Gamma function evaluated at a nonpositive integer."""


class SeriesBudgetError(FracsurfError):
    """Series did not converge within the configured term budget."""


class DomainViolationError(FracsurfError):
    """Transform kind requires a positive domain or transform point."""


class ZeroScaleError(FracsurfError):
    """Scale-type transform argument must be nonzero."""


class ConfigParseError(FracsurfError):
    """Config document is malformed (bad line, unknown key, bad literal)."""


class ConfigValidationError(FracsurfError):
    """Config parsed but violates a downstream invariant."""
