"""
Exception hierarchy for the PL-duality lab.

InputError and its subclasses mean the request could not be understood
(CLI exit 2); DomainError means a well-formed request violates a
mathematical precondition (CLI exit 1).
"""


class PltError(Exception):
    """Root of every error raised by this package."""


class InputError(PltError, ValueError):
    """Malformed or non-parseable input."""


class TracelessError(InputError):
    """An algebra element was required to be traceless."""


class DeterminantError(InputError):
    """A group element was required to have determinant one."""


class DomainError(PltError, ValueError):
    """Input violates a mathematical precondition."""


class NormalizationError(DomainError):
    """Initial momentum image is not on the unit sphere det X = 1."""


class DegenerateOrbitError(DomainError):
    """Point lies on a zero-dimensional dressing orbit (beta ~ 0)."""


class LeafMembershipError(DomainError):
    """State is not on the preimage of the requested symplectic leaf."""


class GridError(DomainError):
    """Trajectory grid is too short or not uniform."""


class IntegrationError(PltError, RuntimeError):
    """Numerical integration could not complete."""


class BlowUpError(IntegrationError):
    """State norm exceeded the blow-up threshold."""


class VerificationFailure(PltError):
    """A verification property failed."""


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit status."""
    if isinstance(error, InputError):
        return 2
    return 1
