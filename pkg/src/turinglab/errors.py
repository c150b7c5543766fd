"""Exception taxonomy.

Two families, mirrored by the CLI exit codes: input errors (bad parameters,
unmet preconditions, malformed files) and numerical failures (iterations that
did not converge, certificates that could not be established).
"""


class TuringLabError(Exception):
    """Base class for all library errors."""


class InputError(TuringLabError):
    """Invalid input or unmet precondition. CLI exit code 2."""


class NumericalError(TuringLabError):
    """A numerical procedure failed or a certificate was violated. CLI exit code 3."""


class InvalidParameterError(InputError):
    pass


class ModelFileError(InputError):
    """Malformed model or configuration file."""


class KineticsUnstableError(InputError):
    """The diffusionless steady state is not linearly stable."""


class NoCriticalValueError(InputError):
    """No finite diffusion threshold exists for these kinetics."""


class BracketFailureError(InputError):
    """No admissible eigenvalue pair brackets the continuum critical wavenumber."""


class ConvergenceError(NumericalError):
    pass


class SingularModeMatrixError(NumericalError):
    """A non-critical mode matrix was singular during the center-manifold solve."""


class DegeneratePairingError(NumericalError):
    """Eigenvector pairing too close to zero to normalize the projection."""


class FixedPointSearchError(NumericalError):
    """Planar fixed-point search failed to converge from every start."""


class NotSaturatedError(NumericalError):
    """Simulation did not reach a statistically steady amplitude in time."""


class NonlinearContaminationError(NumericalError):
    """Growth-rate fit rejected: residual too large for a clean linear regime."""


class PesViolationError(NumericalError):
    """Principle-of-exchange-of-stabilities check failed for a non-critical mode."""


class CrossingNotBracketedError(NumericalError):
    """The sampling grid does not bracket the stability crossing."""
