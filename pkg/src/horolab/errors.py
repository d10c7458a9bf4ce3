"""Exception hierarchy.

Configuration problems and numerical failures are kept apart because the
command line maps them to different exit codes.
"""


class HorolabError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(HorolabError, ValueError):
    """A model or experiment description is malformed."""


class PreconditionError(HorolabError, ValueError):
    """An operation was called outside the hypotheses it needs."""


class NumericalError(HorolabError, RuntimeError):
    """A computation failed to reach its accuracy target."""


class IntegrationError(NumericalError):
    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (at t={t:.6g})")
        self.t = t


class BlowUpError(IntegrationError):
    """A Riccati solution left every bounded region in finite time."""


class SingularTensorError(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ShootingError(NumericalError):
    """The two-point geodesic problem did not converge."""


class QuadratureError(NumericalError):
    pass


class ProfileMismatchError(HorolabError, ValueError):
    """Two tensors that must live on the same geodesic do not."""
