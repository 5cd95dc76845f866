"""Exception types raised by sparse_ula.

Validation problems derive from :class:`ValueError`; numerical breakdowns
derive from :class:`NumericalError`. The CLI maps the two families onto
distinct exit codes.
"""

import numpy as np


class ParameterError(ValueError):
    """Invalid model or experiment parameter."""


class DegenerateChannelError(ValueError):
    """A channel vector has zero norm."""


class DimensionError(ValueError):
    """Problem dimensions make the requested beamformer undefined."""


class NumericalError(ArithmeticError):
    """Base class for failures that are numerical rather than user input."""


class SingularMatrixError(NumericalError, np.linalg.LinAlgError):
    """A Hermitian system is too ill-conditioned to solve reliably."""

    def __init__(self, condition, message=None):
        self.condition = float(condition)
        super().__init__(message or f"matrix is singular to working precision "
                                    f"(condition estimate {self.condition:.3e})")


class SingularInterferenceError(SingularMatrixError):
    """Interferer Gram matrix of one user is rank deficient under ZF."""

    def __init__(self, user, condition):
        self.user = int(user)
        super().__init__(
            condition,
            f"ZF interferer matrix of user {self.user} is rank deficient "
            f"(condition estimate {float(condition):.3e})",
        )


class NoCrossoverError(NumericalError):
    """Sparse and collocated collision probabilities never cross."""
