"""Per-user channel vectors: pure LoS and Rician one-ring multipath.

The one-ring channel is a LoS path plus ``L`` scattered paths whose angles
are drawn uniformly within ``+-arcsin(R/r)`` of the user direction. Powers
are split so the LoS-to-scattered ratio equals the Rician factor and the
mean channel power is ``|beta|^2 M``.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .array import steering_vector
from .errors import ParameterError


@dataclass(frozen=True)
class UserPlacement:
    """User direction (radians) and complex path gain."""

    theta: float
    path_gain: complex = 1.0

    def __post_init__(self):
        if not abs(self.theta) <= math.pi / 2:
            raise ParameterError(f"theta must lie in [-pi/2, pi/2], got {self.theta!r}")
        if self.path_gain == 0:
            raise ParameterError("an active user needs a non-zero path gain")


@dataclass(frozen=True)
class OneRingParams:
    paths: int = 10
    ring_radius: float = 5.0
    center_range: float = 40.0
    rician_k_db: float = 20.0

    def __post_init__(self):
        if int(self.paths) != self.paths or self.paths < 1:
            raise ParameterError(f"paths must be a positive integer, got {self.paths!r}")
        if not self.ring_radius > 0:
            raise ParameterError("ring radius must be positive")
        if not self.center_range > self.ring_radius:
            raise ParameterError("ring centre range must exceed the ring radius")
        if not math.isfinite(self.rician_k_db):
            raise ParameterError(f"Rician factor must be finite, got {self.rician_k_db!r} dB")
        if not math.isfinite(self.rician_k):
            raise ParameterError(f"Rician factor {self.rician_k_db} dB overflows")

    @property
    def rician_k(self):
        with np.errstate(over="ignore"):
            return float(np.power(10.0, self.rician_k_db / 10))

    @property
    def angular_spread(self):
        """Half-width in radians of the scatterer angle window."""
        return math.asin(self.ring_radius / self.center_range)


def los_channel(array, user):
    """``beta * a(theta)``."""
    return user.path_gain * steering_vector(array, user.theta)


def one_ring_paths(theta, params, rng):
    """Draw path sines and complex gains for users at angles ``theta``.

    Returns ``(sin_paths, gains)`` of shape ``(K, L + 1)``; column 0 is the
    LoS path. Draw order is fixed: scatterer offsets, then phases.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    K, L = theta.shape[0], params.paths
    kc = params.rician_k
    spread = params.angular_spread
    offsets = rng.uniform(-spread, spread, size=(K, L))
    phases = rng.uniform(0.0, 2 * np.pi, size=(K, L))

    angles = np.empty((K, L + 1))
    angles[:, 0] = theta
    angles[:, 1:] = theta[:, None] + offsets
    gains = np.empty((K, L + 1), dtype=complex)
    gains[:, 0] = math.sqrt(kc / (1 + kc))
    gains[:, 1:] = math.sqrt(1 / ((1 + kc) * L)) * np.exp(1j * phases)
    return np.sin(angles), gains


def synthesize(array, sin_paths, gains):
    """Sum of steering vectors; inputs ``(B, K, P)``, output ``(B, K, M)``."""
    sin_paths = np.ascontiguousarray(sin_paths, dtype=float)
    gains = np.ascontiguousarray(gains, dtype=complex)
    return kernels.synthesize_channels(sin_paths, gains, array.M, array.eta)


def one_ring_channel(array, user, params, rng):
    sin_paths, gains = one_ring_paths([user.theta], params, rng)
    h = synthesize(array, sin_paths[None], gains[None])[0, 0]
    return user.path_gain * h
