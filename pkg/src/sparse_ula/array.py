"""Uniform linear array geometry and beam-pattern analytics.

Element spacing is ``eta`` half-wavelengths, so ``eta == 1`` is the usual
collocated array and ``eta > 1`` a sparse one. All angles are radians.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .errors import DegenerateChannelError, ParameterError


@dataclass(frozen=True)
class ArrayConfig:
    """ULA with ``M`` elements spaced ``eta * lambda / 2`` apart."""

    M: int
    eta: float = 1.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ParameterError(f"M must be an integer >= 2, got {self.M!r}")
        if not math.isfinite(self.eta) or self.eta < 1:
            raise ParameterError(f"eta must be finite and >= 1, got {self.eta!r}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def is_sparse(self):
        return self.eta > 1


def _check_angle(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) > np.pi / 2 + 1e-12) or not np.all(np.isfinite(theta)):
        raise ParameterError("angles must lie in [-pi/2, pi/2] radians")
    return theta


def steering_vector(array, theta):
    """Array response ``[exp(j*pi*eta*m*sin(theta))]_{m=0..M-1}``.

    ``theta`` may be a scalar (returns shape ``(M,)``) or an array, in which
    case the element axis is appended last.
    """
    theta = _check_angle(theta)
    m = np.arange(array.M)
    return np.exp(1j * np.pi * array.eta * np.sin(theta)[..., None] * m)


def beam_gain(array, delta):
    """Normalized beam pattern ``|sin(pi*M*eta*d/2) / (M sin(pi*eta*d/2))|^2``.

    Lobe centres (``eta*d/2`` integer) return the limit value 1.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(np.abs(delta) > 2 + 1e-12):
        raise ParameterError("spatial angle difference must satisfy |delta| <= 2")
    flat = np.ascontiguousarray(delta.ravel())
    out = kernels.beam_gain(flat, array.M, array.eta).reshape(delta.shape)
    return out[()] if out.ndim == 0 else out


def correlation_from_channels(h_k, h_i):
    """Squared normalized correlation ``|h_k^H h_i|^2 / (|h_k|^2 |h_i|^2)``."""
    h_k = np.asarray(h_k, dtype=complex)
    h_i = np.asarray(h_i, dtype=complex)
    if h_k.shape != h_i.shape:
        raise ParameterError(f"channel lengths differ: {h_k.shape} vs {h_i.shape}")
    nk = np.vdot(h_k, h_k).real
    ni = np.vdot(h_i, h_i).real
    if nk == 0 or ni == 0:
        raise DegenerateChannelError("correlation of a zero-norm channel is undefined")
    return abs(np.vdot(h_k, h_i)) ** 2 / (nk * ni)


def main_lobe_beamwidth(array):
    """Null-to-null main-lobe width in spatial-angle units, ``4 / (M eta)``."""
    return 4.0 / (array.M * array.eta)


def main_lobe_nulls(array):
    half = main_lobe_beamwidth(array) / 2
    return np.array([-half, half])


def grating_lobe_positions(array):
    """Grating-lobe centres ``2n/eta`` for ``n = +-1 .. +-floor(eta)``, ascending.

    For ``eta == 1`` this is just the end-fire pair ``+-2``.
    """
    n = np.arange(1, math.floor(array.eta) + 1)
    pos = 2.0 * n / array.eta
    pos = pos[pos <= 2 + 1e-12]
    return np.concatenate([-pos[::-1], pos])
