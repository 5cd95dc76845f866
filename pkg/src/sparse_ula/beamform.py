"""Uplink receive beamforming: MRC, ZF and MMSE SINRs and achievable rates.

Noise power is normalized to one, so every user power enters as the
normalized SNR ``|beta_k|^2 P_k / sigma^2``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (DegenerateChannelError, DimensionError, ParameterError,
                     SingularInterferenceError, SingularMatrixError)

MAX_CONDITION = 1e12


class Beamformer(str, Enum):
    MRC = "mrc"
    ZF = "zf"
    MMSE = "mmse"


@dataclass(frozen=True)
class UplinkSnapshot:
    """Channels of ``K`` users (rows, shape ``(K, M)``) and their linear SNRs."""

    channels: np.ndarray
    snr: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.channels, dtype=complex))
        if H.ndim != 2 or H.shape[0] < 1:
            raise ParameterError("channels must be a (K, M) array with K >= 1")
        snr = np.broadcast_to(np.asarray(self.snr, dtype=float), (H.shape[0],)).copy()
        if np.any(~(snr > 0)):
            raise ParameterError("per-user SNR must be positive")
        if not np.all(np.isfinite(H)):
            raise ParameterError("channel entries must be finite")
        object.__setattr__(self, "channels", np.ascontiguousarray(H))
        object.__setattr__(self, "snr", snr)

    @property
    def K(self):
        return self.channels.shape[0]

    @property
    def M(self):
        return self.channels.shape[1]


@dataclass(frozen=True)
class SinrReport:
    beamformer: Beamformer
    sinr: np.ndarray
    rate: np.ndarray


def rate_from_sinr(sinr):
    """Achievable rate ``log2(1 + sinr)`` in bit/s/Hz."""
    return np.log2(1.0 + np.asarray(sinr, dtype=float))


def hermitian_solve(A, b, max_condition=MAX_CONDITION):
    """Solve ``A x = b`` for Hermitian positive-definite ``A`` via Cholesky.

    Raises :class:`SingularMatrixError` carrying the 2-norm condition number
    when it exceeds ``max_condition`` or ``A`` is not positive definite.
    """
    A = np.asarray(A, dtype=complex)
    eig = np.linalg.eigvalsh(A)
    cond = eig[-1] / eig[0] if eig[0] > 0 else np.inf
    if not cond <= max_condition:
        raise SingularMatrixError(cond)
    factor = scipy.linalg.cho_factor(A, lower=True)
    return scipy.linalg.cho_solve(factor, np.asarray(b, dtype=complex))


def check_zf_dimensions(K, M):
    if K - 1 >= M:
        raise DimensionError(f"ZF needs K - 1 < M interferers to null, got K={K}, M={M}")


def batch_sinr(beamformer, H, snr, users):
    """SINR of user ``users[b]`` in drop ``b`` for a stack ``H`` of shape (B, K, M).

    For ZF the second return value flags drops whose interferer Gram matrix
    exceeded the conditioning threshold; those SINRs are NaN.
    """
    beamformer = Beamformer(beamformer)
    H = np.ascontiguousarray(H, dtype=complex)
    snr = np.ascontiguousarray(snr, dtype=float)
    users = np.ascontiguousarray(users, dtype=np.int64)
    B = H.shape[0]
    if beamformer is Beamformer.MRC:
        if np.any(np.einsum("bkm,bkm->bk", H.conj(), H).real[np.arange(B), users] == 0):
            raise DegenerateChannelError("MRC combiner undefined for a zero-norm channel")
        return kernels.mrc_sinr(H, snr, users), np.zeros(B, dtype=bool)
    if beamformer is Beamformer.ZF:
        check_zf_dimensions(H.shape[1], H.shape[2])
        sinr, cond = kernels.zf_sinr(H, snr, users, MAX_CONDITION)
        return sinr, ~(cond <= MAX_CONDITION)
    return kernels.mmse_sinr(H, snr, users), np.zeros(B, dtype=bool)


def _all_users(snapshot, beamformer):
    K = snapshot.K
    H = np.repeat(snapshot.channels[None], K, axis=0)
    users = np.arange(K)
    sinr, singular = batch_sinr(beamformer, H, snapshot.snr, users)
    if singular.any():
        k = int(np.flatnonzero(singular)[0])
        # recompute the offending condition number for the report
        others = np.delete(snapshot.channels, k, axis=0)
        gram = others.conj() @ others.T
        eig = np.linalg.eigvalsh(gram)
        raise SingularInterferenceError(k, eig[-1] / eig[0] if eig[0] > 0 else np.inf)
    sinr = np.maximum(sinr, 0.0)
    return SinrReport(Beamformer(beamformer), sinr, rate_from_sinr(sinr))


def sinr_mrc(snapshot):
    """MRC: ``P_k |h_k|^2 / (sum_i P_i |h_k^H h_i|^2 / |h_k|^2 + 1)``."""
    return _all_users(snapshot, Beamformer.MRC)


def sinr_zf(snapshot):
    """ZF: ``P_k h_k^H (I - Hb (Hb^H Hb)^-1 Hb^H) h_k`` with ``Hb`` the interferers."""
    return _all_users(snapshot, Beamformer.ZF)


def sinr_mmse(snapshot):
    """MMSE: ``P_k h_k^H C_k^-1 h_k`` with ``C_k = sum_{i!=k} P_i h_i h_i^H + I``."""
    return _all_users(snapshot, Beamformer.MMSE)


def sinr(snapshot, beamformer):
    return _all_users(snapshot, Beamformer(beamformer))
