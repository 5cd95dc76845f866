"""Numba-compiled kernels, loop-for-loop twins of ``numpy_impl``."""

import numpy as np
from numba import njit

SINGULAR_SIN = 1e-9


@njit(cache=True, nogil=True)
def beam_gain(delta, M, eta):
    out = np.empty(delta.shape[0])
    for i in range(delta.shape[0]):
        # offset from the nearest lobe centre; the (-1)^n signs cancel in the square
        u = 0.5 * eta * delta[i]
        u -= np.rint(u)
        den = np.sin(np.pi * u)
        if abs(den) < SINGULAR_SIN:
            out[i] = 1.0
        else:
            ratio = np.sin(np.pi * M * u) / (M * den)
            out[i] = ratio * ratio
    return out


@njit(cache=True, nogil=True)
def two_lobe_gain(delta, M, eta, alpha, g_main, g_side):
    nmax = np.floor(eta)
    half_width = alpha / (M * eta)
    out = np.empty(delta.shape[0])
    for i in range(delta.shape[0]):
        n = min(max(np.round(0.5 * eta * delta[i]), -nmax), nmax)
        if abs(delta[i] - 2.0 * n / eta) <= half_width:
            out[i] = g_main
        else:
            out[i] = g_side
    return out


@njit(cache=True, nogil=True)
def synthesize_channels(sin_paths, gains, M, eta):
    B, K, P = sin_paths.shape
    H = np.zeros((B, K, M), dtype=np.complex128)
    for b in range(B):
        for k in range(K):
            for p in range(P):
                step = np.pi * eta * sin_paths[b, k, p]
                g = gains[b, k, p]
                for m in range(M):
                    H[b, k, m] += g * np.exp(1j * step * m)
    return H


@njit(cache=True, nogil=True)
def _inner(a, b):
    # a^H b
    acc = 0j
    for m in range(a.shape[0]):
        acc += a[m].conjugate() * b[m]
    return acc


@njit(cache=True, nogil=True)
def mrc_sinr(H, snr, users):
    B, K, _ = H.shape
    out = np.empty(B)
    for b in range(B):
        k = users[b]
        hk = H[b, k]
        nk = _inner(hk, hk).real
        interference = 0.0
        for i in range(K):
            if i != k:
                c = _inner(hk, H[b, i])
                interference += snr[i] * (c.real * c.real + c.imag * c.imag)
        out[b] = snr[k] * nk / (interference / nk + 1.0)
    return out


@njit(cache=True, nogil=True)
def zf_sinr(H, snr, users, max_cond):
    B, K, M = H.shape
    sinr = np.empty(B)
    cond = np.ones(B)
    n = K - 1
    for b in range(B):
        k = users[b]
        hk = H[b, k].copy()
        if n == 0:
            sinr[b] = snr[k] * _inner(hk, hk).real
            continue
        Hi = np.empty((n, M), dtype=np.complex128)
        j = 0
        for i in range(K):
            if i != k:
                Hi[j] = H[b, i]
                j += 1
        gram = np.empty((n, n), dtype=np.complex128)
        rhs = np.empty(n, dtype=np.complex128)
        for i in range(n):
            rhs[i] = _inner(Hi[i], hk)
            for l in range(n):
                gram[i, l] = _inner(Hi[i], Hi[l])
        eig = np.linalg.eigvalsh(gram)
        c = eig[-1] / eig[0] if eig[0] > 0 else np.inf
        cond[b] = c
        if not c <= max_cond:
            sinr[b] = np.nan
            continue
        coef = np.linalg.solve(gram, rhs)
        resid = hk
        for i in range(n):
            resid = resid - coef[i] * Hi[i]
        sinr[b] = snr[k] * _inner(resid, resid).real
    return sinr, cond


@njit(cache=True, nogil=True)
def mmse_sinr(H, snr, users):
    B, K, M = H.shape
    out = np.empty(B)
    for b in range(B):
        k = users[b]
        cov = np.eye(M).astype(np.complex128)
        for i in range(K):
            if i != k:
                h = H[b, i]
                for m in range(M):
                    for l in range(M):
                        cov[m, l] += snr[i] * h[m] * h[l].conjugate()
        hk = H[b, k].copy()
        x = np.linalg.solve(cov, hk)
        out[b] = snr[k] * _inner(hk, x).real
    return out
