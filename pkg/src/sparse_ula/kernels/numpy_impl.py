"""Pure-numpy kernels.

Reference path and fallback when numba is unavailable or disabled. Every
function here has a twin of the same signature in ``numba_impl``.
"""

import numpy as np

SINGULAR_SIN = 1e-9


def beam_gain(delta, M, eta):
    # offset from the nearest lobe centre; the (-1)^n signs cancel in the square
    u = 0.5 * eta * delta
    u = u - np.rint(u)
    den = np.sin(np.pi * u)
    out = np.ones_like(u)
    regular = np.abs(den) >= SINGULAR_SIN
    ratio = np.sin(np.pi * M * u[regular]) / (M * den[regular])
    out[regular] = ratio * ratio
    return out


def two_lobe_gain(delta, M, eta, alpha, g_main, g_side):
    nmax = np.floor(eta)
    n = np.clip(np.round(0.5 * eta * delta), -nmax, nmax)
    half_width = alpha / (M * eta)
    inside = np.abs(delta - 2.0 * n / eta) <= half_width
    return np.where(inside, g_main, g_side)


def synthesize_channels(sin_paths, gains, M, eta):
    m = np.arange(M)
    phase = (np.pi * eta) * sin_paths[..., None] * m
    return np.einsum("bkp,bkpm->bkm", gains, np.exp(1j * phase))


def _own_and_others(H, users):
    B, K, _ = H.shape
    rows = np.arange(B)
    hk = H[rows, users]
    if K == 1:
        return hk, H[:, :0], np.empty((B, 0), dtype=np.intp)
    others = np.arange(K - 1)[None, :]
    others = others + (others >= users[:, None])
    return hk, H[rows[:, None], others], others


def mrc_sinr(H, snr, users):
    hk, Hi, others = _own_and_others(H, users)
    nk = np.einsum("bm,bm->b", hk.conj(), hk).real
    cross = np.einsum("bm,bim->bi", hk.conj(), Hi)
    interference = (snr[others] * np.abs(cross) ** 2).sum(axis=1) / nk
    return snr[users] * nk / (interference + 1.0)


def zf_sinr(H, snr, users, max_cond):
    hk, Hi, _ = _own_and_others(H, users)
    B = H.shape[0]
    nk = np.einsum("bm,bm->b", hk.conj(), hk).real
    if Hi.shape[1] == 0:
        return snr[users] * nk, np.ones(B)
    gram = np.einsum("bim,bjm->bij", Hi.conj(), Hi)
    eig = np.linalg.eigvalsh(gram)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(eig[:, 0] > 0, eig[:, -1] / eig[:, 0], np.inf)
    ok = cond <= max_cond
    sinr = np.full(B, np.nan)
    if ok.any():
        rhs = np.einsum("bim,bm->bi", Hi[ok].conj(), hk[ok])
        coef = np.linalg.solve(gram[ok], rhs[..., None])[..., 0]
        resid = hk[ok] - np.einsum("bi,bim->bm", coef, Hi[ok])
        sinr[ok] = snr[users[ok]] * np.einsum("bm,bm->b", resid.conj(), resid).real
    return sinr, cond


def mmse_sinr(H, snr, users):
    hk, Hi, others = _own_and_others(H, users)
    B, _, M = H.shape
    cov = np.einsum("bi,bim,bin->bmn", snr[others].astype(complex), Hi, Hi.conj())
    cov += np.eye(M)
    x = np.linalg.solve(cov, hk[..., None])[..., 0]
    return snr[users] * np.einsum("bm,bm->b", hk.conj(), x).real
