"""Closed-form analysis under the two-lobe beam approximation.

The exact pattern is replaced by a piecewise-constant surrogate: gain
``g_main`` within ``t = alpha / (M eta)`` of any main/grating lobe centre,
``g_side`` elsewhere. With users' ``sin(theta)`` i.i.d. on
``[-sin(theta_max), sin(theta_max)]`` this gives

* the probability ``p`` that two users collide in a lobe,
* the per-user rate CDF under LoS + MRC, exact as a binomial sum and
  approximately as a Gaussian,
* the range of ``theta_max`` over which a sparse array collides less
  often than a collocated one.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, special

from . import kernels
from .array import ArrayConfig, beam_gain
from .errors import NoCrossoverError, ParameterError

FIT_ALPHA_STEP = 1e-3
FIT_DEFAULT_POINTS = 2 ** 14
FIT_POINTS_PER_LOBE = 64
FIT_DB_FLOOR = 1e-12
ATOM_TOL = 1e-9


@dataclass(frozen=True)
class TwoLobeModel:
    alpha: float
    g_main: float
    g_side: float

    def __post_init__(self):
        if not 0 <= self.alpha <= 2:
            raise ParameterError(f"alpha must lie in [0, 2], got {self.alpha!r}")
        if not 0 < self.g_main <= 1:
            raise ParameterError(f"g_main must lie in (0, 1], got {self.g_main!r}")
        if not 0 <= self.g_side < self.g_main:
            raise ParameterError("g_side must satisfy 0 <= g_side < g_main")

    def half_width(self, array):
        return self.alpha / (array.M * array.eta)


@dataclass(frozen=True)
class AnalyticScenario:
    """``K`` users with equal normalized SNR ``snr`` (linear) spread over ``+-theta_max``."""

    K: int
    array: ArrayConfig
    theta_max: float
    snr: float

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ParameterError(f"K must be a positive integer, got {self.K!r}")
        if not 0 < self.theta_max <= math.pi / 2:
            raise ParameterError("theta_max must lie in (0, pi/2] radians")
        if not self.snr > 0:
            raise ParameterError("snr must be positive")


@dataclass(frozen=True)
class CrossoverThresholds:
    theta_lower: float
    theta_upper: float


def band_edge_g_main(M):
    """Main-lobe level used with ``alpha = 1.6``: the exact gain at ``0.8 / (M eta)``."""
    return (math.sin(0.4 * math.pi) / (M * math.sin(0.4 * math.pi / M))) ** 2


# -- two-lobe surrogate -----------------------------------------------------

def _lobe_offset(array, delta):
    """Distance to the nearest main/grating lobe centre, in units of ``1/(M eta)``."""
    nmax = math.floor(array.eta)
    n = np.clip(np.round(0.5 * array.eta * delta), -nmax, nmax)
    return np.abs(delta - 2.0 * n / array.eta) * (array.M * array.eta)


def two_lobe_gain(model, array, delta):
    delta = np.asarray(delta, dtype=float)
    flat = np.ascontiguousarray(delta.ravel())
    out = kernels.two_lobe_gain(flat, array.M, array.eta, model.alpha,
                                model.g_main, model.g_side).reshape(delta.shape)
    return out[()] if out.ndim == 0 else out


def _fit_grid(array, grid_points):
    needed = math.ceil(FIT_POINTS_PER_LOBE * array.M * array.eta) + 1
    if grid_points is None:
        grid_points = max(FIT_DEFAULT_POINTS, needed)
    if grid_points < needed:
        raise ParameterError(
            f"fit grid of {grid_points} points cannot resolve the main lobe; "
            f"need at least {needed}")
    return np.linspace(-2.0, 2.0, int(grid_points))


def fit_two_lobe(array, grid_points=None, max_iter=100):
    """Least-squares fit of ``alpha`` and ``g_side`` with ``g_main`` held at :func:`band_edge_g_main`.

    Coordinate descent: ``alpha`` minimizes the squared dB-scale residual
    over a 1e-3 grid on ``[0, 2]``; ``g_side`` is then the linear mean of
    the pattern outside the lobe bands. Iterates until ``alpha`` repeats.
    """
    delta = _fit_grid(array, grid_points)
    gain = beam_gain(array, delta)
    g_main = band_edge_g_main(array.M)

    u = _lobe_offset(array, delta)
    order = np.argsort(u, kind="stable")
    u_sorted = u[order]
    level = 10 * np.log10(np.maximum(gain, FIT_DB_FLOOR))[order]
    lin = gain[order]
    c1 = np.concatenate([[0.0], np.cumsum(level)])
    c2 = np.concatenate([[0.0], np.cumsum(level ** 2)])
    clin = np.concatenate([[0.0], np.cumsum(lin)])
    total = len(u_sorted)

    alphas = np.round(np.arange(0, round(2 / FIT_ALPHA_STEP) + 1) * FIT_ALPHA_STEP, 12)
    n_in = np.searchsorted(u_sorted, alphas, side="right")
    n_out = total - n_in
    lm = 10 * math.log10(g_main)

    g_side = gain.mean()
    alpha = None
    for _ in range(max_iter):
        ls = 10 * math.log10(max(g_side, FIT_DB_FLOOR))
        s1_in, s2_in = c1[n_in], c2[n_in]
        s1_out, s2_out = c1[-1] - s1_in, c2[-1] - s2_in
        sse = (s2_in - 2 * lm * s1_in + n_in * lm ** 2
               + s2_out - 2 * ls * s1_out + n_out * ls ** 2)
        j = int(np.argmin(sse))
        new_alpha = float(alphas[j])
        outside = n_out[j]
        g_side = (clin[-1] - clin[n_in[j]]) / outside if outside else 0.0
        if new_alpha == alpha:
            break
        alpha = new_alpha
    return TwoLobeModel(alpha, g_main, float(g_side))


def fit_residual(model, array, grid_points=None):
    """Root-mean-square linear residual of the surrogate over the fit grid."""
    delta = _fit_grid(array, grid_points)
    diff = beam_gain(array, delta) - two_lobe_gain(model, array, delta)
    return float(np.sqrt(np.mean(diff ** 2)))


# -- collision probability --------------------------------------------------

def collision_prob_collocated(M, alpha, theta_max):
    """Lobe collision probability of a collocated array (``eta = 1``), uniform angles."""
    s = math.sin(theta_max)
    if s < alpha / (2 * M):
        return 1.0
    p = (4 * alpha * M * s - alpha ** 2) / (4 * s ** 2 * M ** 2)
    return min(max(p, 0.0), 1.0)


def _collision_prob_general(eta, M, alpha, theta_max):
    s = math.sin(theta_max)
    if s < alpha / (2 * M * eta):
        return 1.0
    nmax = math.floor(eta * s - alpha / (2 * M))
    p = (alpha * ((2 * nmax + 1) * s - alpha / (4 * M * eta) - nmax * (nmax + 1) / eta)
         / (s ** 2 * M * eta))
    return min(max(p, 0.0), 1.0)


def lobe_collision_prob(eta, M, alpha, theta_max):
    """Closed-form collision probability for uniformly distributed ``sin(theta)``.

    Lobes straddling the edge of the support are neglected. ``eta == 1``
    dispatches to :func:`collision_prob_collocated`.
    """
    if eta == 1:
        return collision_prob_collocated(M, alpha, theta_max)
    return _collision_prob_general(eta, M, alpha, theta_max)


def per_lobe_prob(n, eta, M, alpha, theta_max):
    """Probability that two users collide in lobe ``n`` (``n = 0`` is the main lobe)."""
    if abs(n) > math.floor(eta):
        raise ParameterError(f"lobe index {n} exceeds floor(eta) = {math.floor(eta)}")
    s = math.sin(theta_max)
    t = alpha / (M * eta)
    if n == 0:
        if 2 * s < t:
            return 1.0
        return (4 * t * s - t ** 2) / (4 * s ** 2)
    a = abs(n)
    edge = eta * s
    if a <= edge - t * eta / 2:
        return t * (s - a / eta) / s ** 2
    if a < edge + t * eta / 2:
        return (s + t / 2 - a / eta) ** 2 / (2 * s ** 2)
    return 0.0


def collision_prob_exact(eta, M, alpha, theta_max):
    """Sum of :func:`per_lobe_prob` over every lobe, straddling ones included."""
    nmax = math.floor(eta)
    return sum(per_lobe_prob(n, eta, M, alpha, theta_max) for n in range(-nmax, nmax + 1))


def collision_prob_numeric(eta, M, alpha, theta_max, pdf=None, *,
                           cdf_points=2 ** 14 + 1, nodes=16):
    """Collision probability by direct integration of ``f(x_i) f(x_k)`` over the lobe bands.

    ``pdf`` is the density of ``sin(theta)`` on ``[-sin(theta_max), sin(theta_max)]``
    (uniform when omitted). The inner integral uses the tabulated CDF, the
    outer one Gauss-Legendre panels split at every band/support crossing.
    """
    s = math.sin(theta_max)
    t = alpha / (M * eta)
    if pdf is None:
        def pdf(x):
            return np.full_like(np.asarray(x, dtype=float), 0.5 / s)
    mass = integrate.quad(lambda x: float(pdf(np.array(x))), -s, s, limit=200)[0]
    if abs(mass - 1) > 1e-6:
        raise ParameterError(f"pdf integrates to {mass:.8f} over the support, not 1")

    grid = np.linspace(-s, s, cdf_points)
    cdf = integrate.cumulative_simpson(pdf(grid), x=grid, initial=0.0)
    cdf /= cdf[-1]

    nmax = math.floor(eta)
    centres = 2.0 * np.arange(-nmax, nmax + 1) / eta

    def hit(x):
        lo = x[:, None] + centres - t
        hi = x[:, None] + centres + t
        return (np.interp(hi, grid, cdf, left=0.0, right=1.0)
                - np.interp(lo, grid, cdf, left=0.0, right=1.0)).sum(axis=1)

    cuts = np.concatenate([s - centres - t, s - centres + t,
                           -s - centres - t, -s - centres + t,
                           np.linspace(-s, s, 65)])
    cuts = np.unique(np.clip(cuts, -s, s))
    x0, w0 = np.polynomial.legendre.leggauss(nodes)
    a, b = cuts[:-1], cuts[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    x = (0.5 * (b - a)[:, None] * x0 + 0.5 * (a + b)[:, None]).ravel()
    w = (0.5 * (b - a)[:, None] * w0).ravel()
    return float(np.sum(w * pdf(x) * hit(x)))


def collision_prob_gap(eta, M, alpha, theta_max):
    """Collocated minus sparse collision probability; positive where sparse wins."""
    if not eta > 1:
        raise ParameterError("the collision-probability gap compares eta > 1 to eta = 1")
    return (collision_prob_collocated(M, alpha, theta_max)
            - lobe_collision_prob(eta, M, alpha, theta_max))


def crossover_thresholds(eta, M, alpha):
    """Angular spreads bounding the region where sparse arrays collide less often."""
    if not eta > 1:
        raise ParameterError("crossover thresholds need eta > 1")
    a = alpha / M
    disc = eta ** 2 - a * (eta ** 2 + 1 - a)
    if disc < 0:
        raise NoCrossoverError(
            f"discriminant {disc:.3e} < 0: no upper crossover for eta={eta}, M={M}, alpha={alpha}")
    sin_lower = alpha / (2 * M * eta)
    sin_upper = min((eta + math.sqrt(disc)) / (2 * eta), 1.0)
    return CrossoverThresholds(math.asin(sin_lower), math.asin(sin_upper))


# -- rate distribution ------------------------------------------------------

def collision_prob(scenario, model):
    return lobe_collision_prob(scenario.array.eta, scenario.array.M, model.alpha,
                               scenario.theta_max)


def interference_budget(scenario, rate):
    """Largest summed correlation that still supports ``rate``: ``1/(2^R - 1) - 1/(P M)``."""
    rate = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore"):
        return 1.0 / np.expm1(rate * math.log(2)) - 1.0 / (scenario.snr * scenario.array.M)


def _lobe_count(scenario, model, rate):
    y = interference_budget(scenario, rate)
    z = (y - (scenario.K - 1) * model.g_side) / (model.g_main - model.g_side)
    return z


def binomial_pmf(n, p):
    """``P(X = q)`` for ``X ~ Binomial(n, p)``, ``q = 0..n``, assembled in log space."""
    q = np.arange(n + 1)
    log_pmf = (special.gammaln(n + 1) - special.gammaln(q + 1) - special.gammaln(n - q + 1)
               + special.xlogy(q, p) + special.xlog1py(n - q, -p))
    return np.exp(log_pmf)


def rate_cdf_binomial(scenario, model, rate, p=None, *, strict=False):
    """``P(R <= rate)`` for one user under the two-lobe model (binomial lobe count).

    The CDF is right-continuous: at a jump rate the atom is included. With
    ``strict=True`` the left limit ``P(R < rate)`` is returned instead.
    """
    if p is None:
        p = collision_prob(scenario, model)
    n = scenario.K - 1
    z = np.asarray(_lobe_count(scenario, model, rate), dtype=float)
    cum = np.minimum(np.cumsum(binomial_pmf(n, p)), 1.0)
    with np.errstate(invalid="ignore"):
        z = np.where(np.isfinite(z), z, np.sign(z) * (n + 1))
        # On an atom (integer z, up to roundoff) the hit count z itself gives
        # rate == ``rate``; it counts towards F unless the strict limit is asked for.
        k = np.rint(z)
        N = np.where(np.abs(z - k) <= ATOM_TOL, k if strict else k - 1, np.floor(z))
    idx = np.clip(N, 0, n).astype(int)
    F = 1.0 - cum[idx]
    F = np.where(N < 0, 1.0, F)
    F = np.where(N >= n, 0.0, F)
    return F[()] if F.ndim == 0 else F


def rate_cdf_gaussian(scenario, model, rate, p=None):
    """Large-``K`` Gaussian approximation of :func:`rate_cdf_binomial`."""
    if scenario.K < 2:
        raise ParameterError("the Gaussian approximation needs K >= 2")
    if p is None:
        p = collision_prob(scenario, model)
    n = scenario.K - 1
    spread = model.g_main - model.g_side
    mu = n * (model.g_side + spread * p)
    nu = n * spread ** 2 * p * (1 - p)
    y = interference_budget(scenario, rate)
    if nu == 0:
        F = 0.5 * (1 - np.sign(y - mu))
    else:
        F = 0.5 * special.erfc((y - mu) / math.sqrt(2 * nu))
    F = np.asarray(F, dtype=float)
    return F[()] if F.ndim == 0 else F


def rate_cdf_jumps(scenario, model):
    """Rates (ascending) at which :func:`rate_cdf_binomial` steps."""
    n = scenario.K - 1
    j = np.arange(n + 1)
    y = j * (model.g_main - model.g_side) + n * model.g_side
    inv = y + 1.0 / (scenario.snr * scenario.array.M)
    with np.errstate(divide="ignore"):
        rates = np.log2(1.0 + 1.0 / inv[inv > 0])
    return np.sort(rates)


def rate_cdf_sup_distance(scenario, model, p=None):
    """Exact ``sup_R |binomial CDF - Gaussian CDF|`` over all positive rates."""
    if p is None:
        p = collision_prob(scenario, model)
    n = scenario.K - 1
    spread = model.g_main - model.g_side
    z_min = (-1.0 / (scenario.snr * scenario.array.M) - n * model.g_side) / spread
    sd = math.sqrt(n * p * (1 - p))
    cum = np.minimum(np.cumsum(binomial_pmf(n, p)), 1.0)

    def phi(z):
        if sd == 0:
            return np.where(z < n * p, 0.0, np.where(z > n * p, 1.0, 0.5))
        return special.ndtr((z - n * p) / sd)

    worst = 0.0
    # Lobe count N = floor(z) is constant on [j, j+1); the Gaussian term is
    # monotone there, so the supremum is attained at an interval end.
    for j in range(max(math.floor(z_min), -1), n + 1):
        lo = max(float(j), z_min)
        b = 0.0 if j < 0 else cum[min(j, n)]
        if j >= n:
            b = 1.0
        ends = [phi(lo)] + ([] if j >= n else [phi(j + 1.0)])
        for e in ends:
            worst = max(worst, abs(b - float(e)))
    return worst
