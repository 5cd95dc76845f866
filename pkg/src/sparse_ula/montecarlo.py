"""Monte Carlo experiments: user drops, spatial-angle-difference statistics
and empirical rate CDFs.

Randomness is counter based. Drop ``i`` of a run with seed ``s`` draws from
a Philox stream keyed by ``s`` and positioned by ``i``, so results do not
depend on chunking or on the number of worker processes.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
import math
import warnings

import numpy as np

from . import kernels
from .analytic import lobe_collision_prob
from .array import ArrayConfig
from .beamform import Beamformer, batch_sinr, check_zf_dimensions, rate_from_sinr
from .channel import OneRingParams, one_ring_paths, synthesize
from .errors import ParameterError
from .series import empirical_cdf, DistributionSeries

# Stream families; each occupies its own counter word so they never overlap.
STREAM_DROPS = 0
STREAM_TWO_LOBE = 1
STREAM_DELTA = 2

SINGULAR_WARN_FRACTION = 1e-3
CHUNK_BUDGET = 2 ** 21


@dataclass(frozen=True)
class Scenario:
    array: ArrayConfig
    K: int
    theta_max: float
    snr_db: float
    beamformer: Beamformer = Beamformer.MRC
    channel: OneRingParams | None = None
    drops: int = 100_000
    seed: int = 0
    record: str = "first"

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ParameterError(f"K must be a positive integer, got {self.K!r}")
        if int(self.drops) != self.drops or self.drops < 1:
            raise ParameterError(f"drops must be a positive integer, got {self.drops!r}")
        if not 0 < self.theta_max <= math.pi / 2:
            raise ParameterError("theta_max must lie in (0, pi/2] radians")
        if not math.isfinite(self.snr_db):
            raise ParameterError("snr_db must be finite")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if self.record not in ("first", "random"):
            raise ParameterError("record must be 'first' or 'random'")
        object.__setattr__(self, "beamformer", Beamformer(self.beamformer))
        if self.beamformer is Beamformer.ZF:
            check_zf_dimensions(self.K, self.array.M)

    @property
    def snr(self):
        return 10.0 ** (self.snr_db / 10)

    @property
    def is_los(self):
        return self.channel is None

    def describe(self):
        d = asdict(self)
        d["beamformer"] = self.beamformer.value
        d["theta_max_deg"] = math.degrees(d.pop("theta_max"))
        d["channel"] = "los" if self.channel is None else {"kind": "one-ring", **asdict(self.channel)}
        return d


@dataclass
class SimulationResult:
    rates: np.ndarray
    singular_drops: int


def stream(seed, index, family=STREAM_DROPS):
    """Independent generator for ``(seed, family, index)``."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, family, int(index)]))


def sample_user_angles(K, theta_max, rng):
    """``K`` angles i.i.d. uniform on ``[-theta_max, theta_max]``."""
    return rng.uniform(-theta_max, theta_max, size=K)


# -- spatial angle difference -----------------------------------------------

def delta_samples(pairs, theta_max, seed):
    rng = stream(seed, 0, STREAM_DELTA)
    theta = sample_user_angles(2 * int(pairs), theta_max, rng).reshape(2, -1)
    return np.sin(theta[0]) - np.sin(theta[1])


def delta_histogram(pairs, theta_max, bins, seed, concentration=0.36):
    """Density histogram of ``sin(theta_k) - sin(theta_i)`` over random user pairs."""
    if bins < 16:
        raise ParameterError("use at least 16 bins")
    d = delta_samples(pairs, theta_max, seed)
    edge = 2 * math.sin(theta_max)
    density, edges = np.histogram(d, bins=bins, range=(-edge, edge), density=True)
    centres = 0.5 * (edges[:-1] + edges[1:])
    absd = np.abs(d)
    meta = {
        "pairs": int(pairs),
        "theta_max_deg": math.degrees(theta_max),
        "bin_width": float(edges[1] - edges[0]),
        "max_abs_delta": float(absd.max()),
        "abs_delta_q999": float(np.quantile(absd, 0.999)),
        "concentration_threshold": concentration,
        "fraction_below_threshold": float(np.mean(absd < concentration)),
        "seed": int(seed),
    }
    return DistributionSeries("delta_pdf", "pdf", centres, density, meta)


# -- exact-pattern simulation -----------------------------------------------

def _draw_chunk(scenario, start, stop):
    K = scenario.K
    P = 1 if scenario.is_los else scenario.channel.paths + 1
    B = stop - start
    sin_paths = np.empty((B, K, P))
    gains = np.ones((B, K, P), dtype=complex)
    users = np.zeros(B, dtype=np.int64)
    for j, drop in enumerate(range(start, stop)):
        rng = stream(scenario.seed, drop)
        theta = sample_user_angles(K, scenario.theta_max, rng)
        if scenario.is_los:
            sin_paths[j, :, 0] = np.sin(theta)
        else:
            sin_paths[j], gains[j] = one_ring_paths(theta, scenario.channel, rng)
        if scenario.record == "random":
            users[j] = rng.integers(K)
    return sin_paths, gains, users


def _run_chunk(args):
    scenario, start, stop, backend = args
    if kernels.BACKEND != backend:
        kernels.set_backend(backend)
    sin_paths, gains, users = _draw_chunk(scenario, start, stop)
    H = synthesize(scenario.array, sin_paths, gains)
    snr = np.full(scenario.K, scenario.snr)
    sinr, singular = batch_sinr(scenario.beamformer, H, snr, users)
    sinr = np.where(singular, 0.0, np.maximum(sinr, 0.0))
    return rate_from_sinr(sinr), int(singular.sum())


def _chunks(scenario, chunk=None):
    P = 1 if scenario.is_los else scenario.channel.paths + 1
    if chunk is None:
        per_drop = scenario.K * scenario.array.M * max(P, scenario.array.M)
        chunk = max(1, min(scenario.drops, CHUNK_BUDGET // per_drop))
    return [(a, min(a + chunk, scenario.drops)) for a in range(0, scenario.drops, chunk)]


def simulate_rates(scenario, workers=1, chunk=None):
    """Rate of the recorded user in every drop, ordered by drop index.

    Drops where ZF is singular are recorded as rate 0 and counted.
    """
    jobs = [(scenario, a, b, kernels.BACKEND) for a, b in _chunks(scenario, chunk)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    rates = np.concatenate([r for r, _ in parts])
    singular = sum(n for _, n in parts)
    if singular > SINGULAR_WARN_FRACTION * scenario.drops:
        warnings.warn(f"{singular} of {scenario.drops} drops had a singular ZF "
                      f"interferer matrix and were recorded as rate 0", RuntimeWarning)
    return SimulationResult(rates, singular)


def simulate_rate_cdf(scenario, workers=1, name=None):
    result = simulate_rates(scenario, workers=workers)
    meta = {"scenario": scenario.describe(), "singular_drops": result.singular_drops,
            "source": "simulation"}
    name = name or f"eta{scenario.array.eta:g}_{scenario.beamformer.value}_sim"
    return empirical_cdf(result.rates, name=name, meta=meta)


# -- two-lobe surrogate simulation ------------------------------------------

def simulate_two_lobe_rates(scenario, model, p=None):
    """Per-drop rates when each interferer hits a lobe independently with probability ``p``.

    Under LoS + MRC with equal SNR, correlation is ``g_main`` on a hit and
    ``g_side`` otherwise. ``p`` defaults to the closed-form collision
    probability for the scenario's array and angular spread.
    """
    if p is None:
        p = lobe_collision_prob(scenario.array.eta, scenario.array.M, model.alpha,
                                scenario.theta_max)
    if not scenario.is_los or scenario.beamformer is not Beamformer.MRC:
        raise ParameterError("the two-lobe surrogate models LoS channels with MRC only")
    if not 0 <= p <= 1:
        raise ParameterError(f"collision probability must lie in [0, 1], got {p!r}")
    n = scenario.K - 1
    hits = np.empty(scenario.drops)
    for drop in range(scenario.drops):
        rng = stream(scenario.seed, drop, STREAM_TWO_LOBE)
        hits[drop] = np.count_nonzero(rng.random(n) < p)
    rho_sum = n * model.g_side + (model.g_main - model.g_side) * hits
    pm = scenario.snr * scenario.array.M
    return rate_from_sinr(pm / (pm * rho_sum + 1.0))


def simulate_two_lobe_rate_cdf(scenario, model, p=None, name=None):
    if p is None:
        p = lobe_collision_prob(scenario.array.eta, scenario.array.M, model.alpha,
                                scenario.theta_max)
    rates = simulate_two_lobe_rates(scenario, model, p)
    meta = {"scenario": scenario.describe(), "collision_prob": p,
            "model": asdict(model), "source": "two-lobe simulation"}
    name = name or f"eta{scenario.array.eta:g}_two_lobe_sim"
    return empirical_cdf(rates, name=name, meta=meta)
