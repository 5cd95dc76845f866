"""``sparse-ula`` command line: one subcommand per analysis, data series out.

Exit codes: 0 success, 2 validation error, 3 numerical error (singular
matrix, no crossover), 4 I/O error.
"""

import argparse
from dataclasses import asdict, replace
import math
import sys
from types import SimpleNamespace
from pathlib import Path

import numpy as np

from . import analytic, config as configmod
from .analytic import AnalyticScenario, TwoLobeModel
from .array import beam_gain, grating_lobe_positions, main_lobe_beamwidth, main_lobe_nulls
from .beamform import Beamformer
from .errors import NoCrossoverError, NumericalError
from .montecarlo import Scenario, delta_histogram, simulate_rate_cdf
from .series import DistributionSeries, write_series

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMANDS = ("beampattern", "delta-dist", "rate-cdf", "crossover", "fit-lobes", "analytic-cdf")


# -- helpers ----------------------------------------------------------------

def _model_for(cfg, array):
    """Fitted two-lobe model for ``array`` with any configured overrides applied."""
    over = cfg.model
    if {"alpha", "g_main", "g_side"} <= over.keys():
        return TwoLobeModel(over["alpha"], over["g_main"], over["g_side"]), "config"
    fitted = analytic.fit_two_lobe(array, cfg.fit_grid_points)
    return replace(fitted, **over), ("fit" if not over else "fit+config")


def _rate_grid(cfg, array, scenario, model):
    top = cfg.rate_max or 1.05 * math.log2(1.0 + cfg.snr * array.M)
    grid = np.linspace(0.0, top, cfg.rate_points)
    jumps = analytic.rate_cdf_jumps(scenario, model)
    return np.unique(np.concatenate([grid, jumps[(jumps >= 0) & (jumps <= top)]]))


def _analytic_series(cfg, array, model, source):
    scenario = AnalyticScenario(cfg.K, array, cfg.theta_max, cfg.snr)
    p = analytic.collision_prob(scenario, model)
    rates = _rate_grid(cfg, array, scenario, model)
    meta = {"eta": array.eta, "M": array.M, "K": cfg.K, "collision_prob": p,
            "model": asdict(model), "model_source": source}
    out = []
    if "binomial" in cfg.analytic:
        out.append(DistributionSeries(f"eta{array.eta:g}_binomial", "cdf", rates,
                                      analytic.rate_cdf_binomial(scenario, model, rates, p),
                                      {**meta, "source": "binomial"}))
    if "gaussian" in cfg.analytic and cfg.K >= 2:
        out.append(DistributionSeries(f"eta{array.eta:g}_gaussian", "cdf", rates,
                                      analytic.rate_cdf_gaussian(scenario, model, rates, p),
                                      {**meta, "source": "gaussian"}))
    return out


def _common_meta(cfg):
    return {"M": cfg.M, "eta": list(cfg.etas), "seed": cfg.seed}


# -- subcommands ------------------------------------------------------------

def cmd_beampattern(cfg):
    """Exact beam pattern with main-lobe nulls and grating lobes."""
    series = []
    meta = {**_common_meta(cfg), "beamwidth": {}, "nulls": {}, "grating_lobes": {}}
    delta = np.linspace(-2.0, 2.0, cfg.pattern_points)
    for array in cfg.arrays():
        tag = f"eta{array.eta:g}"
        nulls = np.asarray(main_lobe_nulls(array))
        lobes = np.asarray(grating_lobe_positions(array))
        series.append(DistributionSeries(f"{tag}_pattern", "curve", delta,
                                         beam_gain(array, delta), {"eta": array.eta}))
        series.append(DistributionSeries(f"{tag}_nulls", "curve", nulls,
                                         beam_gain(array, nulls), {"eta": array.eta}))
        series.append(DistributionSeries(f"{tag}_grating_lobes", "curve", lobes,
                                         beam_gain(array, lobes), {"eta": array.eta}))
        meta["beamwidth"][tag] = main_lobe_beamwidth(array)
        meta["nulls"][tag] = nulls.tolist()
        meta["grating_lobes"][tag] = lobes.tolist()
    return series, meta


def cmd_delta_dist(cfg):
    """Histogram density of the spatial angle difference between two users."""
    s = delta_histogram(cfg.delta_pairs, cfg.theta_max, cfg.delta_bins, cfg.seed,
                        cfg.concentration)
    return [s], {"theta_max_deg": math.degrees(cfg.theta_max), "seed": cfg.seed}


def cmd_rate_cdf(cfg):
    """Monte Carlo rate CDFs, plus analytic curves for LoS channels with MRC."""
    series = []
    for array in cfg.arrays():
        for bf in cfg.beamformers:
            scenario = Scenario(array, cfg.K, cfg.theta_max, cfg.snr_db, bf, cfg.channel,
                                cfg.drops, cfg.seed, cfg.record)
            series.append(simulate_rate_cdf(scenario, workers=cfg.workers))
    if cfg.channel is None and Beamformer.MRC in cfg.beamformers:
        for array in cfg.arrays():
            model, source = _model_for(cfg, array)
            series.extend(_analytic_series(cfg, array, model, source))
    meta = {**_common_meta(cfg), "K": cfg.K, "drops": cfg.drops,
            "theta_max_deg": math.degrees(cfg.theta_max), "snr_db": cfg.snr_db,
            "beamformers": [b.value for b in cfg.beamformers],
            "channel": "los" if cfg.channel is None else asdict(cfg.channel)}
    return series, meta


def cmd_analytic_cdf(cfg):
    """Analytic rate CDFs under the two-lobe model, without simulation."""
    series = []
    for array in cfg.arrays():
        model, source = _model_for(cfg, array)
        series.extend(_analytic_series(cfg, array, model, source))
    meta = {**_common_meta(cfg), "K": cfg.K, "theta_max_deg": math.degrees(cfg.theta_max),
            "snr_db": cfg.snr_db}
    return series, meta


def cmd_crossover(cfg):
    """Collision-probability gap sweep and the crossover angular spreads."""
    if any(eta <= 1 for eta in cfg.etas):
        raise configmod.ConfigError("crossover compares a sparse array against eta = 1; "
                                    "every eta must exceed 1")
    lo, hi, points = cfg.sweep
    theta = np.linspace(lo, hi, points)
    series = []
    meta = {**_common_meta(cfg), "thresholds": {}}
    failure = None
    for array in cfg.arrays():
        tag = f"eta{array.eta:g}"
        if "alpha" in cfg.model:
            model, source = SimpleNamespace(alpha=cfg.model["alpha"]), "config"
        else:
            model, source = _model_for(cfg, array)
        gap = np.array([analytic.collision_prob_gap(array.eta, array.M, model.alpha, t)
                        for t in theta])
        series.append(DistributionSeries(f"{tag}_gap", "curve", np.degrees(theta), gap,
                                         {"eta": array.eta, "alpha": model.alpha}))
        entry = {"alpha": model.alpha, "model_source": source}
        try:
            th = analytic.crossover_thresholds(array.eta, array.M, model.alpha)
        except NoCrossoverError as exc:
            entry.update(regime="no-crossover", reason=str(exc))
            failure = failure or exc
        else:
            entry.update(regime="crossover", theta_lower_deg=math.degrees(th.theta_lower),
                         theta_upper_deg=math.degrees(th.theta_upper))
        meta["thresholds"][tag] = entry
    return series, meta, failure


def cmd_fit_lobes(cfg):
    """Two-lobe fit of the beam pattern with its residual."""
    series = []
    meta = {**_common_meta(cfg), "fits": {}}
    delta = np.linspace(-2.0, 2.0, cfg.pattern_points)
    for array in cfg.arrays():
        tag = f"eta{array.eta:g}"
        model = analytic.fit_two_lobe(array, cfg.fit_grid_points)
        residual = analytic.fit_residual(model, array, cfg.fit_grid_points)
        meta["fits"][tag] = {**asdict(model), "residual_rms": residual}
        series.append(DistributionSeries(f"{tag}_pattern", "curve", delta,
                                         beam_gain(array, delta), {"eta": array.eta}))
        series.append(DistributionSeries(f"{tag}_two_lobe", "curve", delta,
                                         analytic.two_lobe_gain(model, array, delta),
                                         {"eta": array.eta, **asdict(model)}))
    return series, meta


HANDLERS = {
    "beampattern": cmd_beampattern,
    "delta-dist": cmd_delta_dist,
    "rate-cdf": cmd_rate_cdf,
    "crossover": cmd_crossover,
    "fit-lobes": cmd_fit_lobes,
    "analytic-cdf": cmd_analytic_cdf,
}


# -- argument parsing -------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparse-ula",
        description="Beam patterns, collision probabilities and rate CDFs for sparse ULAs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=(HANDLERS[name].__doc__ or name).splitlines()[0])
        p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
        p.add_argument("--out", type=Path, help="output file (.json or .csv)")
        p.add_argument("--format", choices=("csv", "json"), help="override the extension")
        p.add_argument("--seed", type=int)
        p.add_argument("--drops", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--M", type=int, dest="M")
        p.add_argument("--eta", type=float, action="append",
                       help="inter-element spacing in half wavelengths; repeatable")
        p.add_argument("--users", "-K", type=int, dest="users")
        p.add_argument("--theta-max-deg", type=float)
        p.add_argument("--snr-db", type=float)
        p.add_argument("--beamformer", action="append", choices=[b.value for b in Beamformer])
        p.add_argument("--channel", choices=("los", "one-ring"))
        p.add_argument("--alpha", type=float)
        p.add_argument("--g-main", type=float)
        p.add_argument("--g-side", type=float)
        p.add_argument("--pairs", type=int, help="user pairs for delta-dist")
        p.add_argument("--bins", type=int)
        p.add_argument("--gaussian", action="store_true",
                       help="also emit the Gaussian-approximation CDF")
    return parser


def _overrides(args):
    o = {}
    scalars = {"seed": "seed", "drops": "drops", "workers": "workers", "users": "users",
               "theta_max_deg": "theta_max_deg", "snr_db": "snr_db"}
    for attr, key in scalars.items():
        if getattr(args, attr) is not None:
            o[key] = getattr(args, attr)
    if args.M is not None:
        o.setdefault("array", {})["M"] = args.M
    if args.eta:
        o.setdefault("array", {})["eta"] = args.eta
    if args.beamformer:
        o["beamformers"] = list(dict.fromkeys(args.beamformer))
    if args.channel:
        o["channel"] = {"kind": args.channel}
    for attr in ("alpha", "g_main", "g_side"):
        if getattr(args, attr) is not None:
            o.setdefault("model", {})[attr] = getattr(args, attr)
    if args.pairs is not None:
        o.setdefault("delta", {})["pairs"] = args.pairs
    if args.bins is not None:
        o.setdefault("delta", {})["bins"] = args.bins
    if args.gaussian:
        o["analytic"] = ["binomial", "gaussian"]
    if args.out is not None:
        o.setdefault("output", {})["path"] = str(args.out)
    if args.format is not None:
        o.setdefault("output", {})["format"] = args.format
    return o


def _merge_channel(raw, overrides):
    # A --channel flag replaces only the kind and keeps file-level ring parameters.
    ch = overrides.get("channel")
    if ch and isinstance(raw.get("channel"), dict):
        kept = dict(raw["channel"]) if ch["kind"] == "one-ring" else {}
        overrides["channel"] = {**kept, **ch}
    return overrides


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = configmod.load_file(args.config) if args.config else {}
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        overrides = _merge_channel(raw if isinstance(raw, dict) else {}, _overrides(args))
        cfg = configmod.build(raw, overrides)
        if cfg.out is None:
            raise configmod.ConfigError("no output path: pass --out or set output.path")
        result = HANDLERS[args.command](cfg)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    failure = None
    if len(result) == 3:
        series, meta, failure = result
    else:
        series, meta = result
    # The output location is left out so identical runs give identical files.
    meta["config"] = {k: v for k, v in cfg.raw.items() if k != "output"}
    try:
        written = write_series(cfg.out, series, args.command, meta, cfg.fmt)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    if failure is not None:
        print(f"numerical error: {failure}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
