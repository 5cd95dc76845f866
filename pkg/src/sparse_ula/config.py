"""Run configuration: file loading, schema validation, flag overrides.

Config files are YAML or JSON (by extension) and must carry ``version: 1``.
Angles are given in degrees and powers in dB; they are converted to radians
and linear scale here and nowhere else.
"""

from dataclasses import dataclass, field
import copy
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .array import ArrayConfig
from .beamform import Beamformer
from .channel import OneRingParams
from .errors import ParameterError

CONFIG_VERSION = 1

DEFAULTS = {
    "version": CONFIG_VERSION,
    "array": {"M": 32, "eta": [4.0]},
    "users": 18,
    "theta_max_deg": 10.0,
    "snr_db": 20.0,
    "beamformers": ["mrc"],
    "channel": {"kind": "los"},
    "drops": 100_000,
    "seed": 0,
    "workers": 1,
    "record": "first",
    "model": {},
    "analytic": ["binomial"],
    "pattern": {"points": 4097},
    "delta": {"pairs": 1_000_000, "bins": 64, "concentration": 0.36},
    "sweep": {"theta_min_deg": 0.05, "theta_max_deg": 90.0, "points": 1801},
    "rates": {"points": 513},
    "fit": {},
    "output": {},
}

ONE_RING_DEFAULTS = {"paths": 10, "ring_radius_m": 5.0, "center_range_m": 40.0,
                     "rician_k_db": 20.0}


class ConfigError(ParameterError):
    """Configuration failed schema or semantic validation."""


def config_schema():
    text = resources.files("sparse_ula").joinpath("schemas/config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class RunConfig:
    M: int
    etas: tuple
    K: int
    theta_max: float
    snr_db: float
    snr: float
    beamformers: tuple
    channel: OneRingParams | None
    drops: int
    seed: int
    workers: int
    record: str
    model: dict
    analytic: tuple
    pattern_points: int
    delta_pairs: int
    delta_bins: int
    concentration: float
    sweep: tuple
    rate_max: float | None
    rate_points: int
    fit_grid_points: int | None
    out: Path | None
    fmt: str | None
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    def arrays(self):
        return [ArrayConfig(self.M, eta) for eta in self.etas]


def load_file(path):
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: malformed config: {exc}") from None


def _merge(base, update):
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def build(raw=None, overrides=None):
    """Validate ``raw`` (file contents) merged with ``overrides`` (CLI flags)."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("config file must contain a mapping")
    if "version" not in raw:
        raw = {"version": CONFIG_VERSION, **raw}
    merged = _merge(raw, overrides or {})
    try:
        jsonschema.validate(merged, config_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {exc.message}") from None
    cfg = _merge(DEFAULTS, merged)

    eta = cfg["array"]["eta"]
    etas = tuple(float(e) for e in (eta if isinstance(eta, list) else [eta]))
    channel = cfg["channel"]
    if channel["kind"] == "one-ring":
        ch = {**ONE_RING_DEFAULTS, **channel}
        channel = OneRingParams(ch["paths"], ch["ring_radius_m"], ch["center_range_m"],
                                ch["rician_k_db"])
    else:
        extra = set(channel) - {"kind"}
        if extra:
            raise ConfigError(f"LoS channel takes no parameters, got {sorted(extra)}")
        channel = None
    sweep = cfg["sweep"]
    if sweep["theta_min_deg"] >= sweep["theta_max_deg"]:
        raise ConfigError("sweep theta_min_deg must be below theta_max_deg")
    out = cfg["output"].get("path")

    return RunConfig(
        M=cfg["array"]["M"],
        etas=etas,
        K=cfg["users"],
        theta_max=math.radians(cfg["theta_max_deg"]),
        snr_db=float(cfg["snr_db"]),
        snr=10.0 ** (cfg["snr_db"] / 10),
        beamformers=tuple(Beamformer(b) for b in cfg["beamformers"]),
        channel=channel,
        drops=cfg["drops"],
        seed=cfg["seed"],
        workers=cfg["workers"],
        record=cfg["record"],
        model=dict(cfg["model"]),
        analytic=tuple(cfg["analytic"]),
        pattern_points=cfg["pattern"]["points"],
        delta_pairs=cfg["delta"]["pairs"],
        delta_bins=cfg["delta"]["bins"],
        concentration=float(cfg["delta"]["concentration"]),
        sweep=(math.radians(sweep["theta_min_deg"]), math.radians(sweep["theta_max_deg"]),
               sweep["points"]),
        rate_max=cfg["rates"].get("max"),
        rate_points=cfg["rates"]["points"],
        fit_grid_points=cfg["fit"].get("grid_points"),
        out=Path(out) if out else None,
        fmt=cfg["output"].get("format"),
        raw=merged,
    )
