import json
import math

import jsonschema
import numpy as np
import pytest
import yaml

from sparse_ula import analytic, cli
from sparse_ula.config import ConfigError, build
from sparse_ula.errors import NoCrossoverError
from sparse_ula.series import output_schema, read_series


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = cli.run([*argv, "--out", str(out)])
    return code, out


def load(path):
    series, meta = read_series(path)
    return {s.name: s for s in series}, meta


# -- config -----------------------------------------------------------------

def test_config_conversion_happens_once():
    cfg = build({"version": 1, "theta_max_deg": 30, "snr_db": 10})
    assert cfg.theta_max == pytest.approx(math.pi / 6)
    assert cfg.snr == pytest.approx(10.0)


def test_config_rejects_unknown_and_bad_version():
    with pytest.raises(ConfigError):
        build({"version": 1, "unknown": 1})
    with pytest.raises(ConfigError):
        build({"version": 2})
    with pytest.raises(ConfigError):
        build({"version": 1, "array": {"M": 8, "spacing": 2}})
    with pytest.raises(ConfigError):
        build({"version": 1, "channel": {"kind": "los", "paths": 3}})
    with pytest.raises(ConfigError):
        build({"version": 1, "sweep": {"theta_min_deg": 50, "theta_max_deg": 10}})
    with pytest.raises(ConfigError):
        build([1, 2])


def test_flags_override_file():
    cfg = build({"version": 1, "array": {"M": 8, "eta": 2}, "drops": 10},
                {"array": {"eta": [3.0]}, "drops": 20})
    assert cfg.M == 8 and cfg.etas == (3.0,) and cfg.drops == 20


def test_one_ring_defaults():
    cfg = build({"version": 1, "channel": {"kind": "one-ring", "paths": 4}})
    assert cfg.channel.paths == 4 and cfg.channel.ring_radius == 5.0


def test_yaml_and_json_configs_agree(tmp_path):
    body = {"version": 1, "array": {"M": 8, "eta": [1, 4]}, "pattern": {"points": 101}}
    (tmp_path / "c.yaml").write_text(yaml.safe_dump(body))
    (tmp_path / "c.json").write_text(json.dumps(body))
    a = cli.run(["beampattern", "--config", str(tmp_path / "c.yaml"), "--out", str(tmp_path / "a.json")])
    b = cli.run(["beampattern", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "b.json")])
    assert a == b == 0
    assert json.loads((tmp_path / "a.json").read_text()) == json.loads((tmp_path / "b.json").read_text())


# -- subcommands -------------------------------------------------------------

def test_beampattern_examples(tmp_path):
    code, out = run(tmp_path, "beampattern", "--M", "8", "--eta", "1", "--eta", "4")
    assert code == 0
    series, meta = load(out)
    np.testing.assert_allclose(series["eta1_nulls"].x, [-0.25, 0.25])
    np.testing.assert_allclose(series["eta4_grating_lobes"].x,
                               [-2, -1.5, -1, -0.5, 0.5, 1, 1.5, 2])
    np.testing.assert_allclose(series["eta4_grating_lobes"].value, 1.0)
    assert meta["nulls"]["eta1"] == [-0.25, 0.25]
    jsonschema.validate(json.loads(out.read_text()), output_schema())


def test_beampattern_csv_round_trip(tmp_path):
    code, out = run(tmp_path, "beampattern", "--M", "8", "--eta", "4", name="bp.csv")
    assert code == 0
    series, _ = load(tmp_path / "bp.meta.json")
    code, out2 = run(tmp_path, "beampattern", "--M", "8", "--eta", "4", name="bp.json")
    json_series, _ = load(out2)
    assert series == json_series
    assert (tmp_path / "bp.eta4_pattern.csv").read_text().startswith("x,value\n")


def test_delta_dist(tmp_path):
    args = ("delta-dist", "--pairs", "20000", "--seed", "5", "--theta-max-deg", "10")
    code, a = run(tmp_path, *args, name="a.json")
    assert code == 0
    series, meta = load(a)
    h = series["delta_pdf"]
    assert np.all(np.abs(h.x) <= 2 * math.sin(math.radians(10)))
    assert h.meta["fraction_below_threshold"] >= 0.999
    # same config and seed give the same bytes
    (tmp_path / "b").mkdir()
    code, b = run(tmp_path / "b", *args, name="a.json")
    assert a.read_bytes() == b.read_bytes()


def test_rate_cdf_los_layout(tmp_path):
    (tmp_path / "c.yaml").write_text(yaml.safe_dump(
        {"version": 1, "array": {"M": 32, "eta": [1, 4]}, "users": 18, "theta_max_deg": 10,
         "snr_db": 20, "drops": 500, "model": {"alpha": 1.6, "g_side": 5e-3}}))
    code, out = run(tmp_path, "rate-cdf", "--config", str(tmp_path / "c.yaml"))
    assert code == 0
    series, meta = load(out)
    assert sorted(series) == ["eta1_binomial", "eta1_mrc_sim", "eta4_binomial", "eta4_mrc_sim"]
    assert series["eta4_binomial"].meta["model"]["alpha"] == 1.6
    assert meta["config"]["drops"] == 500


def test_rate_cdf_one_ring_layout(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps(
        {"version": 1, "array": {"M": 6, "eta": [1, 8]}, "users": 3, "theta_max_deg": 6,
         "beamformers": ["mrc", "zf", "mmse"], "channel": {"kind": "one-ring"}, "drops": 200}))
    code, out = run(tmp_path, "rate-cdf", "--config", str(tmp_path / "c.json"))
    assert code == 0
    series, _ = load(out)
    assert len(series) == 6 and all(name.endswith("_sim") for name in series)


def test_empty_drops_is_validation_error(tmp_path):
    code, out = run(tmp_path, "rate-cdf", "--drops", "0")
    assert code == cli.EXIT_VALIDATION
    assert not out.exists()


def test_crossover_example(tmp_path):
    code, out = run(tmp_path, "crossover", "--M", "16", "--eta", "5.5", "--alpha", "1.6")
    assert code == 0
    series, meta = load(out)
    th = meta["thresholds"]["eta5.5"]
    assert 0.4 <= th["theta_lower_deg"] <= 0.6 and 76 <= th["theta_upper_deg"] <= 78
    gap = series["eta5.5_gap"]
    below = gap.value[gap.x < th["theta_lower_deg"]]
    inside = gap.value[(gap.x > th["theta_lower_deg"]) & (gap.x < th["theta_upper_deg"] - 2)]
    above = gap.value[gap.x > th["theta_upper_deg"]]
    assert np.all(below == 0) and np.all(inside > 0) and np.all(above <= 0)


def test_crossover_rejects_collocated(tmp_path):
    code, out = run(tmp_path, "crossover", "--eta", "1")
    assert code == cli.EXIT_VALIDATION and not out.exists()


def test_no_crossover_reported_in_band(tmp_path, monkeypatch):
    def none(eta, M, alpha):
        raise NoCrossoverError("forced")
    monkeypatch.setattr(analytic, "crossover_thresholds", none)
    code, out = run(tmp_path, "crossover", "--M", "16", "--eta", "5.5", "--alpha", "1.6")
    assert code == cli.EXIT_NUMERICAL
    _, meta = load(out)
    assert meta["thresholds"]["eta5.5"]["regime"] == "no-crossover"


def test_fit_lobes(tmp_path):
    code, out = run(tmp_path, "fit-lobes", "--M", "32", "--eta", "4")
    assert code == 0
    series, meta = load(out)
    fit = meta["fits"]["eta4"]
    assert 1.35 <= fit["alpha"] <= 1.85 and 2.5e-3 <= fit["g_side"] <= 1e-2
    assert fit["residual_rms"] >= 0
    assert set(series) == {"eta4_pattern", "eta4_two_lobe"}


def test_analytic_cdf(tmp_path):
    code, out = run(tmp_path, "analytic-cdf", "--users", "88", "--alpha", "1.6",
                    "--g-side", "5e-3", "--gaussian")
    assert code == 0
    series, _ = load(out)
    assert set(series) == {"eta4_binomial", "eta4_gaussian"}


def test_exit_codes_for_io(tmp_path):
    assert cli.run(["beampattern", "--config", str(tmp_path / "missing.yaml"),
                    "--out", str(tmp_path / "x.json")]) == cli.EXIT_IO
    assert cli.run(["beampattern", "--out", str(tmp_path / "no" / "dir.json")]) == cli.EXIT_IO


def test_malformed_and_missing_output(tmp_path):
    (tmp_path / "bad.yaml").write_text("array: [unclosed")
    assert cli.run(["beampattern", "--config", str(tmp_path / "bad.yaml"),
                    "--out", str(tmp_path / "x.json")]) == cli.EXIT_VALIDATION
    assert cli.run(["beampattern"]) == cli.EXIT_VALIDATION


def test_zf_dimension_error_is_validation(tmp_path):
    code, _ = run(tmp_path, "rate-cdf", "--M", "4", "--users", "6", "--beamformer", "zf",
                  "--drops", "10")
    assert code == cli.EXIT_VALIDATION


def test_main_exits(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["beampattern", "--M", "8", "--out", str(tmp_path / "z.json")])
    assert exc.value.code == 0
