from __future__ import annotations

from pathlib import Path

import pytest

from vacqrng.core.errors import ConfigError
from vacqrng.core.run.spec import PipelineConfig, load_config, parse_config

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_defaults_describe_the_published_setup():
    cfg = PipelineConfig()
    assert cfg.photocurrent == pytest.approx(70e-6)
    assert cfg.band == pytest.approx((0.2e9, 2.2e9))
    adc = cfg.to_adc_spec()
    assert (adc.bits, adc.full_scale, adc.sample_rate) == (12, 0.5, 20e9)
    assert cfg.calibration_currents[0] == pytest.approx(10e-6)
    assert cfg.calibration_currents[-1] == pytest.approx(70e-6)
    assert len(cfg.calibration_currents) == 8


@pytest.mark.parametrize("name", ["reference.json", "quick.json", "laser_off.json"])
def test_shipped_configs_load(name):
    cfg = load_config(CONFIGS / name)
    assert cfg.extractor.n % (2 * cfg.adc.bits) == 0


def test_hash_ignores_workers():
    a = parse_config({"workers": 1})
    b = parse_config({"workers": 8})
    c = parse_config({"seed": 1})
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert "workers" not in a.to_canonical_dict()


@pytest.mark.parametrize(
    "payload, where",
    [
        ({"adc": {"bits": 40}}, "adc.bits"),
        ({"filter": {"low_cut_ghz": 3.0}}, "filter"),
        ({"downsample": {"policy": "fixed"}}, "downsample.factor"),
        ({"source": {"mode": "explicit"}}, "quantum_slope"),
        ({"source": {"mode": "ingest"}}, "trace_path"),
        ({"extractor": {"n": 15001}}, "extractor.n"),
        ({"filter": {"high_cut_ghz": 10.5}}, "Nyquist"),
        ({"unknown": 1}, "unknown"),
    ],
)
def test_invalid_configs(payload, where):
    with pytest.raises(ConfigError, match=where):
        parse_config(payload)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(bad)


def test_explicit_source_units():
    cfg = parse_config(
        {
            "source": {
                "mode": "explicit",
                "photocurrent_ua": 35.0,
                "quantum_slope_v2_per_a": 2e-4,
                "electronic_noise_v2": 1e-9,
                "lowfreq_amplitude_mv": 2.0,
                "tia_bandwidth_ghz": 2.5,
            }
        }
    )
    params = cfg.to_source_params()
    assert params.photocurrent == pytest.approx(35e-6)
    assert params.lowfreq_noise.amplitude == pytest.approx(2e-3)
    assert params.tia_bandwidth == pytest.approx(2.5e9)


def test_reference_source_needs_kernel(reference_kernel):
    cfg = PipelineConfig()
    with pytest.raises(ConfigError):
        cfg.to_source_params()
    params = cfg.to_source_params(reference_kernel)
    assert params.photocurrent == pytest.approx(70e-6)


def test_ingest_has_no_simulator():
    cfg = parse_config({"source": {"mode": "ingest", "trace_path": "a.trc", "calibration_dir": "cal"}})
    with pytest.raises(ConfigError):
        cfg.to_source_params()
