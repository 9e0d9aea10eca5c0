from __future__ import annotations

from math import log2, pi, sqrt

import numpy as np
import pytest

from vacqrng.calibration.entropy import (
    build_budget,
    correction_factor,
    entropy_curve,
    generation_rate,
    min_entropy,
    min_entropy_clamped,
    project_power_gain,
    resolution,
    to_vacuum_units,
    vacuum_variance_curve,
)
from vacqrng.calibration.fit import CalibrationFit, CalibrationPoint
from vacqrng.calibration.sweep import CSV_HEADER, calibrate_sweep
from vacqrng.core.errors import CalibrationError, NoCertifiableRandomness
from vacqrng.source.scenario import REFERENCE, band_gains, conditioned_variance, reference_operating_point
from vacqrng.source.sim import sweep_calibration

I0 = 70e-6


def _reference_fit(intercept: float = 50.0) -> CalibrationFit:
    # k^2 = 2 m I0 = 2 Q with Q = 2^17.5 / (2 pi)
    q = 2.0**17.5 / (2.0 * pi)
    return CalibrationFit(slope_p=q / I0, slope_q=q / I0, intercept_p=intercept, intercept_q=intercept, residual_rms=0.0)


# --- conversion ---

def test_correction_factor():
    fit = CalibrationFit(slope_p=2e6, slope_q=8e6, intercept_p=0.0, intercept_q=0.0, residual_rms=0.0)
    k_p, k_q = correction_factor(fit, 1e-4)
    assert k_p == pytest.approx(sqrt(400.0))
    assert k_q == pytest.approx(sqrt(1600.0))


def test_resolution_is_one_lsb_in_vacuum_units(adc):
    assert resolution(adc, 40.0) == pytest.approx(1.0 / 40.0)
    assert resolution(adc, 80.0) == pytest.approx(resolution(adc, 40.0) / 2)
    np.testing.assert_allclose(to_vacuum_units([40, -80], 40.0), [1.0, -2.0])
    with pytest.raises(CalibrationError):
        resolution(adc, 0.0)


def test_laser_off_certifies_nothing():
    with pytest.raises(NoCertifiableRandomness, match="no certifiable randomness"):
        correction_factor(_reference_fit(), 0.0)
    bad = CalibrationFit(slope_p=-1.0, slope_q=1.0, intercept_p=0.0, intercept_q=0.0, residual_rms=0.0)
    with pytest.raises(NoCertifiableRandomness):
        correction_factor(bad, I0)


# --- bound ---

def test_min_entropy_bound():
    d = sqrt(pi / 2.0**17.5)
    assert min_entropy(d, d) == pytest.approx(17.5)
    assert min_entropy(1.0, pi) == 0.0
    with pytest.raises(NoCertifiableRandomness):
        min_entropy(1.0, 4.0)
    with pytest.raises(CalibrationError):
        min_entropy(0.0, 1.0)


def test_min_entropy_at_the_pi_boundary():
    assert min_entropy(sqrt(pi), sqrt(pi)) == 0.0
    assert min_entropy(pi / 2.0, 2.0) == 0.0
    with pytest.raises(NoCertifiableRandomness):
        min_entropy(sqrt(pi) * 1.001, sqrt(pi))


def test_min_entropy_clamps_to_raw_bits():
    h, clamped = min_entropy_clamped(1e-6, 1e-6, raw_bits=24)
    assert (h, clamped) == (24.0, True)
    h, clamped = min_entropy_clamped(0.01, 0.01, raw_bits=24)
    assert not clamped
    assert h == pytest.approx(log2(pi * 1e4))


def test_generation_rates():
    assert generation_rate(17.5, 2e9) == pytest.approx(35e9)
    assert generation_rate(17.5, 4e9) == pytest.approx(70e9)
    with pytest.raises(CalibrationError):
        generation_rate(0.0, 2e9)


def test_budget_at_reference_point(adc):
    b = build_budget(_reference_fit(), I0, adc, pair_rate=2e9)
    assert b.h_min == pytest.approx(17.5)
    assert b.to_dict()["h_min_reported"] == 17.5
    assert b.delta_p * b.delta_q == pytest.approx(pi / 2.0**17.5)
    assert b.gen_rate == pytest.approx(35e9)
    assert b.raw_bits == 24
    assert b.extractable_ratio == pytest.approx(17.5 / 24)


def test_ten_db_projection(adc):
    b = project_power_gain(build_budget(_reference_fit(), I0, adc, pair_rate=2e9), 10.0)
    assert b.h_min == pytest.approx(17.5 + log2(10.0))
    assert round(b.h_min, 1) == 20.8
    assert b.gen_rate / 1e9 == pytest.approx(41.64, abs=0.01)


def test_vacuum_variance_curve():
    fit = _reference_fit(intercept=0.0)
    pts = [CalibrationPoint(i, fit.slope_p * i + 0.5 * fit.slope_p * I0, fit.slope_q * i) for i in (0.0, I0)]
    vac = vacuum_variance_curve(pts, fit)
    assert len(vac) == 1
    assert vac[0][2] == pytest.approx(0.5)
    assert vac[0][1] == pytest.approx(0.75)


def test_entropy_curve_grows_with_current(adc):
    curve = entropy_curve(_reference_fit(), [0.0, 10e-6, 70e-6], adc)
    assert [i for i, _ in curve] == [10e-6, 70e-6]
    assert curve[1][1] - curve[0][1] == pytest.approx(log2(7.0))


# --- sweep ---

def test_sweep_recovers_published_entropy(adc, reference_kernel):
    params = reference_operating_point(reference_kernel, adc)
    traces = sweep_calibration(params, [10e-6, 40e-6, 70e-6], adc, 400_000, seed=31)
    cal = calibrate_sweep(traces, reference_kernel, factor=REFERENCE.decimation, phase=0, photocurrent=I0)

    assert cal.budget.h_min == pytest.approx(17.5, abs=0.2)
    assert cal.budget.pair_rate == pytest.approx(2e9)
    d = cal.to_dict()
    assert d["projected_power_gain"]["budget"]["h_min"] == pytest.approx(cal.budget.h_min + log2(10.0))
    assert len(d["points"]) == 3
    rows = cal.csv_rows()
    assert len(rows) == 3 and len(rows[0]) == len(CSV_HEADER)
    assert rows[0][0] == pytest.approx(10.0)


def test_sweep_rejects_empty(reference_kernel):
    with pytest.raises(CalibrationError):
        calibrate_sweep([], reference_kernel, factor=10, phase=0, photocurrent=I0)


def test_sweep_through_zero_current_matches_the_source(adc, reference_kernel):
    # classical and low-frequency noise are present at every point, I=0 included
    params = reference_operating_point(reference_kernel, adc)
    assert params.classical_noise_var > 0
    gains = band_gains(reference_kernel, params.tia_bandwidth, params.lowfreq_noise.cutoff)
    currents = list(np.linspace(0.0, I0, 8))
    traces = sweep_calibration(params, currents, adc, 400_000, seed=41)
    cal = calibrate_sweep(traces, reference_kernel, factor=REFERENCE.decimation, phase=0, photocurrent=I0)

    true_slope = params.quantum_slope * gains.shot / adc.lsb**2
    floor = conditioned_variance(params.with_photocurrent(0.0), adc, gains)
    laser_off = cal.points[0]
    assert laser_off.photocurrent == 0.0
    for slope, intercept, measured in (
        (cal.fit.slope_p, cal.fit.intercept_p, laser_off.var_p),
        (cal.fit.slope_q, cal.fit.intercept_q, laser_off.var_q),
    ):
        assert slope == pytest.approx(true_slope, rel=0.04)
        assert intercept == pytest.approx(floor, rel=0.05)
        assert intercept == pytest.approx(measured, rel=0.05)
    assert cal.budget.h_min == pytest.approx(REFERENCE.h_min, abs=0.1)
