from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import exp, isfinite, pi, sqrt
from typing import Literal, Sequence

import numpy as np
import numpy.typing as npt
import structlog
from scipy import signal

from vacqrng.source.adc import AdcSpec, quantize_array

log = structlog.get_logger()

Channel = Literal["p", "q"]

# white draws per chunk: shot p/q, electronic p/q, low-frequency p/q
_STREAMS_PER_CHUNK = 6
_LOWFREQ_ORDER = 4
# part of the determinism contract: chunk c always covers the same samples
SIM_CHUNK_SAMPLES = 1 << 20


def _finite_nonneg(x: float) -> bool:
    return isfinite(x) and x >= 0.0


@dataclass(frozen=True, slots=True)
class LowFreqNoise:
    """
    Technical noise concentrated below `cutoff`, independent of photocurrent.

    amplitude is the RMS voltage of the process.
    """
    amplitude: float = 0.0
    cutoff: float = 0.2e9

    def __post_init__(self) -> None:
        if not _finite_nonneg(self.amplitude):
            raise ValueError("lowfreq amplitude must be finite and >= 0")
        if not (isfinite(self.cutoff) and self.cutoff > 0):
            raise ValueError("lowfreq cutoff must be finite and > 0")


@dataclass(frozen=True, slots=True)
class SourceParams:
    """
    Physics of the simulated heterodyne front end, SI units throughout.

    photocurrent:         DC current at the reference photodiode, A
    quantum_slope:        shot-noise variance per ampere, V^2/A (per quadrature)
    classical_noise_var:  excess noise ahead of the TIA, V^2
    electronic_noise_var: white floor after the TIA, V^2
    tia_bandwidth:        3 dB point of the single-pole TIA response, Hz

    Only the quantum term scales with photocurrent. Everything else is a
    constant floor and lands in the calibration intercept.
    """
    photocurrent: float
    quantum_slope: float
    classical_noise_var: float = 0.0
    electronic_noise_var: float = 0.0
    lowfreq_noise: LowFreqNoise = field(default_factory=LowFreqNoise)
    tia_bandwidth: float = 2.5e9

    def __post_init__(self) -> None:
        for name in ("photocurrent", "quantum_slope", "classical_noise_var", "electronic_noise_var"):
            if not _finite_nonneg(getattr(self, name)):
                raise ValueError(f"{name} must be finite and >= 0")
        if not (isfinite(self.tia_bandwidth) and self.tia_bandwidth > 0):
            raise ValueError("tia_bandwidth must be finite and > 0")

    @property
    def shot_var(self) -> float:
        """Variance of the white process ahead of the TIA response."""
        return self.quantum_slope * self.photocurrent + self.classical_noise_var

    def with_photocurrent(self, photocurrent: float) -> "SourceParams":
        return SourceParams(
            photocurrent=photocurrent,
            quantum_slope=self.quantum_slope,
            classical_noise_var=self.classical_noise_var,
            electronic_noise_var=self.electronic_noise_var,
            lowfreq_noise=self.lowfreq_noise,
            tia_bandwidth=self.tia_bandwidth,
        )


@dataclass(frozen=True, slots=True, eq=False)
class RawTrace:
    """
    Interleaved-quadrature ADC capture.

    p_codes and q_codes are int16 arrays of equal length; codes lie inside
    the N-bit signed range of `adc`.
    """
    p_codes: npt.NDArray[np.int16]
    q_codes: npt.NDArray[np.int16]
    adc: AdcSpec
    photocurrent: float
    seed: int

    def __post_init__(self) -> None:
        if self.p_codes.shape != self.q_codes.shape or self.p_codes.ndim != 1:
            raise ValueError("p_codes and q_codes must be 1-D and of equal length")
        for name, codes in (("p", self.p_codes), ("q", self.q_codes)):
            if codes.size and (codes.min() < self.adc.code_min or codes.max() > self.adc.code_max):
                raise ValueError(f"{name} codes outside {self.adc.bits}-bit range")
        if not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must fit in 64 bits")

    @property
    def n_samples(self) -> int:
        return int(self.p_codes.size)

    def channel(self, name: Channel) -> npt.NDArray[np.int16]:
        return self.p_codes if name == "p" else self.q_codes

    def same_codes(self, other: "RawTrace") -> bool:
        return bool(
            np.array_equal(self.p_codes, other.p_codes) and np.array_equal(self.q_codes, other.q_codes)
        )


# ---------------------------
# Front-end responses
# ---------------------------

def tia_coefficients(tia_bandwidth: float, fs: float) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Single-pole low-pass y[n] = a*y[n-1] + g*(1-a)*x[n], normalised to unit
    power gain for white input so the configured variance survives shaping.
    """
    a = exp(-2.0 * pi * tia_bandwidth / fs)
    g = sqrt((1.0 + a) / (1.0 - a))
    return np.array([g * (1.0 - a)]), np.array([1.0, -a])


def lowfreq_sos(cutoff: float, fs: float) -> npt.NDArray[np.float64]:
    """
    Butterworth low-pass for technical noise, scaled to unit power gain.
    """
    if cutoff >= fs / 2:
        raise ValueError("lowfreq cutoff must be below Nyquist")
    sos = signal.butter(_LOWFREQ_ORDER, cutoff, btype="low", fs=fs, output="sos")
    h = impulse_response_sos(sos, n=_impulse_length(cutoff, fs))
    sos = sos.copy()
    sos[0, :3] /= sqrt(float(np.sum(h * h)))
    return sos


def impulse_response_sos(sos: npt.NDArray[np.float64], n: int) -> npt.NDArray[np.float64]:
    x = np.zeros(n)
    x[0] = 1.0
    return signal.sosfilt(sos, x)


def impulse_response_tia(tia_bandwidth: float, fs: float) -> npt.NDArray[np.float64]:
    b, a = tia_coefficients(tia_bandwidth, fs)
    x = np.zeros(_impulse_length(tia_bandwidth, fs))
    x[0] = 1.0
    return signal.lfilter(b, a, x)


def _impulse_length(corner: float, fs: float) -> int:
    # decay to well below float64 resolution of the power sum
    return int(min(1 << 18, max(256, 200.0 * fs / (2.0 * pi * corner))))


# ---------------------------
# Simulation
# ---------------------------

def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    # counter-based bit generator keyed per chunk: chunk c is the same no
    # matter which worker draws it
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _draw_chunk(seed: int, chunk: int, length: int) -> npt.NDArray[np.float64]:
    return _chunk_rng(seed, chunk).standard_normal((_STREAMS_PER_CHUNK, length))


def simulate_trace(
    params: SourceParams,
    adc: AdcSpec,
    n_samples: int,
    seed: int,
    *,
    workers: int = 1,
) -> RawTrace:
    """
    Synthesize one two-quadrature capture.

    Per quadrature: white Gaussian (quantum + classical) shaped by the TIA
    pole, plus white electronic noise, plus low-frequency technical noise;
    then quantized.

    White noise is drawn per chunk from a counter-based generator keyed by
    (seed, chunk index) and filtered sequentially with carried state, so the
    output is identical for any `workers` value.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be > 0")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if not 0 <= seed < (1 << 64):
        raise ValueError("seed must fit in 64 bits")

    fs = adc.sample_rate
    if params.tia_bandwidth >= fs / 2:
        raise ValueError("tia_bandwidth must be below Nyquist")

    b_tia, a_tia = tia_coefficients(params.tia_bandwidth, fs)
    shot_std = sqrt(params.shot_var)
    elec_std = sqrt(params.electronic_noise_var)
    lf_amp = params.lowfreq_noise.amplitude
    sos_lf = lowfreq_sos(params.lowfreq_noise.cutoff, fs) if lf_amp > 0 else None

    zi_tia = [np.zeros(1), np.zeros(1)]
    zi_lf = (
        [np.zeros((sos_lf.shape[0], 2)), np.zeros((sos_lf.shape[0], 2))] if sos_lf is not None else None
    )

    out = [np.empty(n_samples, dtype=np.int16), np.empty(n_samples, dtype=np.int16)]
    chunk_samples = SIM_CHUNK_SAMPLES
    n_chunks = -(-n_samples // chunk_samples)

    def lengths(c: int) -> int:
        return min(chunk_samples, n_samples - c * chunk_samples)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for first in range(0, n_chunks, workers):
            batch = range(first, min(first + workers, n_chunks))
            draws = list(pool.map(lambda c: _draw_chunk(seed, c, lengths(c)), batch))

            for c, w in zip(batch, draws):
                start = c * chunk_samples
                stop = start + w.shape[1]
                for ch in (0, 1):
                    v, zi_tia[ch] = signal.lfilter(b_tia, a_tia, shot_std * w[ch], zi=zi_tia[ch])
                    v += elec_std * w[2 + ch]
                    if sos_lf is not None and zi_lf is not None:
                        lf, zi_lf[ch] = signal.sosfilt(sos_lf, w[4 + ch], zi=zi_lf[ch])
                        v += lf_amp * lf
                    out[ch][start:stop] = quantize_array(v, adc)

    trace = RawTrace(p_codes=out[0], q_codes=out[1], adc=adc, photocurrent=params.photocurrent, seed=seed)
    log.info(
        "trace.simulated",
        n_samples=n_samples,
        photocurrent_ua=params.photocurrent * 1e6,
        seed=seed,
        chunks=n_chunks,
    )
    return trace


def sweep_seed(seed: int, index: int) -> int:
    """Per-point seed of a calibration sweep, derived deterministically."""
    state = np.random.SeedSequence(seed, spawn_key=(0x5EEB, index)).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def sweep_calibration(
    params: SourceParams,
    currents: Sequence[float],
    adc: AdcSpec,
    n_samples: int,
    seed: int,
    *,
    workers: int = 1,
) -> list[RawTrace]:
    """
    One trace per photocurrent with every other parameter fixed, mirroring
    a calibration sweep of the LO power.
    """
    if not currents:
        raise ValueError("currents must be non-empty")
    if any(not _finite_nonneg(i) for i in currents):
        raise ValueError("currents must be finite and >= 0")

    return [
        simulate_trace(
            params.with_photocurrent(i),
            adc,
            n_samples,
            sweep_seed(seed, k),
            workers=workers,
        )
        for k, i in enumerate(currents)
    ]
