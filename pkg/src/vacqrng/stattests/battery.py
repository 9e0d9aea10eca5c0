from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import sqrt
from typing import Any, Literal

import numpy as np
import numpy.typing as npt
import structlog
from scipy import special

from vacqrng.core.errors import InsufficientDataError
from vacqrng.stattests.nist import MIN_STREAM_BITS, BatteryParams, battery_tests

log = structlog.get_logger()

UNIFORMITY_THRESHOLD = 1e-4
UNIFORMITY_BINS = 10
DEFAULT_ALPHA = 0.01

Verdict = Literal["PASSED", "FAILED"]


@dataclass(frozen=True, slots=True)
class InstanceResult:
    p_values: list[float]
    uniformity_P: float | None
    proportion_pass: float
    passed: bool


@dataclass(frozen=True, slots=True)
class TestResult:
    """
    One named test. Multi-instance tests (forward/backward cusum, the two
    serial statistics) report their lowest uniformity P and proportion;
    the per-instance results stay in `instances`.
    """
    __test__ = False

    name: str
    instances: list[InstanceResult]

    @property
    def p_values(self) -> list[float]:
        return [p for inst in self.instances for p in inst.p_values]

    @property
    def uniformity_P(self) -> float | None:
        vals = [i.uniformity_P for i in self.instances if i.uniformity_P is not None]
        return min(vals) if vals else None

    @property
    def proportion_pass(self) -> float:
        return min(i.proportion_pass for i in self.instances)

    @property
    def verdict(self) -> Verdict:
        return "PASSED" if all(i.passed for i in self.instances) else "FAILED"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "uniformity_P": self.uniformity_P,
            "proportion_pass": self.proportion_pass,
            "verdict": self.verdict,
            "instances": [asdict(i) for i in self.instances],
        }


@dataclass(frozen=True, slots=True)
class TestReport:
    __test__ = False

    stream_bits: int
    n_streams: int
    alpha: float
    results: list[TestResult] = field(default_factory=list)

    @property
    def band(self) -> tuple[float, float]:
        return proportion_band(self.n_streams, self.alpha)

    @property
    def passed(self) -> bool:
        return all(r.verdict == "PASSED" for r in self.results)

    def verdicts(self) -> dict[str, Verdict]:
        return {r.name: r.verdict for r in self.results}

    def to_dict(self) -> dict[str, Any]:
        lo, hi = self.band
        return {
            "config": {
                "stream_bits": self.stream_bits,
                "n_streams": self.n_streams,
                "alpha": self.alpha,
                "proportion_band": [lo, hi],
                "uniformity_threshold": UNIFORMITY_THRESHOLD,
            },
            "passed": self.passed,
            "tests": [r.to_dict() for r in self.results],
        }

    def to_table(self) -> str:
        """Fixed-width text: test name, uniformity P-value, proportion, result."""
        lines = [
            f"{self.n_streams} streams x {self.stream_bits} bits, alpha={self.alpha}",
            f"{'Statistical test':<22}{'P-value':>12}{'Proportion':>12}  Result",
            "-" * 56,
        ]
        for r in self.results:
            u = "n/a" if r.uniformity_P is None else f"{r.uniformity_P:.6f}"
            lines.append(f"{r.name:<22}{u:>12}{r.proportion_pass:>12.4f}  {r.verdict}")
        return "\n".join(lines) + "\n"


def proportion_band(n_streams: int, alpha: float = DEFAULT_ALPHA) -> tuple[float, float]:
    """p_hat +- 3 sqrt(p_hat (1 - p_hat) / n_streams), p_hat = 1 - alpha."""
    if n_streams <= 0:
        raise ValueError("n_streams must be > 0")
    p_hat = 1.0 - alpha
    half = 3.0 * sqrt(p_hat * (1.0 - p_hat) / n_streams)
    return p_hat - half, p_hat + half


def uniformity_P(p_values: npt.ArrayLike) -> float:
    """Chi-square over 10 equal p-value bins, converted with igamc(9/2, chi2/2)."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.size < UNIFORMITY_BINS:
        raise InsufficientDataError(f"uniformity needs >= {UNIFORMITY_BINS} p-values, got {p.size}")
    counts, _ = np.histogram(np.clip(p, 0.0, 1.0), bins=UNIFORMITY_BINS, range=(0.0, 1.0))
    expected = p.size / UNIFORMITY_BINS
    chi2 = float(np.sum((counts - expected) ** 2) / expected)
    return float(special.gammaincc((UNIFORMITY_BINS - 1) / 2.0, chi2 / 2.0))


def _instance(p_values: list[float], alpha: float, band_low: float) -> InstanceResult:
    n = len(p_values)
    proportion = sum(p >= alpha for p in p_values) / n
    u = uniformity_P(p_values) if n >= UNIFORMITY_BINS else None
    passed = proportion >= band_low and (u is None or u >= UNIFORMITY_THRESHOLD)
    return InstanceResult(p_values=p_values, uniformity_P=u, proportion_pass=proportion, passed=passed)


def run_battery(
    bits: npt.ArrayLike,
    stream_bits: int = 1_000_000,
    n_streams: int = 100,
    *,
    alpha: float = DEFAULT_ALPHA,
    workers: int = 1,
) -> TestReport:
    """
    Run the implemented tests on `n_streams` consecutive streams of
    `stream_bits` bits each. Excess input is ignored.
    """
    b = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if stream_bits < MIN_STREAM_BITS:
        raise InsufficientDataError(f"stream_bits must be >= {MIN_STREAM_BITS}")
    if n_streams <= 0:
        raise InsufficientDataError("n_streams must be > 0")
    need = stream_bits * n_streams
    if b.size < need:
        raise InsufficientDataError(f"battery needs {need} bits ({n_streams} x {stream_bits}), got {b.size}")

    tests = battery_tests(BatteryParams.for_length(stream_bits))
    streams = b[:need].reshape(n_streams, stream_bits)

    def _one(stream: npt.NDArray[np.uint8]) -> dict[str, list[float]]:
        return {name: fn(stream) for name, fn in tests.items()}

    with ThreadPoolExecutor(max_workers=workers) as pool:
        per_stream = list(pool.map(_one, streams))

    band_low, _ = proportion_band(n_streams, alpha)
    results: list[TestResult] = []
    for name in tests:
        n_inst = len(per_stream[0][name])
        instances = [
            _instance([float(s[name][k]) for s in per_stream], alpha, band_low) for k in range(n_inst)
        ]
        results.append(TestResult(name=name, instances=instances))

    report = TestReport(stream_bits=stream_bits, n_streams=n_streams, alpha=alpha, results=results)
    log.info(
        "battery.done",
        n_streams=n_streams,
        stream_bits=stream_bits,
        passed=report.passed,
        failed=[r.name for r in results if r.verdict == "FAILED"],
    )
    return report
