from __future__ import annotations

from vacqrng.evaluation.bench import BenchResult, measure_extractor_throughput

__all__ = ["BenchResult", "measure_extractor_throughput"]
