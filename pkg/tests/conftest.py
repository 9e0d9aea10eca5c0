from __future__ import annotations

import sys
from pathlib import Path

import logging

import numpy as np
import pytest
import structlog

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"

if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from vacqrng.dsp.filters import FilterKernel, design_bandpass  # noqa: E402
from vacqrng.source.adc import AdcSpec  # noqa: E402


@pytest.fixture
def adc() -> AdcSpec:
    # 12-bit, 0.5 V span, 20 GS/s
    return AdcSpec(bits=12, full_scale=0.5, sample_rate=20e9)


@pytest.fixture(scope="session")
def reference_kernel() -> FilterKernel:
    return design_bandpass(0.2e9, 2.2e9, 20e9, n_taps=511)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(1234))


@pytest.fixture(autouse=True)
def _reset_logging():
    # configure_logging() binds the current sys.stderr, which pytest swaps per
    # test and closes afterwards; restore defaults so later tests don't log
    # into a closed capture stream.
    root = logging.getLogger()
    handlers = root.handlers[:]
    level = root.level
    yield
    structlog.reset_defaults()
    root.handlers[:] = handlers
    root.setLevel(level)
