from __future__ import annotations

import pytest

from vacqrng.core.errors import ExtractorError, InfeasibleDimensions
from vacqrng.extractor.dimensions import (
    EPS_EXP_CONVENTION,
    check_dimensions,
    choose_dimensions,
    eps_exp,
    ratio_condition,
)


def test_published_dimensions():
    assert eps_exp(15000, 10788, 17.5, 24) == pytest.approx(74.75)
    dims = check_dimensions(15000, 10788, 17.5, 24, target_eps_exp=63)
    assert dims.ratio_ok
    assert dims.eps_exp == pytest.approx(74.75)
    assert dims.to_dict()["eps_exp_convention"] == EPS_EXP_CONVENTION


def test_auto_dimensions():
    dims = choose_dimensions(17.5, 24, 15000, 63)
    # floor(10937.5 - 126)
    assert dims.m == 10811
    assert dims.eps_exp == pytest.approx(63.25)
    assert dims.ratio_ok


def test_ratio_boundary():
    # 15000 * 17.5 = 262500
    assert ratio_condition(15000, 10937, 17.5, 24)
    assert not ratio_condition(15000, 10938, 17.5, 24)
    assert not check_dimensions(15000, 10938, 17.5, 24).ratio_ok


def test_zero_target_stops_at_ratio():
    assert choose_dimensions(17.5, 24, 15000, 0).m == 10937


def test_infeasible():
    with pytest.raises(InfeasibleDimensions) as exc:
        choose_dimensions(1.0, 24, 48, 63)
    assert exc.value.max_eps_exp < 63
    with pytest.raises(InfeasibleDimensions):
        choose_dimensions(25.0, 24, 15000, 63)
    with pytest.raises(InfeasibleDimensions):
        check_dimensions(15000, 10900, 17.5, 24, target_eps_exp=63)


def test_shape_errors():
    with pytest.raises(ExtractorError):
        choose_dimensions(17.5, 24, 15001, 63)
    with pytest.raises(ExtractorError):
        check_dimensions(15000, 15000, 17.5, 24)
    with pytest.raises(ExtractorError):
        check_dimensions(15000, 0, 17.5, 24)
