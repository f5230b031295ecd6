from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.calibration import CalibrationCurve, NotCalibratedError, calibration_curve, curve_from_function, \
    delta_max_pointwise
from artifact.conversion import (
    NOT_CALIBRATED_MSG,
    DominationError,
    RiskBoundInput,
    check_domination,
    convert_calibrated,
    convert_dominating,
    convert_mtnc,
    half_argument_curve,
    mtnc_threshold,
    parametric_bound,
    zhang_constant,
)
from artifact.losses import DomainError, LossSpec, eval_loss, llw, phi_spec, rrka, zzh
from artifact.optimize import simplex_grid

SQUARE = curve_from_function(lambda e: e * e, np.arange(1, 201) / 200)


def test_risk_bound_input_validation():
    for bad in (-0.1, math.inf, math.nan):
        with pytest.raises(DomainError):
            RiskBoundInput(bad)
    with pytest.raises(DomainError):
        RiskBoundInput(0.1, c=1.0, alpha=1.5)
    with pytest.raises(DomainError):
        RiskBoundInput(0.1, c=0.0, alpha=0.5)


def test_convert_calibrated_examples():
    assert float(convert_calibrated(SQUARE, RiskBoundInput(0.01))) == pytest.approx(0.1, abs=1e-12)
    hinge = calibration_curve(phi_spec("hinge"), np.arange(1, 10) / 10, "closed-form")
    assert float(convert_calibrated(hinge, RiskBoundInput(0.35))) == pytest.approx(0.35, abs=1e-12)
    kink0 = calibration_curve(phi_spec("kink", 0.0), np.arange(1, 10) / 10, "numeric-binary")
    with pytest.raises(NotCalibratedError, match=NOT_CALIBRATED_MSG):
        convert_calibrated(kink0, RiskBoundInput(0.1))


@settings(max_examples=80, deadline=None)
@given(a=st.floats(0, 0.9), b=st.floats(0, 0.9))
def test_conversion_is_monotone(a, b):
    lo, hi = sorted((a, b))
    assert float(convert_calibrated(SQUARE, RiskBoundInput(lo))) <= float(convert_calibrated(SQUARE, RiskBoundInput(hi)))
    assert float(convert_mtnc(SQUARE, RiskBoundInput(lo, 1.0, 0.5))) <= \
        float(convert_mtnc(SQUARE, RiskBoundInput(hi, 1.0, 0.5))) + 1e-9


def test_mtnc_examples():
    # alpha = 1, c = 1: threshold eps * delta(1/2) = eps / 4
    assert float(convert_mtnc(SQUARE, RiskBoundInput(0.01, 1.0, 1.0))) == pytest.approx(0.04, abs=1e-6)
    assert float(convert_mtnc(SQUARE, RiskBoundInput(0.0, 1.0, 1.0))) == 0.0
    assert mtnc_threshold(SQUARE, 0.5, 1.0, 0.0) == pytest.approx(0.0625, abs=1e-12)
    with pytest.raises(DomainError):
        convert_mtnc(SQUARE, RiskBoundInput(0.01))
    concave = curve_from_function(math.sqrt, np.arange(1, 21) / 20)
    with pytest.raises(DomainError):
        convert_mtnc(concave, RiskBoundInput(0.01, 1.0, 0.5))


@pytest.mark.parametrize("x", [0.001, 0.02, 0.1, 0.2])
def test_mtnc_alpha_zero_is_half_argument_inverse(x):
    half = half_argument_curve(SQUARE, np.arange(1, 101) / 100)
    a = float(convert_mtnc(SQUARE, RiskBoundInput(x, 1.0, 0.0)))
    b = float(convert_calibrated(half, RiskBoundInput(x)))
    assert a == pytest.approx(b, abs=1e-6)


def test_parametric_bound():
    assert parametric_bound(SQUARE, 0.0035, 0.0065, 0.02) == pytest.approx(0.08, abs=1e-12)


def test_dominating_route():
    L = llw("hinge", 3)
    assert check_domination(L) > 0
    assert convert_dominating(RiskBoundInput(0.2, inf_surrogate_risk=0.5), L) == pytest.approx(0.7)
    with pytest.raises(DomainError):
        convert_dominating(RiskBoundInput(0.2))


def test_domination_refusal_carries_witness():
    L = zzh("hinge", 3)
    with pytest.raises(DominationError) as e:
        convert_dominating(RiskBoundInput(0.1, inf_surrogate_risk=0.3), L)
    s, y = e.value.witness
    assert eval_loss(L, s, y) < 1
    assert s[y] < s.max() or np.sum(s >= s.max()) > 1


def test_zhang_constant_examples():
    res = zhang_constant(phi_spec("squared"))
    V, c = res
    assert c == pytest.approx(math.sqrt(2), abs=1e-3)
    for p in (0.1, 0.3, 0.5):
        assert V(p) == pytest.approx(4 * p * (1 - p), abs=1e-9)
    second = np.diff(res.V_grid, 2)
    assert np.all(second <= 1e-9)
    assert zhang_constant(phi_spec("hinge")).c is None
    assert zhang_constant(phi_spec("logistic")).c == pytest.approx(1.0, abs=1e-2)
    with pytest.raises(DomainError):
        zhang_constant(phi_spec("sigmoid"))


@pytest.mark.slow
def test_rrka_squared_pointwise_above_quadratic():
    L = rrka("squared", 3)
    for p in simplex_grid(3, 10):
        gap = p.max() - p.min()
        for e in (0.25, 0.5, 0.75):
            if gap >= e:
                assert float(delta_max_pointwise(L, e, p)) >= math.sqrt(2) * e * e - 2e-2
