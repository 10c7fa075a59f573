import math

import pytest

import neumann_mitigation as nm
from neumann_mitigation import DeviceTooNoisyError, ValidationError


def test_coefficient_examples():
    assert nm.coefficients(0) == (1,)
    assert nm.coefficients(1) == (2, -1)
    assert nm.coefficients(2) == (3, -3, 1)


def test_coefficient_rejections():
    with pytest.raises(ValidationError):
        nm.coefficient(2, 3)
    with pytest.raises(ValidationError):
        nm.coefficient(2, -1)
    with pytest.raises(ValidationError):
        nm.coefficient(-1, 0)


def test_coefficient_identities_exact():
    for trunc in range(16):
        coeffs = nm.coefficients(trunc)
        assert sum(coeffs) == 1
        assert sum(abs(c) for c in coeffs) == 2 ** (trunc + 1) - 1
        assert sum(c * c for c in coeffs) == math.comb(2 * trunc + 2, trunc + 1) - 1


def test_optimal_truncation_anchors():
    assert nm.optimal_truncation(0.01, 0.657) == 10
    assert nm.optimal_truncation(0.01, 0.5) == 6
    assert nm.optimal_truncation(0.5, 0.5) == 0


def test_optimal_truncation_floors_at_zero():
    assert nm.optimal_truncation(0.9, 0.1) == 0


def test_optimal_truncation_rejections():
    with pytest.raises(DeviceTooNoisyError):
        nm.optimal_truncation(0.01, 1.0)
    with pytest.raises(DeviceTooNoisyError):
        nm.optimal_truncation(0.01, 1.5)
    with pytest.raises(ValidationError):
        nm.optimal_truncation(0.01, 0.0)
    with pytest.raises(ValidationError):
        nm.optimal_truncation(1.0, 0.5)
    with pytest.raises(ValidationError):
        nm.optimal_truncation(0.0, 0.5)


def test_truncation_bound_examples():
    assert nm.truncation_bound(0.4, 1) == pytest.approx(0.16, abs=1e-15)
    assert nm.truncation_bound(1e-12, 3) == pytest.approx(0.0, abs=1e-40)
    b = nm.truncation_bound(0.657, 10)
    assert 0.009 < b <= 0.01


def test_sample_budget_examples():
    assert nm.sample_budget(0, 0.1, 0.5) == (1, 400)
    assert nm.sample_budget(1, 0.1, 0.5) == (5, 4000)
    factor, _ = nm.sample_budget(10, 0.5, 0.5)
    assert factor == 705431


def test_sample_budget_formula(gen):
    # independent recomputation of the published closed forms
    for _ in range(20):
        trunc = int(gen.integers(0, 12))
        eps = float(0.02 + 0.5 * gen.random())
        delta = float(0.02 + 0.5 * gen.random())
        factor, shots = nm.sample_budget(trunc, eps, delta)
        assert factor == math.comb(2 * trunc + 2, trunc + 1) - 1
        assert shots == math.ceil(2 * (trunc + 1) * factor * math.log2(2 / delta) / eps**2)


def test_sample_budget_overflow_guard():
    with pytest.raises(ValidationError):
        nm.sample_budget(31, 0.1, 0.1)
    # 30 is still exact
    factor, _ = nm.sample_budget(30, 0.9, 0.9)
    assert factor == math.comb(62, 31) - 1
