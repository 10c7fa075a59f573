import json

import numpy as np
import pytest

import neumann_mitigation as nm
from neumann_mitigation import ValidationError


# ---------------------------------------------------------------------------
# states


def test_uniform_state_values():
    s = nm.uniform_state(1)
    np.testing.assert_array_equal(s.probs, [0.5, 0.5])
    s3 = nm.uniform_state(3)
    np.testing.assert_array_equal(s3.probs, np.full(8, 0.125))


def test_uniform_state_sums_to_one():
    for n in range(1, 13):
        assert nm.uniform_state(n).probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_uniform_state_past_dense_cap_keeps_marginals():
    s = nm.uniform_state(24)
    assert s.probs is None
    assert s.marginals == (0.5,) * 24


def test_point_mass():
    s = nm.point_mass(2, 3)
    np.testing.assert_array_equal(s.probs, [0, 0, 0, 1])
    with pytest.raises(ValidationError):
        nm.point_mass(2, 4)


def test_product_state_matches_kron():
    s = nm.DiagonalState.product([0.25, 0.5])
    np.testing.assert_allclose(s.probs, np.kron([0.75, 0.25], [0.5, 0.5]), atol=1e-15)


def test_state_validation():
    with pytest.raises(ValidationError):
        nm.DiagonalState(1, np.array([0.6, 0.6]))
    with pytest.raises(ValidationError):
        nm.DiagonalState(1, np.array([1.2, -0.2]))
    with pytest.raises(ValidationError):
        nm.DiagonalState(2, np.array([0.5, 0.5]))
    with pytest.raises(ValidationError):
        nm.DiagonalState(1, None)


def test_state_probs_immutable():
    s = nm.uniform_state(1)
    with pytest.raises(ValueError):
        s.probs[0] = 0.9


# ---------------------------------------------------------------------------
# observables


def test_parity_observable_small_cases():
    o = nm.pauli_z_observable(2)
    assert o(0b00) == 1.0
    assert o(0b01) == -1.0
    assert o(0b10) == -1.0
    assert o(0b11) == 1.0


def test_parity_observable_full_register():
    o = nm.pauli_z_observable(8)
    assert o(0b11111111) == 1.0  # even weight


def test_parity_averages_to_zero_by_brute_force():
    for n in range(1, 11):
        o = nm.pauli_z_observable(n)
        vals = o.evaluate(np.arange(1 << n))
        assert vals.mean() == 0.0


def test_table_observable():
    o = nm.Observable.from_table([0.5, -0.5, 1.0, -1.0])
    assert o.n == 2
    assert o(2) == 1.0
    with pytest.raises(ValidationError):
        nm.Observable.from_table([0.5, 1.5])
    with pytest.raises(ValidationError):
        nm.Observable.from_table([0.1, 0.2, 0.3])


def test_function_observable_checks_range():
    o = nm.Observable.from_function(1, lambda x: 2.0 * x)
    with pytest.raises(ValidationError):
        o.evaluate(np.array([1]))
    ok = nm.Observable.from_function(1, lambda x: 1.0 - 2.0 * x)
    np.testing.assert_array_equal(ok.evaluate(np.array([0, 1])), [1.0, -1.0])


# ---------------------------------------------------------------------------
# expectations


def test_expectation_uniform_parity_is_zero():
    for n in (1, 2, 5, 8):
        v = nm.exact_expectation(nm.pauli_z_observable(n), nm.uniform_state(n))
        assert v == pytest.approx(0.0, abs=1e-15)


def test_expectation_point_mass():
    assert nm.exact_expectation(nm.pauli_z_observable(1), nm.point_mass(1, 0)) == 1.0


def test_expectation_hand_sum():
    s = nm.DiagonalState(2, np.array([0.4, 0.3, 0.2, 0.1]))
    v = nm.exact_expectation(nm.pauli_z_observable(2), s)
    assert v == pytest.approx(0.4 - 0.3 - 0.2 + 0.1, abs=1e-15)


def test_expectation_rejects_mismatch():
    with pytest.raises(ValidationError):
        nm.exact_expectation(nm.pauli_z_observable(2), nm.uniform_state(3))


def test_expectation_is_linear_and_bounded(gen):
    for _ in range(20):
        n = int(gen.integers(1, 5))
        p = gen.random(1 << n)
        s = nm.DiagonalState(n, p / p.sum())
        o = nm.Observable.from_table(1.0 - 2.0 * gen.random(1 << n))
        v = nm.exact_expectation(o, s)
        assert -1.0 - 1e-12 <= v <= 1.0 + 1e-12
        # linearity against a direct dot product
        direct = float(o.evaluate(np.arange(1 << n)) @ s.probs)
        assert v == pytest.approx(direct, abs=1e-15)


def test_product_state_parity_expectation():
    s = nm.DiagonalState(3, None, (0.25, 0.5, 0.0))
    # per qubit: (1 - 2p); the half-half qubit zeroes the product
    assert nm.exact_expectation(nm.pauli_z_observable(3), s) == pytest.approx(0.0, abs=1e-15)
    s2 = nm.DiagonalState(2, None, (0.25, 0.0))
    assert nm.exact_expectation(nm.pauli_z_observable(2), s2) == pytest.approx(0.5, abs=1e-15)


# ---------------------------------------------------------------------------
# files


def test_state_roundtrip(tmp_path, gen):
    p = gen.random(8)
    s = nm.DiagonalState(3, p / p.sum())
    path = tmp_path / "state.json"
    nm.save_state(s, path)
    t = nm.load_state(path)
    assert t.n == 3
    np.testing.assert_allclose(t.probs, s.probs, atol=1e-15)


def test_state_load_policy(tmp_path):
    path = tmp_path / "drift.json"
    path.write_text(json.dumps({"n": 1, "probs": [0.5 + 2e-10, 0.5]}))
    s = nm.load_state(path)
    assert s.probs.sum() == pytest.approx(1.0, abs=1e-12)
    path.write_text(json.dumps({"n": 1, "probs": [0.52, 0.5]}))
    with pytest.raises(ValidationError):
        nm.load_state(path)
    path.write_text(json.dumps({"n": 2, "probs": [0.5, 0.5]}))
    with pytest.raises(ValidationError):
        nm.load_state(path)
