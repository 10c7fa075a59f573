import io
import json
import math

import numpy as np
import pytest

import neumann_mitigation as nm
from neumann_mitigation import BudgetExceededError, ValidationError

from conftest import usable_stochastic

A1 = nm.StochasticMatrix(1, [[0.9, 0.2], [0.1, 0.8]])
Z1 = nm.pauli_z_observable(1)
U1 = nm.uniform_state(1)


# ---------------------------------------------------------------------------
# plans


def test_plan_fields_follow_the_formulas():
    plan = nm.plan_mitigation(0.1, 0.5, 0.5)
    assert plan.order == nm.optimal_truncation(0.1, 0.5)
    factor, shots = nm.sample_budget(plan.order, 0.1, 0.5)
    assert (plan.coeff_sq_sum, plan.shots_per_order) == (factor, shots)
    assert plan.coeffs == nm.coefficients(plan.order)
    assert sum(c * c for c in plan.coeffs) == plan.coeff_sq_sum
    assert sum(abs(c) for c in plan.coeffs) == 2 ** (plan.order + 1) - 1


def test_plan_cost_closed_forms():
    for eps in (0.6, 0.2, 0.02):
        plan = nm.plan_mitigation(eps, 0.1, 0.55)
        shots = plan.shots_per_order
        k = plan.order
        assert plan.states_total == shots * (k + 1)
        assert plan.measurements_total == shots * sum(range(1, k + 2))


def test_plan_flags_floored_order():
    plan = nm.plan_mitigation(0.9, 0.5, 0.5)
    assert plan.order == 0
    assert not plan.order_floored  # 0.5^1 <= 0.9 already
    plan = nm.plan_mitigation(0.3, 0.5, 0.5)
    assert plan.order == 1 and not plan.order_floored


def test_plan_serialization_roundtrip(tmp_path):
    plan = nm.plan_mitigation(0.05, 0.05, 0.3)
    doc = json.loads(plan.to_json())
    assert doc["order"] == plan.order
    assert doc["shots_per_order"] == plan.shots_per_order
    assert doc["states_total"] == plan.states_total
    path = tmp_path / "plan.json"
    plan.save(path)
    assert json.loads(path.read_text()) == doc


def test_plan_rejects_bad_delta():
    with pytest.raises(ValidationError):
        nm.plan_mitigation(0.1, 1.0, 0.5)


# ---------------------------------------------------------------------------
# combination


def test_combine_examples():
    p0 = nm.plan_mitigation(0.6, 0.5, 0.5)
    assert p0.order == 0
    assert nm.combine(p0, [0.3]) == pytest.approx(0.3, abs=1e-15)
    p1 = nm.plan_mitigation(0.2, 0.5, 0.4)
    assert p1.order == 1
    assert nm.combine(p1, [0.1, 0.17]) == pytest.approx(0.03, abs=1e-15)
    p2 = nm.plan_mitigation(0.2, 0.5, 0.55)
    assert p2.order == 2
    a = 0.3721
    assert nm.combine(p2, [a, a, a]) == pytest.approx(a, abs=1e-12)


def test_combine_rejects_length_mismatch():
    plan = nm.plan_mitigation(0.2, 0.5, 0.4)
    with pytest.raises(ValidationError):
        nm.combine(plan, [0.1])


# ---------------------------------------------------------------------------
# exact mode


def test_exact_mode_worked_example():
    # resistance 0.4 with precision 0.2 keeps two series orders
    r = nm.run_mitigation(U1, A1, Z1, 0.4, 0.5, 0.2, mode="exact")
    assert r.plan.order == 1
    assert r.per_order == pytest.approx((0.1, 0.17), abs=1e-12)
    assert r.estimate == pytest.approx(0.03, abs=1e-12)
    assert abs(r.estimate - 0.0) <= 0.4**2
    assert r.states_consumed == 0 and r.measurements_applied == 0


def test_exact_mode_identity_noise_recovers_truth():
    eye = nm.StochasticMatrix(2, np.eye(4))
    s = nm.DiagonalState(2, np.array([0.4, 0.3, 0.2, 0.1]))
    o = nm.pauli_z_observable(2)
    truth = nm.exact_expectation(o, s)
    for eps in (0.6, 0.2, 0.05, 0.01):
        r = nm.run_mitigation(s, eye, o, 0.5, 0.5, eps, mode="exact")
        assert r.estimate == pytest.approx(truth, abs=1e-12)


def test_exact_mode_respects_truncation_bound(gen):
    for _ in range(10):
        a = usable_stochastic(gen, 3)
        xi = nm.noise_resistance(a)
        s = nm.uniform_state(3)
        o = nm.pauli_z_observable(3)
        r = nm.run_mitigation(s, a, o, xi, 0.1, 0.1, mode="exact")
        truth = nm.exact_expectation(o, s)
        assert abs(r.estimate - truth) <= nm.truncation_bound(xi, r.plan.order) + 1e-12


def test_mitigate_expectation_measures_resistance():
    r = nm.mitigate_expectation(U1, A1, Z1, 0.2, 0.5, mode="exact")
    assert r.plan.resistance == pytest.approx(0.4, abs=1e-12)


# ---------------------------------------------------------------------------
# sampled mode


def test_sampled_mode_costs_and_determinism():
    r1 = nm.run_mitigation(U1, A1, Z1, 0.4, 0.5, 0.2, seed=5, mode="sampled")
    r2 = nm.run_mitigation(U1, A1, Z1, 0.4, 0.5, 0.2, seed=5, mode="sampled")
    assert r1.estimate == r2.estimate
    assert r1.per_order == r2.per_order
    shots = r1.plan.shots_per_order
    k = r1.plan.order
    assert r1.states_consumed == shots * (k + 1) == r1.plan.states_total
    assert r1.measurements_applied == shots * (k + 1) * (k + 2) // 2 == r1.plan.measurements_total
    r3 = nm.run_mitigation(U1, A1, Z1, 0.4, 0.5, 0.2, seed=6, mode="sampled")
    assert r3.estimate != r1.estimate


def test_sampled_mode_tracks_exact_combination(gen):
    # the sampled estimate averages to the exact combination over repetitions
    a = usable_stochastic(gen, 2)
    xi = nm.noise_resistance(a)
    s = nm.uniform_state(2)
    o = nm.pauli_z_observable(2)
    exact = nm.run_mitigation(s, a, o, xi, 0.5, 0.25, mode="exact").estimate
    estimates = [
        nm.run_mitigation(s, a, o, xi, 0.5, 0.25, seed=900 + r, mode="sampled").estimate
        for r in range(50)
    ]
    spread = np.std(estimates, ddof=1) / math.sqrt(len(estimates))
    assert abs(np.mean(estimates) - exact) <= 4.0 * spread + 1e-12


def test_sampled_mode_respects_cap():
    with pytest.raises(BudgetExceededError) as err:
        nm.run_mitigation(U1, A1, Z1, 0.4, 0.01, 0.01, mode="sampled", cap=10_000)
    plan = err.value.plan
    assert plan is not None
    assert plan.states_total > 10_000


def test_sampled_mode_stream_dump():
    buf = io.StringIO()
    r = nm.run_mitigation(U1, A1, Z1, 0.4, 0.5, 0.6, seed=2, mode="sampled", stream_dump=buf)
    lines = buf.getvalue().strip().splitlines()
    assert len(lines) == r.states_consumed
    trial, order, bits = lines[0].split(",")
    assert order == "1" and len(bits) == 1


def test_result_serialization(tmp_path):
    r = nm.run_mitigation(U1, A1, Z1, 0.4, 0.5, 0.3, seed=1, mode="sampled")
    doc = json.loads(r.to_json())
    assert doc["mode"] == "sampled" and doc["seed"] == 1
    assert doc["plan"]["order"] == r.plan.order
    path = tmp_path / "result.json"
    r.save(path)
    assert json.loads(path.read_text()) == doc


def test_run_mitigation_validation():
    with pytest.raises(ValidationError):
        nm.run_mitigation(U1, A1, Z1, 0.4, 0.5, 0.2, mode="bogus")
    with pytest.raises(ValidationError):
        nm.run_mitigation(nm.uniform_state(2), A1, Z1, 0.4, 0.5, 0.2)
    with pytest.raises(nm.DeviceTooNoisyError):
        nm.run_mitigation(U1, A1, Z1, 1.2, 0.5, 0.2)


# ---------------------------------------------------------------------------
# series identity on matrices


def test_partial_sum_identity(gen):
    # the regrouped coefficient form equals the geometric partial sum
    for _ in range(10):
        n = int(gen.integers(1, 6))
        trunc = int(gen.integers(0, 7))
        a = usable_stochastic(gen, n)
        eye = np.eye(a.dim)
        coeffs = nm.coefficients(trunc)
        lhs = sum(c * np.linalg.matrix_power(a.entries, k) for k, c in enumerate(coeffs))
        rhs = sum(np.linalg.matrix_power(eye - a.entries, k) for k in range(trunc + 1))
        assert np.max(np.abs(lhs - rhs)) <= 1e-10
