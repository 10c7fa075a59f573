"""The mitigation driver: plans, per-order estimates, and their combination.

A run measures the state through chains of every order ``1..K+1``, averages
the observable per order, and combines the averages with the signed series
weights.  The sampled mode simulates the physical chains; the exact mode
substitutes the closed-form per-order expectations and is how parameter
regimes far beyond desk-scale sampling are validated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import BudgetExceededError, ValidationError
from .noise import NoiseModel, noise_resistance
from .oracle import exact_noisy_expectations
from .sampling import empirical_mean, sequential_measure_batch, write_outcome_records
from .series import (
    MAX_TRUNCATION,
    coefficient,
    coefficients,
    optimal_truncation,
    sample_budget,
    truncation_bound,
)
from .states import DiagonalState, Observable

__all__ = [
    "MitigationPlan",
    "MitigationResult",
    "plan_mitigation",
    "combine",
    "run_mitigation",
    "mitigate_expectation",
    "coefficient",
    "coefficients",
    "optimal_truncation",
    "sample_budget",
    "truncation_bound",
    "MAX_TRUNCATION",
    "DEFAULT_CAP",
]

#: Sampled runs are rejected when the total state draws exceed this.
DEFAULT_CAP = 10**9


@dataclass(frozen=True)
class MitigationPlan:
    """Everything derived from (precision, confidence, resistance).

    ``order`` is the truncation order K; ``coeff_sq_sum`` the exact sum of
    squared series weights entering the shot count; ``shots_per_order`` the
    per-order sample budget; ``order_floored`` flags that the requested
    precision already exceeded the resistance so the order was clamped to 0.
    """

    epsilon: float
    delta: float
    resistance: float
    order: int
    coeff_sq_sum: int
    shots_per_order: int
    coeffs: tuple[int, ...]
    order_floored: bool = False

    @property
    def states_total(self) -> int:
        """Quantum states consumed by a sampled run: shots x (K+1) orders."""
        return self.shots_per_order * (self.order + 1)

    @property
    def measurements_total(self) -> int:
        """Noisy readouts applied: shots x (1 + 2 + ... + (K+1))."""
        return self.shots_per_order * (self.order + 1) * (self.order + 2) // 2

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "resistance": self.resistance,
            "order": self.order,
            "coeff_sq_sum": self.coeff_sq_sum,
            "shots_per_order": self.shots_per_order,
            "coeffs": list(self.coeffs),
            "order_floored": self.order_floored,
            "states_total": self.states_total,
            "measurements_total": self.measurements_total,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


def plan_mitigation(epsilon: float, delta: float, resistance: float) -> MitigationPlan:
    """Derive order, coefficients, and shot budget from the run parameters."""
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"confidence tolerance must lie in (0, 1), got {delta}")
    order = optimal_truncation(epsilon, resistance)
    floored = order == 0 and truncation_bound(resistance, 0) > epsilon
    factor, shots = sample_budget(order, epsilon, delta)
    return MitigationPlan(
        epsilon=float(epsilon),
        delta=float(delta),
        resistance=float(resistance),
        order=order,
        coeff_sq_sum=factor,
        shots_per_order=shots,
        coeffs=coefficients(order),
        order_floored=floored,
    )


@dataclass(frozen=True)
class MitigationResult:
    """Combined estimate with its per-order pieces and cost accounting."""

    estimate: float
    per_order: tuple[float, ...]
    plan: MitigationPlan
    states_consumed: int
    measurements_applied: int
    mode: str
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "per_order": list(self.per_order),
            "plan": self.plan.to_dict(),
            "states_consumed": self.states_consumed,
            "measurements_applied": self.measurements_applied,
            "mode": self.mode,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


def combine(plan: MitigationPlan, per_order) -> float:
    """Signed combination of the per-order estimates under the plan's weights."""
    per_order = tuple(float(v) for v in per_order)
    if len(per_order) != plan.order + 1:
        raise ValidationError(
            f"plan of order {plan.order} needs {plan.order + 1} estimates, got {len(per_order)}"
        )
    return float(sum(c * v for c, v in zip(plan.coeffs, per_order)))


def run_mitigation(
    state: DiagonalState,
    model: NoiseModel,
    observable: Observable,
    resistance: float,
    delta: float,
    epsilon: float,
    seed: int = 0,
    mode: str = "sampled",
    cap: int = DEFAULT_CAP,
    stream_dump=None,
) -> MitigationResult:
    """Full mitigation run returning the combined estimate.

    ``resistance`` is an input, mirroring devices whose worst-case readout
    fidelity is known from specifications; use ``mitigate_expectation`` to
    measure it from the model instead.  In sampled mode round ``m`` of order
    ``k`` draws from stream ``m * (K + 2) + k`` of ``seed``, so trials and
    orders can run in any order or in parallel without changing the result.
    ``stream_dump`` optionally receives one ``round,order,bitstring`` line
    per chain.
    """
    if mode not in ("sampled", "exact"):
        raise ValidationError(f"mode must be 'sampled' or 'exact', got {mode!r}")
    if observable.n != model.n or model.n != state.n:
        raise ValidationError("observable, model, and state must share the qubit count")
    plan = plan_mitigation(epsilon, delta, resistance)

    if mode == "exact":
        per_order = exact_noisy_expectations(observable, model, plan.order + 1, state)
        return MitigationResult(
            estimate=combine(plan, per_order),
            per_order=tuple(per_order),
            plan=plan,
            states_consumed=0,
            measurements_applied=0,
            mode=mode,
            seed=None,
        )

    if plan.states_total > cap:
        raise BudgetExceededError(
            f"sampled run needs {plan.states_total} state draws "
            f"(shots={plan.shots_per_order}, orders={plan.order + 1}), cap is {cap}",
            plan=plan,
        )
    shots = plan.shots_per_order
    rounds = np.arange(shots, dtype=np.uint64)
    per_order = []
    measurements = 0
    for k in range(1, plan.order + 2):
        streams = rounds * np.uint64(plan.order + 2) + np.uint64(k)
        outcomes = sequential_measure_batch(model, k, state, seed, streams)
        if stream_dump is not None:
            write_outcome_records(stream_dump, rounds, k, outcomes, model.n)
        per_order.append(empirical_mean(observable, outcomes))
        measurements += shots * k
    return MitigationResult(
        estimate=combine(plan, per_order),
        per_order=tuple(per_order),
        plan=plan,
        states_consumed=shots * (plan.order + 1),
        measurements_applied=measurements,
        mode=mode,
        seed=int(seed),
    )


def mitigate_expectation(
    state: DiagonalState,
    model: NoiseModel,
    observable: Observable,
    epsilon: float,
    delta: float,
    seed: int = 0,
    mode: str = "sampled",
    cap: int = DEFAULT_CAP,
) -> MitigationResult:
    """Convenience wrapper that measures the resistance from the model."""
    return run_mitigation(
        state,
        model,
        observable,
        noise_resistance(model),
        delta,
        epsilon,
        seed=seed,
        mode=mode,
        cap=cap,
    )
