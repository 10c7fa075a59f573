"""Closed-form references: exact noisy expectations and bound checks.

Everything here is deterministic linear algebra, used both by the exact
mode of the mitigation driver and as the independent oracle the sampled
paths are tested against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import PropertyViolation, ValidationError
from .noise import NoiseModel, StochasticMatrix, TensorProductNoise, noise_resistance
from .series import coefficients, truncation_bound
from .states import DiagonalState, Observable, exact_expectation

#: Direct inversion is kept to sizes where an explicit solve is routine.
MAX_INVERSION_QUBITS = 10

#: Condition numbers past this make the inverse-mitigation baseline meaningless.
MAX_CONDITION = 1e12


def _dense_entries(model: NoiseModel) -> np.ndarray:
    if isinstance(model, TensorProductNoise):
        return model.expand().entries
    return model.entries


def noisy_distribution(model: NoiseModel, k: int, state: DiagonalState) -> np.ndarray:
    """Outcome distribution after ``k`` noisy readout steps: A^k applied to the state."""
    if k < 0:
        raise ValidationError(f"need k >= 0, got {k}")
    if model.n != state.n:
        raise ValidationError(f"noise model has {model.n} qubits but state has {state.n}")
    if state.probs is None:
        raise ValidationError("exact distributions need a dense state")
    entries = _dense_entries(model)
    v = state.probs.copy()
    for _ in range(k):
        v = entries @ v
    return v


def _tensor_parity_expectations(
    model: TensorProductNoise, max_k: int, state: DiagonalState
) -> list[float]:
    # per-qubit 2x2 powers; the parity expectation factorizes over qubits
    if state.marginals is None:
        raise ValidationError("the factorized path needs a product state")
    vs = [np.array([1.0 - p, p]) for p in state.marginals]
    out = []
    for _ in range(max_k):
        vs = [model.qubit_matrix(i) @ v for i, v in enumerate(vs)]
        prod = 1.0
        for v in vs:
            prod *= v[0] - v[1]
        out.append(prod)
    return out


def exact_noisy_expectations(
    observable: Observable, model: NoiseModel, max_k: int, state: DiagonalState
) -> list[float]:
    """Exact noisy expectations for chain orders ``1..max_k`` in one sweep."""
    if max_k < 1:
        raise ValidationError(f"need max_k >= 1, got {max_k}")
    if observable.n != model.n or model.n != state.n:
        raise ValidationError("observable, model, and state must share the qubit count")
    if isinstance(model, TensorProductNoise) and state.probs is None:
        if observable.kind != "parity":
            raise ValidationError(
                "tensor models past the dense cap support only the parity observable"
            )
        return _tensor_parity_expectations(model, max_k, state)
    if state.probs is None:
        raise ValidationError("dense models need a dense state")
    entries = _dense_entries(model)
    values = observable.evaluate(np.arange(entries.shape[0], dtype=np.int64))
    v = state.probs.copy()
    out = []
    for _ in range(max_k):
        v = entries @ v
        out.append(float(values @ v))
    return out


def exact_noisy_expectation(
    observable: Observable, model: NoiseModel, k: int, state: DiagonalState
) -> float:
    """Exact expectation under ``k`` noisy readout steps; ``k=0`` is noise-free."""
    if k == 0:
        return exact_expectation(observable, state)
    return exact_noisy_expectations(observable, model, k, state)[-1]


def inverse_mitigation(
    observable: Observable, a: StochasticMatrix, state: DiagonalState
) -> float:
    """Expectation recovered by inverting the noise matrix directly.

    Analytically equal to the noise-free expectation; exposed to quantify
    the float error of explicit inversion and as the comparison baseline.
    """
    if a.n > MAX_INVERSION_QUBITS:
        raise ValidationError(
            f"direct inversion supports up to {MAX_INVERSION_QUBITS} qubits, got {a.n}"
        )
    if a.n != state.n or observable.n != a.n:
        raise ValidationError("observable, matrix, and state must share the qubit count")
    if state.probs is None:
        raise ValidationError("inverse mitigation needs a dense state")
    cond = float(np.linalg.cond(a.entries, 1))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise ValidationError(f"noise matrix is ill-conditioned (1-norm condition ~ {cond:.3e})")
    noisy = a.entries @ state.probs
    recovered = np.linalg.solve(a.entries, noisy)
    values = observable.evaluate(np.arange(a.dim, dtype=np.int64))
    return float(values @ recovered)


def invert_histogram(a: StochasticMatrix, histogram: np.ndarray) -> np.ndarray:
    """Apply the inverse noise matrix to an empirical histogram.

    The result needs no clipping to be informative: negative entries are
    exactly the pathology that makes direct inversion untrustworthy.
    """
    if a.n > MAX_INVERSION_QUBITS:
        raise ValidationError(
            f"direct inversion supports up to {MAX_INVERSION_QUBITS} qubits, got {a.n}"
        )
    histogram = np.asarray(histogram, dtype=np.float64)
    if histogram.shape != (a.dim,):
        raise ValidationError(f"histogram must have length {a.dim}")
    return np.linalg.solve(a.entries, histogram)


@dataclass(frozen=True)
class OracleReport:
    """Exact per-order expectations with the series combination and its bound."""

    qubits: int
    resistance: float
    truncation: int
    true_value: float
    per_order: tuple[float, ...]
    combined: float
    bound: float
    residual: float
    inverse_mitigated: float | None = None

    def to_dict(self) -> dict:
        d = {
            "qubits": self.qubits,
            "resistance": self.resistance,
            "truncation": self.truncation,
            "true_value": self.true_value,
            "per_order": list(self.per_order),
            "combined": self.combined,
            "bound": self.bound,
            "residual": self.residual,
        }
        if self.inverse_mitigated is not None:
            d["inverse_mitigated"] = self.inverse_mitigated
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


def verify_truncation_bound(
    observable: Observable,
    model: NoiseModel,
    state: DiagonalState,
    truncation: int,
    check_inverse: bool = True,
) -> OracleReport:
    """Build an OracleReport and assert the series-tail bound on it.

    The combined order-K estimate must sit within ``resistance^(K+1)`` of
    the true value on every valid instance; a violation raises.
    """
    if truncation < 0 or truncation > 15:
        raise ValidationError(f"truncation order must lie in 0..15, got {truncation}")
    if model.n > MAX_INVERSION_QUBITS:
        raise ValidationError(
            f"oracle verification supports up to {MAX_INVERSION_QUBITS} qubits, got {model.n}"
        )
    xi = noise_resistance(model)
    true_value = exact_expectation(observable, state)
    e_k = exact_noisy_expectations(observable, model, truncation + 1, state)
    coeffs = coefficients(truncation)
    combined = float(sum(c * e for c, e in zip(coeffs, e_k)))
    bound = truncation_bound(xi, truncation)
    residual = abs(true_value - combined)
    inverse_val = None
    if check_inverse:
        a = model.expand() if isinstance(model, TensorProductNoise) else model
        inverse_val = inverse_mitigation(observable, a, state)
    report = OracleReport(
        qubits=model.n,
        resistance=xi,
        truncation=truncation,
        true_value=true_value,
        per_order=tuple(e_k),
        combined=combined,
        bound=bound,
        residual=residual,
        inverse_mitigated=inverse_val,
    )
    if residual > bound:
        raise PropertyViolation(
            f"series-tail bound violated: residual {residual!r} exceeds bound {bound!r} "
            f"(n={model.n}, resistance={xi!r}, truncation={truncation})"
        )
    return report
