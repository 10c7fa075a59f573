"""Readout-error mitigation via a truncated series of sequential measurements.

Noisy readout of an n-qubit register acts as a column-stochastic matrix on
the outcome distribution.  Instead of inverting that matrix, this package
cancels the bias by combining expectation values measured through repeated
(sequential) readout chains, weighted by the truncated inverse-series
coefficients.  The library covers the noise models, the measurement
simulator, the mitigation driver in sampled and exact modes, closed-form
oracles for every bound, and a CLI that reproduces the reference
experiments.
"""

__version__ = "0.1.0"

from ._kernels import active_backend
from .exceptions import (
    BudgetExceededError,
    DeviceTooNoisyError,
    PropertyViolation,
    ValidationError,
)
from .mitigation import (
    DEFAULT_CAP,
    MitigationPlan,
    MitigationResult,
    combine,
    mitigate_expectation,
    plan_mitigation,
    run_mitigation,
)
from .noise import (
    MAX_DENSE_QUBITS,
    NoiseModel,
    StochasticMatrix,
    TensorProductNoise,
    induced_one_norm,
    load_noise_model,
    matrix_power,
    noise_resistance,
    noise_strength,
    random_noise_matrix,
    reduce_qubits,
    save_noise_model,
)
from .oracle import (
    OracleReport,
    exact_noisy_expectation,
    exact_noisy_expectations,
    inverse_mitigation,
    invert_histogram,
    noisy_distribution,
    verify_truncation_bound,
)
from .rng import SeededRng, chain_stream
from .sampling import (
    Outcome,
    apply_noise,
    empirical_mean,
    sample_state,
    sequential_measure,
    sequential_measure_batch,
)
from .series import (
    MAX_TRUNCATION,
    coefficient,
    coefficients,
    optimal_truncation,
    sample_budget,
    truncation_bound,
)
from .states import (
    DiagonalState,
    Observable,
    exact_expectation,
    load_state,
    pauli_z_observable,
    point_mass,
    save_state,
    uniform_state,
)

__all__ = [
    "__version__",
    "active_backend",
    "BudgetExceededError",
    "DeviceTooNoisyError",
    "PropertyViolation",
    "ValidationError",
    "DEFAULT_CAP",
    "MitigationPlan",
    "MitigationResult",
    "combine",
    "mitigate_expectation",
    "plan_mitigation",
    "run_mitigation",
    "MAX_DENSE_QUBITS",
    "NoiseModel",
    "StochasticMatrix",
    "TensorProductNoise",
    "induced_one_norm",
    "load_noise_model",
    "matrix_power",
    "noise_resistance",
    "noise_strength",
    "random_noise_matrix",
    "reduce_qubits",
    "save_noise_model",
    "OracleReport",
    "exact_noisy_expectation",
    "exact_noisy_expectations",
    "inverse_mitigation",
    "invert_histogram",
    "noisy_distribution",
    "verify_truncation_bound",
    "SeededRng",
    "chain_stream",
    "Outcome",
    "apply_noise",
    "empirical_mean",
    "sample_state",
    "sequential_measure",
    "sequential_measure_batch",
    "MAX_TRUNCATION",
    "coefficient",
    "coefficients",
    "optimal_truncation",
    "sample_budget",
    "truncation_bound",
    "DiagonalState",
    "Observable",
    "exact_expectation",
    "load_state",
    "pauli_z_observable",
    "point_mass",
    "save_state",
    "uniform_state",
]
