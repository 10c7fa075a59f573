"""Measurement simulation: ideal, noisy, and sequential noisy readout.

A sequential measurement of order k samples a true outcome from the state,
then pushes it through the noisy readout k times, feeding each observed
bitstring back in as the next true outcome; only the final observation is
kept.  The k-step chain is distributed exactly like a single readout whose
noise matrix is the k-th matrix power.

One-off draws consume a ``SeededRng`` cursor; the batch entry point
regenerates the identical outcomes for whole arrays of rounds at once via
the compiled kernels (see ``_kernels`` for the shared draw layout).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import ValidationError
from .noise import NoiseModel, StochasticMatrix, TensorProductNoise
from .rng import SeededRng, chain_stream
from .states import DiagonalState, Observable

__all__ = [
    "Outcome",
    "SeededRng",
    "chain_stream",
    "sample_state",
    "apply_noise",
    "sequential_measure",
    "sequential_measure_batch",
    "empirical_mean",
    "write_outcome_records",
]

_EMPTY = np.empty(0)


@dataclass(frozen=True)
class Outcome:
    """A single n-bit measurement result."""

    n: int
    index: int

    def __post_init__(self):
        if not 0 <= self.index < (1 << self.n):
            raise ValidationError(f"outcome index {self.index} out of range for n={self.n}")

    @property
    def bits(self) -> str:
        return format(self.index, f"0{self.n}b")

    @classmethod
    def from_bits(cls, bits: str) -> "Outcome":
        return cls(len(bits), int(bits, 2))


def _categorical(cdf: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(cdf, u, side="right"))
    return min(idx, cdf.size - 1)


def sample_state(state: DiagonalState, rng: SeededRng) -> Outcome:
    """Draw one outcome from the state's distribution (ideal readout)."""
    if state.probs is not None:
        return Outcome(state.n, _categorical(state.cdf(), rng.uniform()))
    index = 0
    for p_one in state.marginals:
        bit = 1 if rng.uniform() >= 1.0 - p_one else 0
        index = (index << 1) | bit
    return Outcome(state.n, index)


def apply_noise(model: NoiseModel, outcome: Outcome, rng: SeededRng) -> Outcome:
    """One noisy readout step: observe ``outcome`` through the noise model."""
    if model.n != outcome.n:
        raise ValidationError(f"noise model has {model.n} qubits but outcome has {outcome.n}")
    if isinstance(model, TensorProductNoise):
        x = outcome.index
        n = model.n
        for q in range(n):
            shift = n - 1 - q
            bit = (x >> shift) & 1
            rate = model.alphas[q] if bit == 0 else model.betas[q]
            if rng.uniform() < rate:
                x ^= 1 << shift
        return Outcome(n, x)
    cdf = np.cumsum(model.entries[:, outcome.index])
    return Outcome(model.n, _categorical(cdf, rng.uniform()))


def sequential_measure(model: NoiseModel, k: int, state: DiagonalState, rng: SeededRng) -> Outcome:
    """Sample the state, then apply the noisy readout ``k`` times in a chain."""
    if k < 1:
        raise ValidationError(f"sequential measurement needs k >= 1, got {k}")
    out = sample_state(state, rng)
    for _ in range(k):
        out = apply_noise(model, out, rng)
    return out


def sequential_measure_batch(
    model: NoiseModel,
    k: int,
    state: DiagonalState,
    seed: int,
    streams: np.ndarray,
) -> np.ndarray:
    """Final outcomes of one chain per stream id, as an int64 array.

    Equals ``sequential_measure(model, k, state, SeededRng(seed, s))`` for
    each stream ``s``, but runs through the compiled kernels.  ``k=0`` is
    allowed here and samples the bare state.
    """
    if k < 0:
        raise ValidationError(f"chain length must be >= 0, got {k}")
    if model.n != state.n:
        raise ValidationError(f"noise model has {model.n} qubits but state has {state.n}")
    if isinstance(model, TensorProductNoise):
        alphas = np.asarray(model.alphas)
        betas = np.asarray(model.betas)
        if state.probs is not None:
            return _kernels.chains_tensor(
                alphas, betas, state.cdf(), _EMPTY, False, seed, streams, k
            )
        return _kernels.chains_tensor(
            alphas, betas, _EMPTY, np.asarray(state.marginals), True, seed, streams, k
        )
    if state.probs is None:
        state = DiagonalState.product(state.marginals)
    return _kernels.chains_dense(model.column_cdfs(), state.cdf(), seed, streams, k)


def empirical_mean(observable: Observable, outcomes) -> float:
    """Mean observable value over a non-empty batch of outcomes."""
    if isinstance(outcomes, np.ndarray):
        xs = outcomes.astype(np.int64, copy=False)
    else:
        outcomes = list(outcomes)
        if outcomes and isinstance(outcomes[0], Outcome):
            for o in outcomes:
                if o.n != observable.n:
                    raise ValidationError(
                        f"outcome on {o.n} qubits fed to a {observable.n}-qubit observable"
                    )
            xs = np.array([o.index for o in outcomes], dtype=np.int64)
        else:
            xs = np.array(outcomes, dtype=np.int64)
    if xs.size == 0:
        raise ValidationError("empirical mean of an empty outcome list")
    return float(observable.evaluate(xs).mean())


def write_outcome_records(fh, trial_indices, order: int, outcomes: np.ndarray, n: int) -> None:
    """Append one ``trial,order,bitstring`` line per outcome to a text stream."""
    for t, x in zip(trial_indices, outcomes):
        fh.write(f"{int(t)},{order},{int(x):0{n}b}\n")
