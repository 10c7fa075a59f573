"""Diagonal states and diagonal observables.

Only the diagonal of a density matrix ever enters an expectation value of a
computational-basis-diagonal observable, so states are plain probability
vectors over the 2^n outcomes.  Observables are evaluation rules mapping a
bitstring to a value in [-1, 1]; storing rules instead of tables keeps
sampled estimation usable past the dense-matrix qubit cap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .exceptions import ValidationError

#: Probability-vector tolerance for in-memory values.
SUM_TOL = 1e-12

#: File-load gate, matching the noise-matrix policy.
FILE_SUM_TOL = 1e-9

#: Dense probability vectors cap out well past the dense-matrix limit;
#: beyond this use product states.
MAX_DENSE_STATE_QUBITS = 20

VALUE_TOL = 1e-12


@dataclass(frozen=True)
class DiagonalState:
    """Probability vector over n-bit outcomes.

    ``probs`` may be None for a pure product state, in which case
    ``marginals`` holds each qubit's probability of reading 1 (qubit 0 is
    the most significant bit).
    """

    n: int
    probs: np.ndarray | None
    marginals: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"need at least one qubit, got n={self.n}")
        if self.probs is None and self.marginals is None:
            raise ValidationError("state needs a probability vector or per-qubit marginals")
        if self.probs is not None:
            if self.n > MAX_DENSE_STATE_QUBITS:
                raise ValidationError(
                    f"dense states support up to {MAX_DENSE_STATE_QUBITS} qubits, got {self.n}"
                )
            probs = np.asarray(self.probs, dtype=np.float64)
            if probs.shape != (1 << self.n,):
                raise ValidationError(
                    f"expected {1 << self.n} probabilities for n={self.n}, got shape {probs.shape}"
                )
            if not np.all(np.isfinite(probs)) or np.any(probs < 0.0):
                raise ValidationError("probabilities must be finite and non-negative")
            if abs(probs.sum() - 1.0) > SUM_TOL:
                raise ValidationError(
                    f"probabilities must sum to 1 within {SUM_TOL:g}, got {probs.sum()!r}"
                )
            probs = probs.copy()
            probs.setflags(write=False)
            object.__setattr__(self, "probs", probs)
        if self.marginals is not None:
            marg = tuple(float(p) for p in self.marginals)
            if len(marg) != self.n:
                raise ValidationError("need one marginal per qubit")
            for p in marg:
                if not 0.0 <= p <= 1.0:
                    raise ValidationError(f"marginals must lie in [0, 1], got {p}")
            object.__setattr__(self, "marginals", marg)

    @classmethod
    def from_probs(cls, probs) -> "DiagonalState":
        probs = np.asarray(probs, dtype=np.float64)
        n = int(probs.size - 1).bit_length()
        if probs.size != 1 << n or probs.size < 2:
            raise ValidationError(f"probability vector length {probs.size} is not a power of two")
        return cls(n, probs)

    @classmethod
    def renormalized(cls, probs, tol: float = FILE_SUM_TOL) -> "DiagonalState":
        """Build from a vector whose sum may drift from 1 by up to ``tol``."""
        probs = np.asarray(probs, dtype=np.float64)
        if not np.all(np.isfinite(probs)) or np.any(probs < 0.0):
            raise ValidationError("probabilities must be finite and non-negative")
        total = probs.sum()
        if abs(total - 1.0) > tol:
            raise ValidationError(f"probabilities must sum to 1 within {tol:g}, got {total!r}")
        return cls.from_probs(probs / total)

    @classmethod
    def product(cls, marginals) -> "DiagonalState":
        """Product state from per-qubit probabilities of reading 1.

        A dense vector is materialized alongside when it is small enough.
        """
        marg = tuple(float(p) for p in marginals)
        n = len(marg)
        if n <= MAX_DENSE_STATE_QUBITS:
            probs = np.array([1.0])
            for p in marg:
                probs = np.kron(probs, np.array([1.0 - p, p]))
            return cls(n, probs, marg)
        return cls(n, None, marg)

    def cdf(self) -> np.ndarray:
        if self.probs is None:
            raise ValidationError("state has no dense probability vector")
        return np.cumsum(self.probs)


def uniform_state(n: int) -> DiagonalState:
    """Equal probability on every outcome (the maximal-superposition diagonal)."""
    if n < 1:
        raise ValidationError(f"need at least one qubit, got n={n}")
    if n <= MAX_DENSE_STATE_QUBITS:
        return DiagonalState(n, np.full(1 << n, 2.0**-n), (0.5,) * n)
    return DiagonalState(n, None, (0.5,) * n)


def point_mass(n: int, index: int) -> DiagonalState:
    """All probability on a single outcome."""
    if not 0 <= index < (1 << n):
        raise ValidationError(f"outcome index {index} out of range for n={n}")
    probs = np.zeros(1 << n)
    probs[index] = 1.0
    return DiagonalState(n, probs)


@dataclass(frozen=True)
class Observable:
    """Diagonal observable with entries in [-1, 1].

    ``kind`` is "parity" (product of single-qubit Z values), "table"
    (explicit per-outcome values) or "function" (arbitrary rule).
    """

    n: int
    kind: str
    table: np.ndarray | None = None
    fn: Callable[[int], float] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"need at least one qubit, got n={self.n}")
        if self.kind not in ("parity", "table", "function"):
            raise ValidationError(f"unknown observable kind {self.kind!r}")
        if self.kind == "table":
            if self.table is None:
                raise ValidationError("table observables need values")
            table = np.asarray(self.table, dtype=np.float64)
            if table.shape != (1 << self.n,):
                raise ValidationError(
                    f"expected {1 << self.n} observable values, got shape {table.shape}"
                )
            if np.any(np.abs(table) > 1.0 + VALUE_TOL):
                raise ValidationError("observable values must lie in [-1, 1]")
            table = table.copy()
            table.setflags(write=False)
            object.__setattr__(self, "table", table)
        if self.kind == "function" and self.fn is None:
            raise ValidationError("function observables need a callable")

    @classmethod
    def from_table(cls, values) -> "Observable":
        values = np.asarray(values, dtype=np.float64)
        n = int(values.size - 1).bit_length()
        if values.size != 1 << n or values.size < 2:
            raise ValidationError(f"table length {values.size} is not a power of two")
        if n > 12:
            raise ValidationError("observable tables support up to 12 qubits; use a rule")
        return cls(n, "table", table=values)

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int], float]) -> "Observable":
        return cls(n, "function", fn=fn)

    def evaluate(self, outcomes: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on integer outcome indices."""
        xs = np.asarray(outcomes, dtype=np.int64)
        if self.kind == "parity":
            odd = np.bitwise_count(xs.astype(np.uint64)).astype(np.int64) & 1
            return (1 - 2 * odd).astype(np.float64)
        if self.kind == "table":
            return self.table[xs]
        vals = np.fromiter((self.fn(int(x)) for x in xs.ravel()), np.float64, xs.size)
        if vals.size and np.max(np.abs(vals)) > 1.0 + VALUE_TOL:
            raise ValidationError("observable rule produced a value outside [-1, 1]")
        return vals.reshape(xs.shape)

    def __call__(self, x: int) -> float:
        return float(self.evaluate(np.array([x]))[0])


def pauli_z_observable(n: int) -> Observable:
    """Product of Z on every qubit: +1 on even-weight bitstrings, -1 on odd."""
    return Observable(n, "parity")


def exact_expectation(observable: Observable, state: DiagonalState) -> float:
    """Noise-free expectation: the observable averaged under the state."""
    if observable.n != state.n:
        raise ValidationError(
            f"observable acts on {observable.n} qubits but state has {state.n}"
        )
    if state.probs is not None:
        values = observable.evaluate(np.arange(1 << state.n, dtype=np.int64))
        return float(values @ state.probs)
    if observable.kind == "parity" and state.marginals is not None:
        prod = 1.0
        for p in state.marginals:
            prod *= 1.0 - 2.0 * p
        return prod
    raise ValidationError("expectation on a product state needs a parity observable")


# ---------------------------------------------------------------------------
# file format: {"n": int, "probs": [...]}


def save_state(state: DiagonalState, path) -> None:
    if state.probs is None:
        raise ValidationError("only dense states can be saved")
    Path(path).write_text(json.dumps({"n": state.n, "probs": state.probs.tolist()}))


def load_state(path) -> DiagonalState:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read state from {path}: {exc}") from exc
    if not isinstance(doc, dict) or "n" not in doc or "probs" not in doc:
        raise ValidationError(f"state file {path} lacks 'n'/'probs' fields")
    state = DiagonalState.renormalized(np.array(doc["probs"], dtype=np.float64))
    if state.n != int(doc["n"]):
        raise ValidationError(f"probability vector in {path} disagrees with n={doc['n']}")
    return state
