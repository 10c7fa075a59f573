"""Column-stochastic readout-noise models.

A noisy n-qubit readout is described by a ``2^n x 2^n`` column-stochastic
matrix: entry ``(x, y)`` is the probability of observing bitstring ``x``
when the true outcome is ``y``.  Rows and columns are indexed by the
integer value of the bitstring, starting at 0.  Two representations are
supported: an explicit dense matrix, and a tensor product of per-qubit
2x2 flip matrices that never needs to be materialized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ValidationError

#: Dense matrices above this qubit count exceed desk-scale memory
#: (2^12 gives 16.7M float64 entries); use the tensor form beyond it.
MAX_DENSE_QUBITS = 12

#: Stochasticity tolerance for in-memory values.
COLUMN_TOL = 1e-12

#: Looser gate applied when loading from text files; deviations below this
#: are renormalized away, anything larger is an error.
FILE_COLUMN_TOL = 1e-9


def _check_entries(n: int, entries: np.ndarray) -> np.ndarray:
    if not 1 <= n <= MAX_DENSE_QUBITS:
        raise ValidationError(
            f"dense noise matrices support 1..{MAX_DENSE_QUBITS} qubits, got n={n}"
        )
    entries = np.asarray(entries, dtype=np.float64)
    d = 1 << n
    if entries.shape != (d, d):
        raise ValidationError(f"expected a {d}x{d} matrix for n={n}, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise ValidationError("noise matrix contains non-finite entries")
    if np.any(entries < 0.0):
        raise ValidationError("noise matrix contains negative entries")
    return entries


@dataclass(frozen=True)
class StochasticMatrix:
    """Dense readout-noise matrix; immutable after construction."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        entries = _check_entries(self.n, self.entries)
        dev = np.max(np.abs(entries.sum(axis=0) - 1.0))
        if dev > COLUMN_TOL:
            raise ValidationError(
                f"columns must sum to 1 within {COLUMN_TOL:g}; worst deviation {dev:.3e}"
            )
        entries = entries.copy()
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def renormalized(cls, n: int, entries, tol: float = FILE_COLUMN_TOL) -> "StochasticMatrix":
        """Build from entries whose column sums may drift from 1 by up to ``tol``."""
        entries = _check_entries(n, entries)
        colsums = entries.sum(axis=0)
        dev = np.max(np.abs(colsums - 1.0))
        if dev > tol:
            raise ValidationError(
                f"columns must sum to 1 within {tol:g}; worst deviation {dev:.3e}"
            )
        return cls(n, entries / colsums)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def column_cdfs(self) -> np.ndarray:
        """Row ``x`` = cumulative sums of column ``x``; the sampler's lookup table."""
        return np.ascontiguousarray(np.cumsum(self.entries, axis=0).T)


@dataclass(frozen=True)
class TensorProductNoise:
    """Independent per-qubit readout errors.

    ``alphas[i]`` is qubit i's probability of reading 1 when the truth is 0,
    ``betas[i]`` the reverse.  Qubit 0 is the most significant bit.
    """

    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        betas = tuple(float(b) for b in self.betas)
        if len(alphas) == 0 or len(alphas) != len(betas):
            raise ValidationError("alphas and betas must be non-empty and of equal length")
        for r in alphas + betas:
            if not 0.0 <= r < 1.0:
                raise ValidationError(f"error rates must lie in [0, 1), got {r}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)

    @property
    def n(self) -> int:
        return len(self.alphas)

    def qubit_matrix(self, i: int) -> np.ndarray:
        a, b = self.alphas[i], self.betas[i]
        return np.array([[1.0 - a, b], [a, 1.0 - b]])

    def expand(self) -> StochasticMatrix:
        """Materialize the full Kronecker-product matrix (small n only)."""
        if self.n > MAX_DENSE_QUBITS:
            raise ValidationError(
                f"refusing to expand a {self.n}-qubit tensor model to dense form"
            )
        entries = np.array([[1.0]])
        for i in range(self.n):
            entries = np.kron(entries, self.qubit_matrix(i))
        return StochasticMatrix(self.n, entries)


NoiseModel = StochasticMatrix | TensorProductNoise


def model_qubits(model: NoiseModel) -> int:
    return model.n


def noise_resistance(model: NoiseModel) -> float:
    """Twice the worst-case probability of misreading a basis state; in [0, 2].

    The device is usable for series mitigation only below 1.  For tensor
    models the minimum diagonal factorizes, so no matrix is materialized.
    """
    if isinstance(model, TensorProductNoise):
        prod = 1.0
        for a, b in zip(model.alphas, model.betas):
            prod *= min(1.0 - a, 1.0 - b)
        return 2.0 * (1.0 - prod)
    return 2.0 * (1.0 - float(np.min(np.diagonal(model.entries))))


def noise_strength(model: TensorProductNoise) -> float:
    """Sum over qubits of the larger flip rate.

    For small rates the resistance is approximately ``2(1 - exp(-strength))``.
    """
    if not isinstance(model, TensorProductNoise):
        raise ValidationError("noise_strength is defined for tensor-product models")
    return float(sum(max(a, b) for a, b in zip(model.alphas, model.betas)))


def induced_one_norm(matrix) -> float:
    """Maximum absolute column sum of a real matrix."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.size == 0:
        return 0.0
    return float(np.abs(m).sum(axis=0).max())


def matrix_power(a: StochasticMatrix, k: int) -> StochasticMatrix:
    """``k``-th matrix power; stochasticity is closed under products.

    Columns are renormalized to absorb float drift from the repeated
    products (drift beyond the file tolerance raises).
    """
    if k < 0:
        raise ValidationError(f"matrix power needs k >= 0, got {k}")
    return StochasticMatrix.renormalized(a.n, np.linalg.matrix_power(a.entries, k))


def random_noise_matrix(n: int, target_xi: float, seed: int) -> StochasticMatrix:
    """Random column-stochastic matrix whose noise resistance hits ``target_xi``.

    Each column's diagonal entry is drawn uniformly from ``[1 - xi/2, 1]``;
    one uniformly chosen column is then pinned to exactly ``1 - xi/2`` so the
    minimum diagonal (hence the resistance) is deterministic.  The remaining
    column mass is spread over the off-diagonal entries with normalized
    uniform weights.  Deterministic for fixed ``(n, target_xi, seed)``.
    """
    if not 1 <= n <= MAX_DENSE_QUBITS:
        raise ValidationError(f"random dense noise supports 1..{MAX_DENSE_QUBITS} qubits, got {n}")
    if not 0.0 < target_xi < 1.0:
        raise ValidationError(f"target resistance must lie in (0, 1), got {target_xi}")
    gen = np.random.default_rng(seed)
    d = 1 << n
    floor = 1.0 - target_xi / 2.0
    diag = floor + (1.0 - floor) * gen.random(d)
    diag[gen.integers(d)] = floor
    entries = np.zeros((d, d))
    for y in range(d):
        w = gen.random(d - 1)
        off = (1.0 - diag[y]) * w / w.sum()
        entries[:y, y] = off[:y]
        entries[y, y] = diag[y]
        entries[y + 1 :, y] = off[y:]
    return StochasticMatrix(n, entries)


def reduce_qubits(a: StochasticMatrix, m: int) -> StochasticMatrix:
    """Marginalize the rightmost ``n - m`` qubits of a dense model.

    Traced output bits are summed, traced input bits are averaged; this is
    the linear map that keeps columns stochastic and returns the left factor
    on tensor-product inputs.
    """
    if not 1 <= m <= a.n:
        raise ValidationError(f"target qubit count must lie in 1..{a.n}, got {m}")
    if m == a.n:
        return a
    dm = 1 << m
    dt = 1 << (a.n - m)
    four = a.entries.reshape(dm, dt, dm, dt)
    reduced = four.sum(axis=1).mean(axis=2)
    return StochasticMatrix.renormalized(m, reduced)


# ---------------------------------------------------------------------------
# file format: {"n": int, "format": "dense", "matrix": [...rows...]}
#          or  {"n": int, "format": "tensor", "alphas": [...], "betas": [...]}


def save_noise_model(model: NoiseModel, path) -> None:
    if isinstance(model, TensorProductNoise):
        doc = {
            "n": model.n,
            "format": "tensor",
            "alphas": list(model.alphas),
            "betas": list(model.betas),
        }
    else:
        doc = {"n": model.n, "format": "dense", "matrix": model.entries.tolist()}
    Path(path).write_text(json.dumps(doc))


def load_noise_model(path) -> NoiseModel:
    """Load a noise model; columns off by more than the file tolerance fail."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read noise model from {path}: {exc}") from exc
    if not isinstance(doc, dict) or "format" not in doc or "n" not in doc:
        raise ValidationError(f"noise model file {path} lacks 'n'/'format' fields")
    fmt = doc["format"]
    try:
        n = int(doc["n"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad qubit count in {path}: {doc['n']!r}") from exc
    if fmt == "dense":
        if "matrix" not in doc:
            raise ValidationError(f"dense noise model file {path} lacks 'matrix'")
        try:
            entries = np.array(doc["matrix"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad matrix data in {path}: {exc}") from exc
        return StochasticMatrix.renormalized(n, entries)
    if fmt == "tensor":
        if "alphas" not in doc or "betas" not in doc:
            raise ValidationError(f"tensor noise model file {path} lacks 'alphas'/'betas'")
        model = TensorProductNoise(tuple(doc["alphas"]), tuple(doc["betas"]))
        if model.n != n:
            raise ValidationError(f"rate arrays in {path} disagree with n={n}")
        return model
    raise ValidationError(f"unknown noise model format {fmt!r} in {path}")
