"""Hot sampling kernels: measurement chains over many rounds at once.

Two interchangeable backends produce bit-identical outcomes:

* ``numba`` -- ``@njit`` loops that generate each uniform inline (default);
* ``numpy`` -- pure-numpy fallback that materializes the uniforms grid.

Selection: set ``NEUMANN_MITIGATION_BACKEND=numpy`` (or ``numba``) before
import.  When numba is unavailable the numpy path is used with a warning.
Both implementations stay importable for the equivalence tests and the
benchmark in ``benchmarks/``.

Conventions shared by both backends (and by ``SeededRng`` consumers):

* categorical draw from a cdf = number of cdf entries ``<= u``, clipped to
  the last index;
* per-bit flip fires when ``u < rate``;
* draw layout per stream: state draws first (1 for a dense state, n for a
  product state), then the chain steps (1 draw per step for a dense model,
  n per step for a tensor model), qubit 0 = most significant bit.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

from . import rng as _rng

_ENV_VAR = "NEUMANN_MITIGATION_BACKEND"


def _pick_backend() -> str:
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        warnings.warn("numba not importable; falling back to the numpy kernels")
        return "numpy"
    return "numba"


_BACKEND = _pick_backend()


def active_backend() -> str:
    return _BACKEND


# ---------------------------------------------------------------------------
# numpy implementations


def _np_uniform_grid(seed, streams, count):
    return _rng.grid_uniforms(seed, streams, count)


def _np_state_sample(state_cdf, u):
    x = np.searchsorted(state_cdf, u, side="right")
    return np.minimum(x, state_cdf.size - 1).astype(np.int64)


def _np_product_sample(p_one, u):
    n = p_one.size
    x = np.zeros(u.shape[0], dtype=np.int64)
    for q in range(n):
        bit = (u[:, q] >= 1.0 - p_one[q]).astype(np.int64)
        x = (x << 1) | bit
    return x


def _np_chains_dense(tcdf, state_cdf, seed, streams, k):
    d = tcdf.shape[0]
    u = _np_uniform_grid(seed, streams, k + 1)
    x = _np_state_sample(state_cdf, u[:, 0])
    for j in range(k):
        # gather each round's current column cdf and count entries <= u
        x = (tcdf[x] <= u[:, j + 1, None]).sum(axis=1)
        np.minimum(x, d - 1, out=x)
    return x.astype(np.int64)


def _np_chains_tensor(alphas, betas, state_cdf, p_one, product_state, seed, streams, k):
    n = alphas.size
    pos0 = n if product_state else 1
    u = _np_uniform_grid(seed, streams, pos0 + k * n)
    if product_state:
        x = _np_product_sample(p_one, u)
    else:
        x = _np_state_sample(state_cdf, u[:, 0])
    pos = pos0
    for _ in range(k):
        for q in range(n):
            shift = n - 1 - q
            bit = (x >> shift) & 1
            rate = np.where(bit == 0, alphas[q], betas[q])
            flips = (u[:, pos] < rate).astype(np.int64)
            x ^= flips << shift
            pos += 1
    return x


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily on first use, cached on disk)

_NB = {}

if _BACKEND == "numba":
    from numba import njit

    _M0 = np.uint64(0xD2511F53)
    _M1 = np.uint64(0xCD9E8D57)
    _W0 = np.uint64(0x9E3779B9)
    _W1 = np.uint64(0xBB67AE85)
    _MASK32 = np.uint64(0xFFFFFFFF)
    _SH32 = np.uint64(32)
    _INV53 = 2.0**-53

    @njit(cache=True, nogil=True, inline="always")
    def _nb_uniform(seed, stream, draw):
        # scalar twin of rng.philox4x32 + the 53-bit double conversion
        b = draw >> np.uint64(1)
        c0 = b & _MASK32
        c1 = b >> _SH32
        c2 = stream & _MASK32
        c3 = stream >> _SH32
        k0 = seed & _MASK32
        k1 = seed >> _SH32
        for _ in range(10):
            p0 = _M0 * c0
            p1 = _M1 * c2
            t0 = (p1 >> _SH32) ^ c1 ^ k0
            t1 = p1 & _MASK32
            t2 = (p0 >> _SH32) ^ c3 ^ k1
            t3 = p0 & _MASK32
            c0, c1, c2, c3 = t0, t1, t2, t3
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        if draw & np.uint64(1) == np.uint64(0):
            hi = c0 >> np.uint64(5)
            lo = c1 >> np.uint64(6)
        else:
            hi = c2 >> np.uint64(5)
            lo = c3 >> np.uint64(6)
        return (np.float64(hi) * np.float64(1 << 26) + np.float64(lo)) * _INV53

    @njit(cache=True, nogil=True, inline="always")
    def _nb_bisect(cdf, u):
        lo = 0
        hi = cdf.size
        while lo < hi:
            mid = (lo + hi) >> 1
            if cdf[mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        if lo >= cdf.size:
            lo = cdf.size - 1
        return lo

    @njit(cache=True, nogil=True)
    def _nb_chains_dense(tcdf, state_cdf, seed, streams, k):
        out = np.empty(streams.size, dtype=np.int64)
        for i in range(streams.size):
            s = streams[i]
            u = _nb_uniform(seed, s, np.uint64(0))
            x = _nb_bisect(state_cdf, u)
            for j in range(k):
                u = _nb_uniform(seed, s, np.uint64(j + 1))
                x = _nb_bisect(tcdf[x], u)
            out[i] = x
        return out

    @njit(cache=True, nogil=True)
    def _nb_chains_tensor(alphas, betas, state_cdf, p_one, product_state, seed, streams, k):
        n = alphas.size
        out = np.empty(streams.size, dtype=np.int64)
        for i in range(streams.size):
            s = streams[i]
            if product_state:
                x = 0
                for q in range(n):
                    u = _nb_uniform(seed, s, np.uint64(q))
                    if u >= 1.0 - p_one[q]:
                        x = (x << 1) | 1
                    else:
                        x = x << 1
                pos = n
            else:
                u = _nb_uniform(seed, s, np.uint64(0))
                x = _nb_bisect(state_cdf, u)
                pos = 1
            for _ in range(k):
                for q in range(n):
                    u = _nb_uniform(seed, s, np.uint64(pos))
                    pos += 1
                    shift = n - 1 - q
                    bit = (x >> shift) & 1
                    rate = alphas[q] if bit == 0 else betas[q]
                    if u < rate:
                        x ^= 1 << shift
            out[i] = x
        return out

    _NB["chains_dense"] = _nb_chains_dense
    _NB["chains_tensor"] = _nb_chains_tensor


# ---------------------------------------------------------------------------
# dispatching entry points


def _as_streams(streams):
    return np.ascontiguousarray(streams, dtype=np.uint64)


def chains_dense(tcdf, state_cdf, seed, streams, k):
    """Final outcomes of length-``k`` chains through a dense noise matrix.

    ``tcdf``: row ``x`` holds the cdf of noise column ``x``.
    ``state_cdf``: cdf of the input distribution.
    """
    streams = _as_streams(streams)
    seed = np.uint64(int(seed) & _rng._MASK64)
    if _BACKEND == "numba":
        return _NB["chains_dense"](tcdf, state_cdf, seed, streams, k)
    return _np_chains_dense(tcdf, state_cdf, seed, streams, k)


def chains_tensor(alphas, betas, state_cdf, p_one, product_state, seed, streams, k):
    """Final outcomes of length-``k`` chains through per-qubit flip noise.

    The input distribution is either ``state_cdf`` (dense) or per-qubit
    one-probabilities ``p_one`` when ``product_state`` is true.
    """
    streams = _as_streams(streams)
    seed = np.uint64(int(seed) & _rng._MASK64)
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    state_cdf = np.ascontiguousarray(state_cdf, dtype=np.float64)
    p_one = np.ascontiguousarray(p_one, dtype=np.float64)
    if _BACKEND == "numba":
        return _NB["chains_tensor"](alphas, betas, state_cdf, p_one, product_state, seed, streams, k)
    return _np_chains_tensor(alphas, betas, state_cdf, p_one, product_state, seed, streams, k)
