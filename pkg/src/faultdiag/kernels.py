"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Two kernels dominate runtime: the Metropolis annealing sweeps of the
sampler and the exhaustive state scan of the brute-force oracle.  Both ship
in two semantically identical implementations:

* ``numba`` — @njit per-read loops (the default whenever numba imports);
* ``numpy`` — vectorized across reads / enumeration chunks.

Select with the environment variable ``FAULTDIAG_BACKEND=numba|numpy``
(read at call time).  The annealer draws its uniforms from a counter-based
splitmix64 stream, a pure function of (seed, read, sweep, spin), so both
backends make identical accept/reject decisions and return identical
samples for a fixed seed.  ``benchmarks/bench_backends.py`` compares them.

Metropolis acceptance skips the exponential whenever ``beta * dE >= 37``:
uniforms are multiples of 2**-53 > exp(-37), so such moves can never be
accepted, and both backends apply the same cutoff.
"""

from __future__ import annotations

import math
import os

import numpy as np

from ._rng import U53, mix64, mix64_array

try:  # pragma: no cover - exercised implicitly by backend selection
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_ENV_VAR = "FAULTDIAG_BACKEND"
_REJECT_CUTOFF = 37.0  # exp(-37) < 2**-53, the smallest nonzero uniform


def active_backend() -> str:
    """Backend selected by $FAULTDIAG_BACKEND, defaulting to numba."""
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice == "":
        return "numba" if HAVE_NUMBA else "numpy"
    if choice not in ("numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return choice


# ---------------------------------------------------------------------------
# Simulated-annealing sweeps
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _U64 = np.uint64

    @numba.njit(cache=True, inline="always")
    def _nb_mix64(z):
        z = z + _U64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
        return z ^ (z >> _U64(31))

    @numba.njit(cache=True, parallel=True)
    def _nb_anneal(h, indptr, indices, data, betas, seed, reads, out):
        # reads are fully independent (counter-based RNG, disjoint output
        # rows), so the parallel schedule cannot change the result
        n = h.shape[0]
        sweeps = betas.shape[0]
        for r in numba.prange(reads):
            key = _nb_mix64(_nb_mix64(_U64(seed)) + _U64(r))
            s = np.empty(n, np.int8)
            for i in range(n):
                u = float(_nb_mix64(key + _U64(i)) >> _U64(11)) * U53
                s[i] = 1 if u < 0.5 else -1
            f = np.empty(n, np.float64)
            for i in range(n):
                acc = h[i]
                for p in range(indptr[i], indptr[i + 1]):
                    acc += data[p] * s[indices[p]]
                f[i] = acc
            c = np.int64(n)
            for t in range(sweeps):
                beta = betas[t]
                for i in range(n):
                    dE = -2.0 * s[i] * f[i]
                    flip = False
                    if dE <= 0.0:
                        flip = True
                    else:
                        bde = beta * dE
                        if bde < _REJECT_CUTOFF:
                            u = float(_nb_mix64(key + _U64(c + i)) >> _U64(11)) * U53
                            if u < math.exp(-bde):
                                flip = True
                    if flip:
                        si = np.int8(-s[i])
                        s[i] = si
                        for p in range(indptr[i], indptr[i + 1]):
                            f[indices[p]] += 2.0 * data[p] * si
                c += n
            for i in range(n):
                out[r, i] = s[i]


def _np_anneal(h, indptr, indices, data, betas, seed, reads, out):
    """Vectorized-across-reads twin of the numba kernel.

    Local fields are initialized and updated in the same floating-point
    order as the per-read loops (CSR row order, one fused multiply-add per
    neighbor), so trajectories match the numba backend bit for bit.
    """
    n = h.shape[0]
    keys = mix64_array(
        np.full(reads, mix64(seed), dtype=np.uint64)
        + np.arange(reads, dtype=np.uint64)
    )
    s = np.empty((reads, n), np.int8)
    for i in range(n):
        u = (mix64_array(keys + np.uint64(i)) >> np.uint64(11)).astype(np.float64) * U53
        s[:, i] = np.where(u < 0.5, 1, -1).astype(np.int8)
    f = np.repeat(h[None, :], reads, axis=0)
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            f[:, i] += data[p] * s[:, indices[p]]
    c = np.int64(n)
    for t in range(betas.shape[0]):
        beta = betas[t]
        for i in range(n):
            dE = -2.0 * s[:, i] * f[:, i]
            bde = beta * dE
            u = (
                mix64_array(keys + np.uint64(c + i)) >> np.uint64(11)
            ).astype(np.float64) * U53
            flip = (dE <= 0.0) | (
                (bde < _REJECT_CUTOFF) & (u < np.exp(-np.minimum(bde, _REJECT_CUTOFF)))
            )
            if not flip.any():
                continue
            s[flip, i] = -s[flip, i]
            snew = s[flip, i].astype(np.float64)
            for p in range(indptr[i], indptr[i + 1]):
                f[flip, indices[p]] += 2.0 * data[p] * snew
        c += n
    out[:, :] = s


def anneal_states(
    h: np.ndarray,
    indptr: np.ndarray,
    indices: np.ndarray,
    data: np.ndarray,
    betas: np.ndarray,
    seed: int,
    reads: int,
) -> np.ndarray:
    """Run ``reads`` independent annealing restarts; returns (reads, n) spins.

    The coupling matrix arrives in symmetric CSR form (both (i, j) and
    (j, i) present).  Identical output for either backend.
    """
    n = int(h.shape[0])
    out = np.empty((reads, n), np.int8)
    if active_backend() == "numba":
        _nb_anneal(
            h.astype(np.float64),
            indptr.astype(np.int64),
            indices.astype(np.int64),
            data.astype(np.float64),
            betas.astype(np.float64),
            np.uint64(seed & (2**64 - 1)),
            reads,
            out,
        )
    else:
        _np_anneal(
            h.astype(np.float64),
            indptr.astype(np.int64),
            indices.astype(np.int64),
            data.astype(np.float64),
            betas.astype(np.float64),
            seed & (2**64 - 1),
            reads,
            out,
        )
    return out


def csr_from_couplings(n: int, couplings: dict[tuple[int, int], float]):
    """Symmetric CSR arrays (indptr, indices, data) from i<j couplings."""
    rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), c in couplings.items():
        rows[i].append((j, c))
        rows[j].append((i, c))
    indptr = np.zeros(n + 1, np.int64)
    indices = []
    data = []
    for i in range(n):
        for j, c in sorted(rows[i]):
            indices.append(j)
            data.append(c)
        indptr[i + 1] = len(indices)
    return (
        indptr,
        np.array(indices, np.int64),
        np.array(data, np.float64),
    )


# ---------------------------------------------------------------------------
# Brute-force state scan
# ---------------------------------------------------------------------------

_CAPTURE_TOL = 1e-6  # over-collect near the running minimum, then re-evaluate


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _nb_scan_min(qsym, diag):
        """Gray-code scan; returns the (approximate) minimum energy."""
        n = diag.shape[0]
        q = np.zeros(n, np.int8)
        e = 0.0
        best = 0.0
        for step in range(1, 1 << n):
            s = step
            i = 0
            while s & 1 == 0:
                s >>= 1
                i += 1
            acc = diag[i]
            for j in range(n):
                acc += qsym[i, j] * q[j]
            if q[i] == 0:
                e += acc
                q[i] = 1
            else:
                e -= acc
                q[i] = 0
            if e < best:
                best = e
        return best

    @numba.njit(cache=True)
    def _nb_scan_collect(qsym, diag, cutoff):
        """Second pass: bit patterns of all states with energy <= cutoff."""
        n = diag.shape[0]
        q = np.zeros(n, np.int8)
        e = 0.0
        codes = [np.uint64(0) for _ in range(0)]
        if e <= cutoff:
            codes.append(np.uint64(0))
        code = np.uint64(0)
        for step in range(1, 1 << n):
            s = step
            i = 0
            while s & 1 == 0:
                s >>= 1
                i += 1
            acc = diag[i]
            for j in range(n):
                acc += qsym[i, j] * q[j]
            if q[i] == 0:
                e += acc
                q[i] = 1
            else:
                e -= acc
                q[i] = 0
            code = code ^ (np.uint64(1) << np.uint64(i))
            if e <= cutoff:
                codes.append(code)
        out = np.empty(len(codes), np.uint64)
        for k in range(len(codes)):
            out[k] = codes[k]
        return out


def _np_scan(upper, diag, chunk_bits=16):
    """Chunked enumeration; returns (approx min, codes within capture tol)."""
    n = diag.shape[0]
    total = 1 << n
    shifts = np.arange(n, dtype=np.uint64)
    chunk = 1 << min(chunk_bits, n)
    best = np.inf
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        bits = ((idx[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float64)
        e = ((bits @ upper) * bits).sum(axis=1)
        m = float(e.min())
        if m < best:
            best = m
    collected = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        bits = ((idx[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float64)
        e = ((bits @ upper) * bits).sum(axis=1)
        collected.append(idx[e <= best + _CAPTURE_TOL])
    return best, np.concatenate(collected)


def scan_qubo_minimum(
    upper: np.ndarray, offset: float, tol: float = 1e-9
) -> tuple[float, np.ndarray]:
    """Exact minimum and all minimizers of a dense upper-triangular QUBO.

    The scan passes use incrementally updated energies (numba) or chunked
    direct evaluation (numpy); collected candidates are then re-evaluated in
    one shared numpy pass, so both backends report identical results.
    Distinct energy levels closer than 1e-6 are not distinguished.
    """
    n = upper.shape[0]
    if n > 63:
        raise ValueError("state scan limited to 63 variables")
    diag = np.ascontiguousarray(np.diag(upper).astype(np.float64))
    if active_backend() == "numba":
        offdiag = np.ascontiguousarray(upper - np.diag(diag))
        qsym = offdiag + offdiag.T
        approx = _nb_scan_min(qsym, diag)
        codes = _nb_scan_collect(qsym, diag, approx + _CAPTURE_TOL)
    else:
        approx, codes = _np_scan(upper.astype(np.float64), diag)
    codes = np.sort(codes.astype(np.uint64))
    shifts = np.arange(n, dtype=np.uint64)
    bits = ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float64)
    exact = ((bits @ upper.astype(np.float64)) * bits).sum(axis=1)
    emin = float(exact.min())
    keep = exact <= emin + tol
    return emin + offset, bits[keep].astype(np.int8)
