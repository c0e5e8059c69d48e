"""Ising-model form of the quadratic cost and gauge/range utilities.

The bit and spin pictures are linked by ``q = (s + 1) / 2``; energies agree
exactly under the substitution.  Spin-reversal gauges flip the sign frame of
chosen spins (``h_i -> a_i h_i``, ``J_ij -> a_i a_j J_ij``) without changing
the energy landscape, and range normalization scales the whole model into
the programmable windows ``|h| <= 2``, ``|J| <= 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import VariableRegistry
from .quadratize import Qubo


@dataclass
class IsingModel:
    """``offset + h . s + sum_{i<j} J[i,j] s_i s_j`` over spins ``s = +/-1``."""

    h: np.ndarray
    couplings: dict[tuple[int, int], float]
    offset: float = 0.0
    registry: VariableRegistry | None = None

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=np.float64)
        for i, j in self.couplings:
            if not (0 <= i < j < self.n):
                raise ValueError(f"coupling key ({i}, {j}) must satisfy 0 <= i < j < n")

    @property
    def n(self) -> int:
        return int(self.h.shape[0])

    def max_coefficient(self) -> float:
        mags = [float(np.max(np.abs(self.h)))] if self.n else []
        mags.extend(abs(c) for c in self.couplings.values())
        return max(mags, default=0.0)

    def energy(self, spins) -> float:
        return ising_energy(self, spins)

    def energies(self, states: np.ndarray) -> np.ndarray:
        """Vectorized energy of a batch of spin rows."""
        states = np.asarray(states, dtype=np.float64)
        out = states @ self.h + self.offset
        for (i, j), c in self.couplings.items():
            out += c * states[:, i] * states[:, j]
        return out


@dataclass(frozen=True)
class Gauge:
    """Sign frame for a spin model: one +/-1 entry per spin."""

    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(a not in (-1, 1) for a in self.signs):
            raise ValueError("gauge entries must be +1 or -1")

    def __len__(self) -> int:
        return len(self.signs)

    def as_array(self) -> np.ndarray:
        return np.array(self.signs, dtype=np.int8)


def identity_gauge(n: int) -> Gauge:
    return Gauge((1,) * n)


def random_gauge(n: int, seed: int) -> Gauge:
    """Independent fair +/-1 entries from a seeded generator."""
    rng = np.random.default_rng(seed)
    return Gauge(tuple(int(2 * b - 1) for b in rng.integers(0, 2, size=n)))


def qubo_to_ising(q: Qubo) -> IsingModel:
    """Exact change of variables ``q_i = (s_i + 1) / 2``."""
    h = np.zeros(q.n, dtype=np.float64)
    couplings: dict[tuple[int, int], float] = {}
    offset = q.offset
    for (i, j), c in q.terms.items():
        if i == j:
            h[i] += c / 2.0
            offset += c / 2.0
        else:
            couplings[(i, j)] = couplings.get((i, j), 0.0) + c / 4.0
            h[i] += c / 4.0
            h[j] += c / 4.0
            offset += c / 4.0
    couplings = {k: v for k, v in couplings.items() if v != 0.0}
    return IsingModel(h, couplings, offset, q.registry)


def ising_to_qubo(m: IsingModel) -> Qubo:
    """Inverse change of variables ``s_i = 2 q_i - 1``."""
    terms: dict[tuple[int, int], float] = {}
    offset = m.offset

    def bump(i, j, c):
        if c != 0.0:
            terms[(i, j)] = terms.get((i, j), 0.0) + c

    for i in range(m.n):
        hi = float(m.h[i])
        bump(i, i, 2.0 * hi)
        offset -= hi
    for (i, j), c in m.couplings.items():
        bump(i, j, 4.0 * c)
        bump(i, i, -2.0 * c)
        bump(j, j, -2.0 * c)
        offset += c
    terms = {k: v for k, v in terms.items() if v != 0.0}
    registry = m.registry or VariableRegistry(m.n, 0, 0)
    return Qubo(m.n, terms, offset, registry)


def apply_gauge(m: IsingModel, g: Gauge) -> IsingModel:
    """Transform into the gauge frame: ``h_i -> a_i h_i``, ``J -> a_i a_j J``."""
    if len(g) != m.n:
        raise ValueError(f"gauge has {len(g)} entries, model has {m.n} spins")
    a = g.signs
    h = m.h * np.array(a, dtype=np.float64)
    couplings = {(i, j): a[i] * a[j] * c for (i, j), c in m.couplings.items()}
    return IsingModel(h, couplings, m.offset, m.registry)


def ungauge_sample(spins: np.ndarray, g: Gauge) -> np.ndarray:
    """Map spins sampled in the gauge frame back to the original frame."""
    spins = np.asarray(spins)
    if spins.shape[-1] != len(g):
        raise ValueError(f"sample has {spins.shape[-1]} spins, gauge has {len(g)}")
    return (spins * g.as_array()).astype(spins.dtype)


def normalize(m: IsingModel) -> tuple[IsingModel, float]:
    """Uniformly scale into ``|h| <= 2``, ``|J| <= 1``; returns (model, scale).

    A single positive scale factor preserves the minimizer set; reported
    energies recover the original ones after dividing by the scale.
    """
    max_h = float(np.max(np.abs(m.h))) if m.n else 0.0
    max_j = max((abs(c) for c in m.couplings.values()), default=0.0)
    scale = 1.0
    if max_h > 0:
        scale = min(scale, 2.0 / max_h)
    if max_j > 0:
        scale = min(scale, 1.0 / max_j)
    scaled = IsingModel(
        m.h * scale,
        {k: v * scale for k, v in m.couplings.items()},
        m.offset * scale,
        m.registry,
    )
    return scaled, scale


def ising_energy(m: IsingModel, spins) -> float:
    """Exact energy of one spin configuration, offset included."""
    spins = np.asarray(spins)
    if spins.shape != (m.n,):
        raise ValueError(f"spin vector has shape {spins.shape}, expected ({m.n},)")
    if not np.all(np.abs(spins) == 1):
        raise ValueError("spin entries must be +1 or -1")
    s = spins.astype(np.float64)
    total = m.offset + float(m.h @ s)
    for (i, j), c in m.couplings.items():
        total += c * s[i] * s[j]
    return total


def spins_to_bits(spins: np.ndarray) -> np.ndarray:
    """``q = (s + 1) / 2`` elementwise, preserving batch shape."""
    spins = np.asarray(spins)
    return ((spins + 1) // 2).astype(np.int8)


def bits_to_spins(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits)
    return (2 * bits - 1).astype(np.int8)
