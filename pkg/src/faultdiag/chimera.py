"""Chimera hardware graph: a grid of complete-bipartite unit cells.

An (M, N, L) Chimera graph has M x N unit cells of 2L qubits each.  Within
a cell every left-partition qubit couples to every right-partition qubit.
Left-partition qubits also couple to the same-position qubit in the cells
above and below; right-partition qubits to the left and right.  Maximum
degree is therefore L + 2 (6 for the standard L = 4).

Qubit ids are linear: ``((row * N + col) * 2 + partition) * L + k``.
A broken-qubit mask removes qubits (and their edges) to model a device
with unusable sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property


@dataclass(frozen=True)
class HardwareGraph:
    rows: int = 8
    cols: int = 8
    shore: int = 4
    broken: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1 or self.shore < 1:
            raise ValueError("hardware dimensions must be positive")
        for q in self.broken:
            if not 0 <= q < self.total_qubits:
                raise ValueError(f"broken qubit {q} out of range")

    @property
    def total_qubits(self) -> int:
        return self.rows * self.cols * 2 * self.shore

    @property
    def usable_qubits(self) -> int:
        return self.total_qubits - len(self.broken)

    def qubit_id(self, row: int, col: int, partition: int, k: int) -> int:
        return ((row * self.cols + col) * 2 + partition) * self.shore + k

    def coordinates(self, q: int) -> tuple[int, int, int, int]:
        k = q % self.shore
        q //= self.shore
        partition = q % 2
        q //= 2
        return q // self.cols, q % self.cols, partition, k

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        """Neighbor lists over usable qubits only."""
        adj: dict[int, set[int]] = {
            q: set() for q in range(self.total_qubits) if q not in self.broken
        }
        L = self.shore
        for q in adj:
            r, c, p, k = self.coordinates(q)
            if p == 0:
                for k2 in range(L):
                    other = self.qubit_id(r, c, 1, k2)
                    if other in adj:
                        adj[q].add(other)
                        adj[other].add(q)
                if r + 1 < self.rows:
                    other = self.qubit_id(r + 1, c, 0, k)
                    if other in adj:
                        adj[q].add(other)
                        adj[other].add(q)
            else:
                if c + 1 < self.cols:
                    other = self.qubit_id(r, c + 1, 1, k)
                    if other in adj:
                        adj[q].add(other)
                        adj[other].add(q)
        return {q: tuple(sorted(n)) for q, n in adj.items()}

    def neighbors(self, q: int) -> tuple[int, ...]:
        return self.adjacency[q]

    def has_edge(self, p: int, q: int) -> bool:
        return q in self.adjacency.get(p, ())

    def edge_count(self) -> int:
        return sum(len(n) for n in self.adjacency.values()) // 2


def build_chimera(
    rows: int = 8, cols: int = 8, shore: int = 4, broken=()
) -> HardwareGraph:
    """Construct a Chimera graph; broken qubits lose all their edges."""
    return HardwareGraph(rows, cols, shore, frozenset(broken))


# Illustrative 3-qubit mask for 509-usable-qubit runs on the 8x8 graph; real
# devices publish their own yield map, so this is configuration, not fact.
SAMPLE_BROKEN_MASK = (72, 237, 410)
