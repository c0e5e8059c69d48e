"""Minor embedding of coupling graphs into Chimera hardware.

Each logical variable becomes a chain: a connected set of physical qubits
acting as one spin.  Chains must be pairwise disjoint and every logical
coupling must be carried by at least one physical edge between the two
chains.

The search is a chain-growth heuristic.  Nodes are placed one at a time at
the root minimizing the summed weighted shortest-path distance to the
chains of already-placed neighbors; vertex weights grow linearly with how
many chains already use a qubit (kept linear so congested pockets retain a
downhill escape gradient), and a root is never allowed inside a neighbor's
chain, which would fake adjacency.  Rip-up-and-reroute sweeps with rising
penalties then clear shared qubits; once disjoint, strict improvement
sweeps and a trim pass shorten the chains.  Seeded restarts keep the best
(fewest physical qubits) valid embedding.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ._rng import derive_seed, mix64, uniform
from .chimera import HardwareGraph
from .spin import IsingModel, normalize

_BASE_PENALTY = 128.0  # sharing one qubit outweighs any detour length
_MAX_USAGE = 8  # beyond this a vertex is forbidden outright
_INF = float("inf")


class EmbeddingNotFound(RuntimeError):
    """No valid embedding within the restart budget."""


@dataclass(frozen=True)
class Embedding:
    """Map logical variable -> chain of physical qubit ids."""

    chains: dict[int, frozenset[int]]

    @property
    def n_physical(self) -> int:
        return sum(len(c) for c in self.chains.values())

    def all_qubits(self) -> frozenset[int]:
        out: set[int] = set()
        for c in self.chains.values():
            out.update(c)
        return frozenset(out)


def check_embedding(
    n_logical: int,
    edges,
    hw: HardwareGraph,
    emb: Embedding,
) -> list[str]:
    """Validity violations (empty list means the embedding is valid)."""
    problems = []
    seen: dict[int, int] = {}
    for u in range(n_logical):
        chain = emb.chains.get(u)
        if not chain:
            problems.append(f"variable {u} has no chain")
            continue
        for q in chain:
            if q in hw.broken or q not in hw.adjacency:
                problems.append(f"chain {u} uses unusable qubit {q}")
            if q in seen:
                problems.append(f"qubit {q} shared by chains {seen[q]} and {u}")
            seen[q] = u
        if not _connected(chain, hw):
            problems.append(f"chain {u} is not connected")
    for u, v in edges:
        cu = emb.chains.get(u, frozenset())
        cv = emb.chains.get(v, frozenset())
        if not any(hw.has_edge(p, q) for p in cu for q in cv):
            problems.append(f"logical edge ({u}, {v}) has no physical edge")
    return problems


def _connected(chain, hw) -> bool:
    chain = set(chain)
    if not chain:
        return False
    stack = [next(iter(chain))]
    seen = {stack[0]}
    while stack:
        q = stack.pop()
        for nb in hw.adjacency.get(q, ()):
            if nb in chain and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen == chain


class _Workspace:
    """Flat, qubit-id-indexed state for one embedding attempt."""

    def __init__(self, n_logical, adj, hw, key):
        self.n = n_logical
        self.adj = adj
        self.hw = hw
        self.key = key
        self.total = hw.total_qubits
        self.nbrs: list[tuple[int, ...]] = [
            hw.adjacency.get(q, ()) for q in range(self.total)
        ]
        self.usable = sorted(hw.adjacency)
        self.usage = [0] * self.total
        self.broken = [q in hw.broken for q in range(self.total)]
        self.chains: dict[int, set[int]] = {}
        self.salt = 0
        # rotating root tie-break jitters; without them ties collapse onto
        # low qubit ids and deadlocked pairs re-resolve identically forever
        self.jitters = [
            [1e-9 * uniform(key, k * self.total + q) for q in range(self.total)]
            for k in range(16)
        ]

    def rand(self, tag: int) -> float:
        self.salt += 1
        return uniform(self.key, 16 * self.total + self.salt * 2 + tag)

    def jitter(self) -> list[float]:
        self.salt += 1
        return self.jitters[self.salt % 16]

    def weights(self, mult: float) -> list[float]:
        """Per-qubit entry cost at the given sharing multiplier."""
        w = [_INF] * self.total
        for q in self.usable:
            u = self.usage[q]
            if u >= _MAX_USAGE:
                continue
            w[q] = 1.0 if u == 0 else _BASE_PENALTY * u * mult
        return w

    def add(self, u: int, chain: set[int]) -> None:
        self.chains[u] = chain
        for q in chain:
            self.usage[q] += 1

    def remove(self, u: int) -> None:
        for q in self.chains[u]:
            self.usage[q] -= 1
        del self.chains[u]

    def overfull(self) -> bool:
        return any(self.usage[q] > 1 for q in self.usable)

    def total_length(self) -> int:
        return sum(len(c) for c in self.chains.values())


def _dijkstra(ws: _Workspace, sources, w: list[float]):
    """Vertex-weighted distances from a chain (sources enter free)."""
    dist = [_INF] * ws.total
    pred = [-1] * ws.total
    heap = []
    for q in sources:
        dist[q] = 0.0
        heap.append((0.0, q))
    heapq.heapify(heap)
    push = heapq.heappush
    pop = heapq.heappop
    nbrs = ws.nbrs
    while heap:
        d, q = pop(heap)
        if d > dist[q]:
            continue
        for nb in nbrs[q]:
            wn = w[nb]
            if wn == _INF:
                continue
            nd = d + wn
            if nd < dist[nb]:
                dist[nb] = nd
                pred[nb] = q
                push(heap, (nd, nb))
    return dist, pred


def _place_node(ws: _Workspace, u: int, mult: float):
    """(Re)route one logical node against the currently placed chains."""
    placed = [v for v in ws.adj[u] if v in ws.chains]
    w = ws.weights(mult)
    if not placed:
        free = [q for q in ws.usable if ws.usage[q] == 0]
        pool = free or [q for q in ws.usable if ws.usage[q] < _MAX_USAGE]
        if not pool:
            return None
        return {pool[int(ws.rand(0) * len(pool)) % len(pool)]}
    dists = []
    preds = []
    forbidden = set()  # a root inside a neighbor chain would fake adjacency
    for v in placed:
        dist, pred = _dijkstra(ws, ws.chains[v], w)
        dists.append(dist)
        preds.append(pred)
        forbidden.update(ws.chains[v])
    best_root = -1
    best_cost = _INF
    jitter = ws.jitter()
    for q in ws.usable:
        wq = w[q]
        if wq == _INF or q in forbidden:
            continue
        total = 0.0
        paid = 0
        for dist in dists:
            d = dist[q]
            if d == _INF:
                total = _INF
                break
            total += d
            if d > 0.0:
                paid += 1
        if total == _INF:
            continue
        # the root's entry weight must be paid exactly once overall
        total += wq * (1 - paid) + jitter[q]
        if total < best_cost:
            best_cost = total
            best_root = q
    if best_root < 0:
        return None
    chain = {best_root}
    for v, pred in zip(placed, preds):
        target = ws.chains[v]
        q = best_root
        while q not in target:
            chain.add(q)
            q = pred[q]
            if q < 0:
                break
    return chain


def _trim_chain(ws: _Workspace, u: int) -> set[int]:
    """Drop chain vertices not needed for connectivity or edge coverage."""
    chain = set(ws.chains[u])
    hw = ws.hw
    changed = True
    while changed and len(chain) > 1:
        changed = False
        for q in sorted(chain):
            rest = chain - {q}
            if not _connected(rest, hw):
                continue
            ok = True
            for v in ws.adj[u]:
                if v not in ws.chains:
                    continue
                cv = ws.chains[v]
                if not any(nb in cv for p in rest for nb in ws.nbrs[p]):
                    ok = False
                    break
            if ok:
                chain = rest
                changed = True
                break
    return chain


def _trim_all(ws: _Workspace, order) -> None:
    for u in order:
        new = _trim_chain(ws, u)
        if new != ws.chains[u]:
            ws.remove(u)
            ws.add(u, new)


def _shuffled(ws: _Workspace, order):
    out = list(order)
    for i in range(len(out) - 1, 0, -1):
        j = int(ws.rand(1) * (i + 1)) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def _attempt(n, adj, hw, key, max_sweeps):
    ws = _Workspace(n, adj, hw, key)
    order = sorted(range(n), key=lambda u: (-len(adj[u]), u))

    for u in order:
        chain = _place_node(ws, u, 1.0)
        if chain is None:
            return None
        ws.add(u, chain)

    # rip-up-and-reroute in a fresh random order each sweep; sharing gets
    # steadily more expensive and trimming keeps corridors open
    prev_count = None
    for sweep in range(max_sweeps):
        if not ws.overfull():
            break
        mult = 4.0 ** min(sweep + 1, 16)
        for u in _shuffled(ws, order):
            ws.remove(u)
            chain = _place_node(ws, u, mult)
            if chain is None:
                return None
            ws.add(u, chain)
        _trim_all(ws, order)
        shared = [q for q in ws.usable if ws.usage[q] > 1]
        if shared and prev_count is not None and len(shared) >= prev_count:
            # stalled: tear out every chain touching the contested qubits
            # at once so they re-route against a clean background
            shared_set = set(shared)
            victims = [u for u in order if ws.chains[u] & shared_set]
            for u in victims:
                ws.remove(u)
            for u in _shuffled(ws, victims):
                chain = _place_node(ws, u, mult)
                if chain is None:
                    return None
                ws.add(u, chain)
        prev_count = len([q for q in ws.usable if ws.usage[q] > 1])
    if ws.overfull():
        return None

    # strict improvement to a fixpoint: re-route with occupied qubits
    # forbidden, keep the shorter chain
    for _ in range(6):
        before = ws.total_length()
        for u in order:
            old = ws.chains[u]
            ws.remove(u)
            chain = _place_node(ws, u, _INF)
            if chain is None or len(chain) > len(old):
                chain = old
            ws.add(u, chain)
        _trim_all(ws, order)
        if ws.total_length() >= before:
            break
    return {u: frozenset(c) for u, c in ws.chains.items()}


def find_embedding(
    n_logical: int,
    edges,
    hw: HardwareGraph,
    seed: int = 0,
    restarts: int = 64,
    max_sweeps: int = 12,
    target_successes: int = 4,
) -> Embedding:
    """Best valid embedding over up to ``restarts`` seeded attempts.

    Deterministic for a fixed seed.  Attempts stop early once
    ``target_successes`` valid embeddings have been collected; the one with
    the fewest physical qubits (ties to the earliest attempt) wins.  Raises
    :class:`EmbeddingNotFound` when every attempt fails.
    """
    edges = sorted({(min(u, v), max(u, v)) for u, v in edges if u != v})
    adj: dict[int, set[int]] = {u: set() for u in range(n_logical)}
    for u, v in edges:
        if not (0 <= u < n_logical and 0 <= v < n_logical):
            raise ValueError(f"edge ({u}, {v}) outside 0..{n_logical - 1}")
        adj[u].add(v)
        adj[v].add(u)
    best = None
    best_size = None
    successes = 0
    for attempt in range(restarts):
        key = mix64(derive_seed(seed, "embed-attempt", attempt))
        chains = _attempt(n_logical, adj, hw, key, max_sweeps)
        if chains is None:
            continue
        emb = Embedding(chains)
        if check_embedding(n_logical, edges, hw, emb):
            continue
        successes += 1
        size = emb.n_physical
        if best_size is None or size < best_size:
            best = emb
            best_size = size
        if successes >= target_successes:
            break
    if best is None:
        raise EmbeddingNotFound(
            f"no valid embedding for {n_logical} variables within {restarts} restarts"
        )
    return best


@dataclass
class EmbeddedModel:
    """Physical-qubit model produced by :func:`embed_ising`.

    ``model`` lives over compact slots 0..n_slots-1; ``qubits[slot]`` is the
    physical id.  Energies satisfy, for chain-intact states,
    ``E_physical(s) = scale * E_logical(decoded) + chain_offset``.
    """

    model: IsingModel
    qubits: tuple[int, ...]
    embedding: Embedding
    scale: float
    chain_strength: float
    chain_offset: float

    def slot_of(self, qubit: int) -> int:
        return self.qubits.index(qubit)


def default_chain_strength(m: IsingModel) -> float:
    """1 + max(|h|/2, max |J|): strong enough to keep chains aligned here."""
    max_h = float(np.max(np.abs(m.h))) if m.n else 0.0
    max_j = max((abs(c) for c in m.couplings.values()), default=0.0)
    return 1.0 + max(max_h / 2.0, max_j)


def embed_ising(
    m: IsingModel,
    emb: Embedding,
    hw: HardwareGraph,
    chain_strength: float | None = None,
) -> EmbeddedModel:
    """Spread a logical model over an embedding.

    Fields split uniformly across chains; each logical coupling rides on
    exactly one connecting physical edge (the lexicographically smallest);
    every intra-chain edge gets ferromagnetic ``-chain_strength``.  The
    result is normalized into hardware ranges.
    """
    cs = default_chain_strength(m) if chain_strength is None else chain_strength
    if cs <= 0:
        raise ValueError("chain strength must be positive")
    qubits = tuple(sorted(emb.all_qubits()))
    slot = {q: k for k, q in enumerate(qubits)}
    h = np.zeros(len(qubits), np.float64)
    couplings: dict[tuple[int, int], float] = {}

    for u in range(m.n):
        chain = emb.chains.get(u)
        if not chain:
            raise ValueError(f"embedding lacks a chain for variable {u}")
        share = float(m.h[u]) / len(chain)
        for q in chain:
            h[slot[q]] += share

    for (u, v), c in m.couplings.items():
        pairs = [
            (p, q)
            for p in emb.chains[u]
            for q in emb.chains[v]
            if hw.has_edge(p, q)
        ]
        if not pairs:
            raise ValueError(f"no physical edge for logical coupling ({u}, {v})")
        p, q = min(tuple(sorted(pq)) for pq in pairs)
        i, j = sorted((slot[p], slot[q]))
        couplings[(i, j)] = couplings.get((i, j), 0.0) + c

    n_intra = 0
    for u, chain in emb.chains.items():
        members = sorted(chain)
        for a_idx, p in enumerate(members):
            for q in members[a_idx + 1 :]:
                if hw.has_edge(p, q):
                    i, j = sorted((slot[p], slot[q]))
                    couplings[(i, j)] = couplings.get((i, j), 0.0) - cs
                    n_intra += 1

    raw = IsingModel(h, couplings, m.offset, None)
    scaled, scale = normalize(raw)
    return EmbeddedModel(
        model=scaled,
        qubits=qubits,
        embedding=emb,
        scale=scale,
        chain_strength=cs,
        chain_offset=-cs * n_intra * scale,
    )


def decode_samples(
    states: np.ndarray,
    embedded: EmbeddedModel,
    n_logical: int,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Majority-vote chain decode of physical spin rows.

    Returns (decoded (m, n_logical) spins, per-row broken-chain fraction).
    Exact vote ties flip a seeded coin keyed by (row, variable), so decoding
    is deterministic yet unbiased.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.int8))
    if states.shape[1] != len(embedded.qubits):
        raise ValueError(
            f"samples have {states.shape[1]} spins, embedding uses {len(embedded.qubits)}"
        )
    slot = {q: k for k, q in enumerate(embedded.qubits)}
    key = mix64(derive_seed(seed, "chain-tie"))
    m = states.shape[0]
    decoded = np.empty((m, n_logical), np.int8)
    broken = np.zeros(m, np.float64)
    for u in range(n_logical):
        slots = [slot[q] for q in sorted(embedded.embedding.chains[u])]
        votes = states[:, slots].sum(axis=1, dtype=np.int64)
        sign = np.sign(votes).astype(np.int8)
        ties = sign == 0
        if ties.any():
            for row in np.nonzero(ties)[0]:
                sign[row] = 1 if uniform(key, row * n_logical + u) < 0.5 else -1
        decoded[:, u] = sign
        broken += (np.abs(votes) != len(slots)).astype(np.float64)
    broken /= max(n_logical, 1)
    return decoded, broken
