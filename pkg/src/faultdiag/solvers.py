"""Exact oracles and the annealing-style sampler.

Three solution routes with increasing speed and decreasing generality:

* :func:`brute_force_minimize` — exhaustive scan of every assignment, the
  ground-truth oracle for any model up to 26 variables;
* :func:`tree_dp_diagnose` — linear-time dynamic program over the CB tree,
  exact for the diagnosis problem itself (minimum fault count, number of
  distinct minimal diagnoses, one witness);
* :func:`simulated_anneal` — Metropolis annealer over a geometric inverse
  temperature schedule, standing in for a physical annealer.

:func:`diagnose` chains compile -> convert -> sample -> decode -> rank and
cross-checks the sampled optimum against the dynamic program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .energy import PenaltyParams, is_consistent, make_registry
from .network import FaultSet, Observation, PowerNetwork, check_observation
from .quadratize import Qubo, compile_instance
from .spin import IsingModel, ising_to_qubo, qubo_to_ising, spins_to_bits

BRUTE_FORCE_LIMIT = 26


@dataclass
class SampleSet:
    """Aggregated sampler output: unique states with occurrence counts.

    Records are sorted by (energy, lexicographic state); energies are exact
    re-evaluations under the sampled model.
    """

    states: np.ndarray  # (m, n) int8 spins
    energies: np.ndarray  # (m,) float64
    counts: np.ndarray  # (m,) int64
    n_reads: int
    seed: int
    sweeps: int
    beta_range: tuple[float, float]

    def __len__(self) -> int:
        return len(self.energies)

    def min_energy(self) -> float:
        return float(self.energies.min())

    def occurrences_at(self, energy: float, tol: float = 1e-9) -> int:
        """Total reads whose energy lies within ``tol`` of ``energy``."""
        return int(self.counts[np.abs(self.energies - energy) <= tol].sum())


@dataclass(frozen=True)
class Candidate:
    """One consistent diagnosis extracted from the samples."""

    faults: FaultSet
    n_faults: int
    occurrences: int
    energy: float


@dataclass
class DiagnosisReport:
    """Ranked diagnoses plus the oracle cross-check."""

    candidates: list[Candidate]
    min_faults: int | None
    n_minimal: int
    oracle_min_faults: int
    oracle_multiplicity: int
    agrees: bool
    n_reads: int
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DpResult:
    min_faults: int
    multiplicity: int
    witness: FaultSet
    min_cost: float = 0.0


def _dense_upper(model: Qubo) -> np.ndarray:
    upper = np.zeros((model.n, model.n), np.float64)
    for (i, j), c in model.terms.items():
        upper[i, j] += c
    return upper


def brute_force_minimize(model, tol: float = 1e-9):
    """Exhaustive global minimum of a Qubo or IsingModel.

    Returns ``(min_energy, minimizers)`` with the complete minimizer set as
    an array of rows (bits for a Qubo, spins for an Ising model), sorted by
    their bit patterns.  Limited to 26 variables.
    """
    if isinstance(model, IsingModel):
        qubo = ising_to_qubo(model)
        if qubo.n > BRUTE_FORCE_LIMIT:
            raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} variables")
        emin, bits = kernels.scan_qubo_minimum(_dense_upper(qubo), qubo.offset, tol)
        return emin, (2 * bits.astype(np.int8) - 1)
    if model.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} variables")
    return kernels.scan_qubo_minimum(_dense_upper(model), model.offset, tol)


def tree_dp_min_cost(
    net: PowerNetwork,
    obs: Observation,
    cb_cost: float = 1.0,
    sensor_cost: float = 1.0,
) -> float:
    """Minimum weighted fault cost consistent with the readouts.

    Same recursion as :func:`tree_dp_diagnose` with per-component weights;
    equals the global minimum of the full cost polynomial for any penalty
    choice with ``lambda_path`` above both weights.
    """
    check_observation(net, obs)
    blocked, clear, _, _, _ = _dp_tables(net, obs, cb_cost, sensor_cost)
    return clear[1]


def _dp_tables(net, obs, cb_cost, sensor_cost):
    """Bottom-up tables over CBs, indexed by [cb].

    ``blocked[c]``: minimal cost of c's subtree given a fault above c (c is
    then kept healthy — a fault under an existing path fault is strictly
    dominated).  ``clear[c]``: minimal cost given no fault above; choice of
    faulting c (cost + blocked children) or not (clear children).  The
    multiplicity tables count assignments attaining the minima.
    """
    n = net.cb_count
    blocked = [0.0] * (n + 1)
    clear = [0.0] * (n + 1)
    m_blocked = [1] * (n + 1)
    m_clear = [1] * (n + 1)
    choice = [0] * (n + 1)  # at clear-minimum: 1 fault-here, 0 healthy, 2 tie

    for cb in range(n, 0, -1):
        if net.is_leaf(cb):
            li = obs.bits[net.sensor_at(cb) - 1]
            blocked[cb] = sensor_cost if li == 1 else 0.0
            m_blocked[cb] = 1
            fault_here = cb_cost + blocked[cb]
            healthy = sensor_cost if li == 0 else 0.0
        else:
            kids = net.children(cb)
            b_sum = sum(blocked[k] for k in kids)
            c_sum = sum(clear[k] for k in kids)
            mb = mc = 1
            for k in kids:
                mb *= m_blocked[k]
                mc *= m_clear[k]
            blocked[cb] = b_sum
            m_blocked[cb] = mb
            fault_here = cb_cost + b_sum
            healthy = c_sum
        if fault_here < healthy:
            clear[cb] = fault_here
            m_clear[cb] = m_blocked[cb] if net.is_leaf(cb) else _prod_blocked(net, cb, m_blocked)
            choice[cb] = 1
        elif healthy < fault_here:
            clear[cb] = healthy
            m_clear[cb] = 1 if net.is_leaf(cb) else _prod_clear(net, cb, m_clear)
            choice[cb] = 0
        else:
            clear[cb] = healthy
            mh = 1 if net.is_leaf(cb) else _prod_clear(net, cb, m_clear)
            mf = m_blocked[cb] if net.is_leaf(cb) else _prod_blocked(net, cb, m_blocked)
            m_clear[cb] = mh + mf
            choice[cb] = 2
    return blocked, clear, m_blocked, m_clear, choice


def _prod_blocked(net, cb, m_blocked):
    out = 1
    for k in net.children(cb):
        out *= m_blocked[k]
    return out


def _prod_clear(net, cb, m_clear):
    out = 1
    for k in net.children(cb):
        out *= m_clear[k]
    return out


def tree_dp_diagnose(net: PowerNetwork, obs: Observation) -> DpResult:
    """Exact minimum fault count, multiplicity, and one witness diagnosis.

    The recursion never places a fault strictly below another path fault
    (such assignments are dominated), and minimal diagnoses never do either,
    which is what makes the multiplicity count exact.
    """
    check_observation(net, obs)
    blocked, clear, m_blocked, m_clear, choice = _dp_tables(net, obs, 1.0, 1.0)

    # Witness reconstruction; on ties prefer healthy CBs (faults on sensors).
    cbs: list[int] = []
    sensors: list[int] = []

    def walk(cb: int, is_blocked: bool) -> None:
        if net.is_leaf(cb):
            li = obs.bits[net.sensor_at(cb) - 1]
            if is_blocked:
                if li == 1:
                    sensors.append(net.sensor_at(cb))
                return
            fault_here = 1.0 + (1.0 if li == 1 else 0.0)
            healthy = 1.0 if li == 0 else 0.0
            if healthy <= fault_here:
                if li == 0:
                    sensors.append(net.sensor_at(cb))
            else:
                cbs.append(cb)
                if li == 1:
                    sensors.append(net.sensor_at(cb))
            return
        if is_blocked:
            for k in net.children(cb):
                walk(k, True)
            return
        if choice[cb] == 1:
            cbs.append(cb)
            for k in net.children(cb):
                walk(k, True)
        else:
            for k in net.children(cb):
                walk(k, False)

    walk(1, False)
    witness = FaultSet.of(cbs, sensors)
    return DpResult(
        min_faults=int(round(clear[1])),
        multiplicity=m_clear[1],
        witness=witness,
        min_cost=clear[1],
    )


def default_beta_range(model: IsingModel) -> tuple[float, float]:
    """Geometric schedule endpoints: 0.1 up to twice the largest coefficient."""
    top = max(model.max_coefficient(), 0.05)
    return 0.1, 2.0 * top


def simulated_anneal(
    model: IsingModel,
    reads: int,
    sweeps: int = 1000,
    beta0: float | None = None,
    beta1: float | None = None,
    seed: int = 0,
) -> SampleSet:
    """Independent single-spin-flip Metropolis restarts over ``model``.

    Each read anneals a fresh random state through a geometric inverse-
    temperature schedule.  Reproducible for a fixed seed; each read's stream
    depends only on (seed, read index), so results are independent of
    execution order.
    """
    if reads < 1:
        raise ValueError("reads must be >= 1")
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    b0, b1 = default_beta_range(model)
    beta0 = b0 if beta0 is None else beta0
    beta1 = b1 if beta1 is None else beta1
    if beta0 <= 0 or beta1 <= 0:
        raise ValueError("inverse temperatures must be positive")
    betas = np.geomspace(beta0, beta1, sweeps)
    indptr, indices, data = kernels.csr_from_couplings(model.n, model.couplings)
    states = kernels.anneal_states(model.h, indptr, indices, data, betas, seed, reads)
    uniq, counts = np.unique(states, axis=0, return_counts=True)
    energies = model.energies(uniq)
    order = np.argsort(energies, kind="stable")
    return SampleSet(
        states=uniq[order],
        energies=energies[order],
        counts=counts[order].astype(np.int64),
        n_reads=reads,
        seed=seed,
        sweeps=sweeps,
        beta_range=(float(beta0), float(beta1)),
    )


def fault_set_from_bits(net: PowerNetwork, bits) -> FaultSet:
    """Interpret the (x, y) block of an assignment as a fault set (0 = fault)."""
    reg = make_registry(net)
    cbs = [cb for cb in range(1, net.cb_count + 1) if not bits[reg.x(cb)]]
    sensors = [s for s in range(1, net.sensor_count + 1) if not bits[reg.y(s)]]
    return FaultSet.of(cbs, sensors)


def extract_candidates(
    net: PowerNetwork,
    obs: Observation,
    params: PenaltyParams,
    states_bits: np.ndarray,
    counts: np.ndarray,
) -> list[Candidate]:
    """Consistent fault sets among sampled assignments, deduplicated and ranked.

    Ranking: fault count ascending, then lexicographic on the sorted fault
    indices (CBs before sensors).
    """
    n_xy = net.cb_count + net.sensor_count
    weighted: dict[FaultSet, int] = {}
    for row, cnt in zip(states_bits, counts):
        if not is_consistent(net, obs, row[:n_xy]):
            continue
        fs = fault_set_from_bits(net, row)
        weighted[fs] = weighted.get(fs, 0) + int(cnt)
    ranked = sorted(
        weighted.items(),
        key=lambda kv: (kv[0].size, sorted(kv[0].cbs), sorted(kv[0].sensors)),
    )
    out = []
    for fs, cnt in ranked:
        cost = (
            params.lambda_fault_cb * len(fs.cbs)
            + params.lambda_fault_sensor * len(fs.sensors)
        )
        out.append(Candidate(faults=fs, n_faults=fs.size, occurrences=cnt, energy=cost))
    return out


def diagnose(
    net: PowerNetwork,
    obs: Observation,
    params: PenaltyParams | None = None,
    reads: int = 2000,
    sweeps: int = 1000,
    seed: int = 0,
    max_candidates: int | None = 200,
) -> DiagnosisReport:
    """End-to-end diagnosis: compile, anneal, decode, rank, verify.

    Sampled states are projected to (x, y), filtered to readout-consistent
    assignments, and ranked by fault count; the minimal count is verified
    against the tree dynamic program and any disagreement is flagged.
    """
    params = params or PenaltyParams()
    check_observation(net, obs)
    qubo, plan = compile_instance(net, obs, params)
    ising = qubo_to_ising(qubo)
    samples = simulated_anneal(ising, reads=reads, sweeps=sweeps, seed=seed)
    bits = spins_to_bits(samples.states)
    candidates = extract_candidates(net, obs, params, bits, samples.counts)
    dp = tree_dp_diagnose(net, obs)
    if candidates:
        best = candidates[0].n_faults
        n_minimal = sum(1 for c in candidates if c.n_faults == best)
        agrees = best == dp.min_faults
    else:
        best = None
        n_minimal = 0
        agrees = False
    if max_candidates is not None:
        candidates = candidates[:max_candidates]
    return DiagnosisReport(
        candidates=candidates,
        min_faults=best,
        n_minimal=n_minimal,
        oracle_min_faults=dp.min_faults,
        oracle_multiplicity=dp.multiplicity,
        agrees=agrees,
        n_reads=reads,
        extras={"n_logical": qubo.n, "n_ancilla": plan.n_ancilla},
    )
