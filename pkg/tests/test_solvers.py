import itertools

import numpy as np
import pytest

from faultdiag.energy import PenaltyParams, build_problem, evaluate, is_consistent
from faultdiag.network import FaultSet, Observation, build_tree, simulate_readout
from faultdiag.quadratize import compile_instance
from faultdiag.solvers import (
    brute_force_minimize,
    diagnose,
    fault_set_from_bits,
    simulated_anneal,
    tree_dp_diagnose,
    tree_dp_min_cost,
)
from faultdiag.spin import IsingModel, qubo_to_ising

PARAMS = PenaltyParams()


def brute_force_problem(net, obs, params):
    """Exhaustive minimum of the raw cost polynomial (independent oracle)."""
    problem = build_problem(net, obs, params)
    n = problem.registry.size
    best = None
    count = 0
    for bits in itertools.product((0, 1), repeat=n):
        e = evaluate(problem, bits)
        if best is None or e < best - 1e-12:
            best, count = e, 1
        elif abs(e - best) <= 1e-12:
            count += 1
    return best, count


def test_brute_force_ferromagnet():
    m = IsingModel(np.zeros(2), {(0, 1): -1.0}, 0.0)
    emin, minimizers = brute_force_minimize(m)
    assert emin == -1.0
    assert sorted(map(tuple, minimizers.tolist())) == [(-1, -1), (1, 1)]


def test_brute_force_rejects_large():
    m = IsingModel(np.zeros(27), {}, 0.0)
    with pytest.raises(ValueError):
        brute_force_minimize(m)


def test_brute_force_compiled_instance():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0001")
    qubo, _ = compile_instance(net, obs, PARAMS)
    emin, minimizers = brute_force_minimize(qubo)
    assert emin == pytest.approx(2.0)
    assert len(minimizers) == 1
    assert fault_set_from_bits(net, minimizers[0]) == FaultSet.of(cbs=[1], sensors=[4])


def test_dp_reference_instances():
    net = build_tree(4, 3)
    cases = [
        ("0101 0111 1111 1111", 3, 8),
        ("0101 0101 1111 1111", 4, 16),
        ("0101 0101 0111 1111", 5, 32),
        ("0101 0101 0101 1111", 6, 64),
        ("0101 0101 0101 0111", 7, 128),
        ("0101 0101 0101 0101", 8, 256),
    ]
    for readout, faults, mult in cases:
        res = tree_dp_diagnose(net, Observation.from_groups(readout))
        assert res.min_faults == faults
        assert res.multiplicity == mult


def test_dp_small_instance_witness():
    net = build_tree(4, 2)
    res = tree_dp_diagnose(net, Observation.from_groups("0001"))
    assert res.min_faults == 2
    assert res.multiplicity == 1
    assert res.witness == FaultSet.of(cbs=[1], sensors=[4])


def test_dp_healthy():
    net = build_tree(4, 3)
    res = tree_dp_diagnose(net, Observation((1,) * 16))
    assert res.min_faults == 0
    assert res.multiplicity == 1
    assert res.witness == FaultSet.of()


def test_dp_witness_is_consistent_and_minimal():
    import random

    rng = random.Random(12)
    for _ in range(40):
        arity, depth = rng.choice([(2, 2), (2, 3), (3, 2), (4, 2)])
        net = build_tree(arity, depth)
        obs = Observation(tuple(rng.randint(0, 1) for _ in range(net.sensor_count)))
        res = tree_dp_diagnose(net, obs)
        assert res.witness.size == res.min_faults
        bits = [1] * (net.cb_count + net.sensor_count)
        for cb in res.witness.cbs:
            bits[cb - 1] = 0
        for s in res.witness.sensors:
            bits[net.cb_count + s - 1] = 0
        assert is_consistent(net, obs, bits)


def test_dp_agrees_with_brute_force_on_random_instances():
    """Oracle agreement: minimum cost and count of minimizers, 200 random
    instances on trees with at most 20 components."""
    import random

    rng = random.Random(99)
    nets = [(2, 2), (2, 3), (3, 2), (4, 2), (5, 2)]
    for trial in range(200):
        arity, depth = nets[trial % len(nets)]
        net = build_tree(arity, depth)
        obs = Observation(tuple(rng.randint(0, 1) for _ in range(net.sensor_count)))
        res = tree_dp_diagnose(net, obs)
        bf_min, bf_count = brute_force_problem(net, obs, PARAMS)
        assert res.min_faults == pytest.approx(bf_min)
        assert res.multiplicity == bf_count


def test_dp_weighted_costs():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0001")
    # cheap sensors: distrusting the three LOW sensors wins over any CB fault
    assert tree_dp_min_cost(net, obs, cb_cost=1.0, sensor_cost=0.1) == pytest.approx(0.3)
    # the witness {root CB, sensor 4} costs cb + sensor
    assert tree_dp_min_cost(net, obs, 1.0, 1.0) == pytest.approx(2.0)


def test_simulated_anneal_validation():
    m = IsingModel(np.zeros(2), {(0, 1): -1.0}, 0.0)
    with pytest.raises(ValueError):
        simulated_anneal(m, reads=0)
    with pytest.raises(ValueError):
        simulated_anneal(m, reads=1, sweeps=0)
    with pytest.raises(ValueError):
        simulated_anneal(m, reads=1, beta0=-1.0)


def test_simulated_anneal_ferromagnet():
    # a cold finish pins the trivial landscape into the ground pair
    m = IsingModel(np.zeros(2), {(0, 1): -1.0}, 0.0)
    ss = simulated_anneal(m, reads=100, sweeps=50, beta1=6.0, seed=1)
    assert ss.n_reads == 100
    assert int(ss.counts.sum()) == 100
    assert ss.min_energy() == -1.0
    ground_reads = ss.occurrences_at(-1.0)
    assert ground_reads >= 99


def test_simulated_anneal_finds_oracle_minimum():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0001")
    qubo, _ = compile_instance(net, obs, PARAMS)
    ising = qubo_to_ising(qubo)
    emin, _ = brute_force_minimize(qubo)
    ss = simulated_anneal(ising, reads=1000, sweeps=400, seed=2)
    assert ss.min_energy() == pytest.approx(emin, abs=1e-9)


def test_sample_energies_reevaluate():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0001")
    qubo, _ = compile_instance(net, obs, PARAMS)
    ising = qubo_to_ising(qubo)
    ss = simulated_anneal(ising, reads=300, sweeps=100, seed=3)
    for row, e in zip(ss.states, ss.energies):
        assert ising.energy(row) == pytest.approx(e, abs=1e-9)


def test_diagnose_small_instance():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0001")
    report = diagnose(net, obs, PARAMS, reads=500, sweeps=300, seed=4)
    assert report.agrees
    assert report.min_faults == 2
    assert report.oracle_multiplicity == 1
    top = report.candidates[0]
    assert top.faults == FaultSet.of(cbs=[1], sensors=[4])
    assert all(
        report.candidates[i].n_faults <= report.candidates[i + 1].n_faults
        for i in range(len(report.candidates) - 1)
    )


def test_diagnose_healthy_instance():
    net = build_tree(4, 2)
    obs = Observation((1,) * 4)
    report = diagnose(net, obs, PARAMS, reads=200, sweeps=100, seed=5)
    assert report.agrees
    assert report.min_faults == 0
    assert report.candidates[0].faults == FaultSet.of()


def test_diagnose_consistency_of_candidates():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0011")
    report = diagnose(net, obs, PARAMS, reads=400, sweeps=200, seed=6)
    n_xy = net.cb_count + net.sensor_count
    for cand in report.candidates:
        bits = [1] * n_xy
        for cb in cand.faults.cbs:
            bits[cb - 1] = 0
        for s in cand.faults.sensors:
            bits[net.cb_count + s - 1] = 0
        assert is_consistent(net, obs, bits)


def test_simulated_instances_roundtrip_through_diagnosis():
    import random

    rng = random.Random(21)
    net = build_tree(3, 2)
    for _ in range(10):
        cbs = rng.sample(range(2, net.cb_count + 1), rng.randint(0, 1))
        sensors = rng.sample(range(1, net.sensor_count + 1), rng.randint(0, 1))
        obs = simulate_readout(net, FaultSet.of(cbs, sensors))
        res = tree_dp_diagnose(net, obs)
        assert res.min_faults <= len(cbs) + len(sensors)
