import numpy as np
import pytest

from faultdiag.energy import PenaltyParams, VariableRegistry
from faultdiag.network import Observation, build_tree
from faultdiag.quadratize import Qubo, compile_instance
from faultdiag.spin import (
    Gauge,
    IsingModel,
    apply_gauge,
    bits_to_spins,
    identity_gauge,
    ising_energy,
    ising_to_qubo,
    qubo_to_ising,
    normalize,
    random_gauge,
    spins_to_bits,
    ungauge_sample,
)


def random_qubo(rng, n, density=0.4):
    terms = {}
    for i in range(n):
        if rng.random() < 0.8:
            terms[(i, i)] = rng.normal()
        for j in range(i + 1, n):
            if rng.random() < density:
                terms[(i, j)] = rng.normal()
    return Qubo(n, terms, rng.normal(), VariableRegistry(n, 0, 0))


def random_ising(rng, n, density=0.4):
    h = rng.normal(size=n)
    couplings = {
        (i, j): rng.normal()
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    }
    return IsingModel(h, couplings, rng.normal())


def enumerate_spins(n):
    for z in range(2**n):
        yield np.array([1 if (z >> i) & 1 else -1 for i in range(n)], dtype=np.int8)


def test_single_linear_term():
    q = Qubo(1, {(0, 0): 3.0}, 0.0, VariableRegistry(1, 0, 0))
    m = qubo_to_ising(q)
    assert m.h[0] == pytest.approx(1.5)
    assert m.offset == pytest.approx(1.5)
    assert m.couplings == {}


def test_single_pair_term():
    q = Qubo(2, {(0, 1): 4.0}, 0.0, VariableRegistry(2, 0, 0))
    m = qubo_to_ising(q)
    assert m.couplings[(0, 1)] == pytest.approx(1.0)
    assert m.h[0] == pytest.approx(1.0)
    assert m.h[1] == pytest.approx(1.0)
    assert m.offset == pytest.approx(1.0)


def test_empty_qubo_keeps_offset():
    q = Qubo(0, {}, 5.0, VariableRegistry(0, 0, 0))
    m = qubo_to_ising(q)
    assert m.offset == 5.0
    assert m.n == 0


def test_ising_to_qubo_single_field():
    m = IsingModel(np.array([1.0]), {}, 0.0)
    q = ising_to_qubo(m)
    assert q.terms == {(0, 0): pytest.approx(2.0)}
    assert q.offset == pytest.approx(-1.0)


def test_transform_identity_random_models():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(1, 9))
        q = random_qubo(rng, n)
        m = qubo_to_ising(q)
        for _ in range(40):
            bits = rng.integers(0, 2, size=n)
            spins = bits_to_spins(bits)
            assert ising_energy(m, spins) == pytest.approx(
                q.evaluate(list(bits)), abs=1e-9
            )


def test_round_trip_compiled_instance():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0001")
    qubo, _ = compile_instance(net, obs, PenaltyParams())
    back = ising_to_qubo(qubo_to_ising(qubo))
    assert back.n == qubo.n
    assert back.offset == pytest.approx(qubo.offset, abs=1e-12)
    keys = set(qubo.terms) | set(back.terms)
    for k in keys:
        assert back.terms.get(k, 0.0) == pytest.approx(
            qubo.terms.get(k, 0.0), abs=1e-12
        )


def test_round_trip_zero_model():
    m = IsingModel(np.zeros(3), {}, 0.0)
    q = ising_to_qubo(m)
    assert q.terms == {}
    m2 = qubo_to_ising(q)
    assert np.allclose(m2.h, 0.0) and m2.offset == 0.0


def test_gauge_validation_and_identity():
    m = IsingModel(np.array([1.0, -0.5]), {(0, 1): 0.7}, 2.0)
    with pytest.raises(ValueError):
        Gauge((1, 2))
    with pytest.raises(ValueError):
        apply_gauge(m, Gauge((1,)))
    assert apply_gauge(m, identity_gauge(2)).couplings == m.couplings


def test_gauge_transformation_rule():
    m = IsingModel(np.array([1.0, -0.5]), {(0, 1): 0.7}, 0.0)
    g = Gauge((-1, 1))
    mg = apply_gauge(m, g)
    assert mg.h[0] == pytest.approx(-1.0)
    assert mg.h[1] == pytest.approx(-0.5)
    assert mg.couplings[(0, 1)] == pytest.approx(-0.7)
    # involution
    back = apply_gauge(mg, g)
    assert np.allclose(back.h, m.h)
    assert back.couplings[(0, 1)] == pytest.approx(0.7)


def test_gauge_energy_invariance():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(1, 10))
        m = random_ising(rng, n)
        g = random_gauge(n, int(rng.integers(0, 2**31)))
        mg = apply_gauge(m, g)
        for _ in range(30):
            s = bits_to_spins(rng.integers(0, 2, size=n))
            gauged_state = ungauge_sample(s, g)  # componentwise product
            assert ising_energy(mg, gauged_state) == pytest.approx(
                ising_energy(m, s), abs=1e-12
            )


def test_gauge_argmin_equivariance():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        m = random_ising(rng, n)
        g = random_gauge(n, int(rng.integers(0, 2**31)))
        mg = apply_gauge(m, g)
        states = list(enumerate_spins(n))
        e = [ising_energy(m, s) for s in states]
        eg = [ising_energy(mg, ungauge_sample(s, g)) for s in states]
        best = min(e)
        for v, vg in zip(e, eg):
            assert vg == pytest.approx(v, abs=1e-12)
        assert min(eg) == pytest.approx(best, abs=1e-12)


def test_normalize_ranges():
    m = IsingModel(np.array([1.0, -3.0]), {(0, 1): 4.0}, 8.0)
    scaled, scale = normalize(m)
    assert scale == pytest.approx(0.25)
    assert np.max(np.abs(scaled.h)) <= 2.0 + 1e-12
    assert max(abs(c) for c in scaled.couplings.values()) <= 1.0 + 1e-12
    assert scaled.offset == pytest.approx(2.0)

    m2 = IsingModel(np.array([10.0]), {}, 0.0)
    scaled2, scale2 = normalize(m2)
    assert scale2 == pytest.approx(0.2)
    assert scaled2.h[0] == pytest.approx(2.0)

    small = IsingModel(np.array([0.5]), {}, 1.0)
    same, s = normalize(small)
    assert s == 1.0 and same.h[0] == 0.5

    zero = IsingModel(np.zeros(2), {}, 0.0)
    _, sz = normalize(zero)
    assert sz == 1.0


def test_normalize_preserves_argmin():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        m = random_ising(rng, n)
        m.h *= 10
        scaled, scale = normalize(m)
        states = list(enumerate_spins(n))
        e = np.array([ising_energy(m, s) for s in states])
        es = np.array([ising_energy(scaled, s) for s in states])
        assert set(np.flatnonzero(e <= e.min() + 1e-9)) == set(
            np.flatnonzero(es <= es.min() + scale * 1e-9)
        )


def test_ising_energy_validation():
    m = IsingModel(np.array([0.0, 0.0]), {(0, 1): -1.0}, 0.0)
    assert ising_energy(m, np.array([1, 1])) == -1.0
    assert ising_energy(m, np.array([1, -1])) == 1.0
    with pytest.raises(ValueError):
        ising_energy(m, np.array([1, 0]))
    with pytest.raises(ValueError):
        ising_energy(m, np.array([1, 1, 1]))


def test_spin_bit_conversions():
    bits = np.array([[0, 1], [1, 0]])
    spins = bits_to_spins(bits)
    assert spins.tolist() == [[-1, 1], [1, -1]]
    assert spins_to_bits(spins).tolist() == bits.tolist()
