import itertools

import pytest

from faultdiag.energy import (
    PenaltyParams,
    PseudoBoolean,
    VariableRegistry,
    build_problem,
    consistency_term,
    evaluate,
    fault_count_term,
    is_consistent,
    make_registry,
)
from faultdiag.network import Observation, build_tree


def reference_cost(net, obs, params, bits):
    """Independent oracle: evaluate the cost directly from its definition."""
    reg = make_registry(net)
    total = 0.0
    for cb in range(1, net.cb_count + 1):
        total += params.lambda_fault_cb * (1 - bits[reg.x(cb)])
    for s in range(1, net.sensor_count + 1):
        total += params.lambda_fault_sensor * (1 - bits[reg.y(s)])
    for i in range(1, net.sensor_count + 1):
        f = 1
        for cb in net.path(i):
            f &= bits[reg.x(cb)]
        g = f ^ obs.bits[i - 1]
        total += params.lambda_path * bits[reg.y(i)] * g
    return total


def all_assignments(n):
    return itertools.product((0, 1), repeat=n)


@pytest.fixture
def small_instance():
    net = build_tree(4, 2)
    obs = Observation.from_groups("0001")
    return net, obs, PenaltyParams()


def test_penalty_params_validation():
    with pytest.raises(ValueError):
        PenaltyParams(lambda_path=1.0, lambda_fault_cb=1.0)
    with pytest.raises(ValueError):
        PenaltyParams(lambda_path=-3.0)
    with pytest.raises(ValueError):
        PenaltyParams(lambda_ancilla=0.0)


def test_pseudoboolean_basics():
    reg = VariableRegistry(2, 0)
    p = PseudoBoolean(reg)
    p.add_term((0, 0, 1), 2.0)  # x0^2 x1 folds to x0 x1
    p.constant += 4.0
    assert p.terms == {(0, 1): 2.0}
    assert p.evaluate([1, 1]) == 6.0
    assert p.evaluate([1, 0]) == 4.0
    p.add_term((0, 1), -2.0)
    assert p.terms == {}
    empty = PseudoBoolean(reg)
    assert empty.evaluate([0, 1]) == 0.0
    with pytest.raises(ValueError):
        empty.evaluate([0])


def test_consistency_zero_on_healthy_consistent():
    net = build_tree(4, 3)
    obs = Observation((1,) * 16)
    poly = consistency_term(net, obs, PenaltyParams())
    assert poly.evaluate([1] * poly.registry.size) == 0.0


def test_consistency_counts_mismatches(small_instance):
    net, obs, params = small_instance
    poly = consistency_term(net, obs, params)
    healthy = [1] * poly.registry.size
    assert poly.evaluate(healthy) == 3 * params.lambda_path == 9.0
    witness = [1] * poly.registry.size
    witness[poly.registry.x(1)] = 0
    witness[poly.registry.y(4)] = 0
    assert poly.evaluate(witness) == 0.0


def test_fault_count_term(small_instance):
    net, obs, params = small_instance
    poly = fault_count_term(net, params)
    assert poly.degree() == 1
    assert poly.evaluate([1] * 9) == 0.0
    witness = [1] * 9
    witness[poly.registry.x(1)] = 0
    witness[poly.registry.y(4)] = 0
    assert poly.evaluate(witness) == 2.0
    assert poly.evaluate([0] * 9) == 9.0


def test_all_components_faulty_cost():
    net = build_tree(4, 3)
    poly = fault_count_term(net, PenaltyParams())
    assert poly.evaluate([0] * 37) == 37.0


def test_build_problem_minimum(small_instance):
    net, obs, params = small_instance
    problem = build_problem(net, obs, params)
    best, best_bits = min(
        ((evaluate(problem, bits), bits) for bits in all_assignments(9)),
        key=lambda t: t[0],
    )
    assert best == 2.0
    expected = [1] * 9
    expected[problem.registry.x(1)] = 0
    expected[problem.registry.y(4)] = 0
    assert list(best_bits) == expected


def test_problem_matches_reference_everywhere(small_instance):
    net, obs, params = small_instance
    problem = build_problem(net, obs, params)
    for bits in all_assignments(9):
        assert evaluate(problem, bits) == pytest.approx(
            reference_cost(net, obs, params, bits), abs=1e-9
        )


def test_all_ones_readout_minimum_zero():
    net = build_tree(4, 3)
    obs = Observation((1,) * 16)
    problem = build_problem(net, obs, PenaltyParams())
    assert evaluate(problem, [1] * 37) == 0.0


def test_nonnegativity_and_path_multiples():
    import random

    rng = random.Random(3)
    net = build_tree(2, 3)
    params = PenaltyParams()
    for _ in range(30):
        obs = Observation(tuple(rng.randint(0, 1) for _ in range(net.sensor_count)))
        consist = consistency_term(net, obs, params)
        faults = fault_count_term(net, params)
        n = consist.registry.size
        for _ in range(20):
            bits = [rng.randint(0, 1) for _ in range(n)]
            c = consist.evaluate(bits)
            f = faults.evaluate(bits)
            assert c >= 0.0 and f >= 0.0
            assert c / params.lambda_path == pytest.approx(
                round(c / params.lambda_path), abs=1e-9
            )


def test_zero_iff_consistent_and_fault_free(small_instance):
    net, obs, params = small_instance
    problem = build_problem(net, obs, params)
    for bits in all_assignments(9):
        value = evaluate(problem, bits)
        fault_free = all(bits)
        if value == 0.0:
            assert is_consistent(net, obs, bits) and fault_free
        if is_consistent(net, obs, bits) and fault_free:
            assert value == 0.0


def test_penalty_dominance(small_instance):
    """Any inconsistent assignment costs strictly more than the consistent
    optimum whenever the path weight beats the fault weights."""
    net, obs, params = small_instance
    problem = build_problem(net, obs, params)
    consistent_best = min(
        evaluate(problem, bits)
        for bits in all_assignments(9)
        if is_consistent(net, obs, bits)
    )
    for bits in all_assignments(9):
        if not is_consistent(net, obs, bits):
            assert evaluate(problem, bits) > consistent_best


def test_is_consistent(small_instance):
    net, obs, params = small_instance
    assert not is_consistent(net, obs, [1] * 9)
    witness = [1] * 9
    witness[0] = 0  # root CB faulty
    witness[8] = 0  # sensor 4 untrusted
    assert is_consistent(net, obs, witness)
    healthy_ones = Observation((1,) * 4)
    assert is_consistent(net, healthy_ones, [1] * 9)
