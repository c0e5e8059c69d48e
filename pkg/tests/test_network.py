import pytest

from faultdiag.network import (
    FaultSet,
    Observation,
    build_tree,
    simulate_readout,
)


def test_quaternary_depth3_counts():
    net = build_tree(4, 3)
    assert net.cb_count == 21
    assert net.sensor_count == 16


def test_quaternary_depth4_counts():
    net = build_tree(4, 4)
    assert net.cb_count == 85
    assert net.sensor_count == 64


def test_depth_one_is_single_cb():
    # degenerate tree: one root CB whose leaf is itself, one sensor
    net = build_tree(2, 1)
    assert net.cb_count == 1
    assert net.sensor_count == 1
    assert net.path(1) == (1,)


def test_bad_dimensions_rejected():
    with pytest.raises(ValueError):
        build_tree(1, 3)
    with pytest.raises(ValueError):
        build_tree(4, 0)


def test_paths_match_published_labeling():
    net = build_tree(4, 3)
    assert net.path(1) == (1, 2, 6)
    assert net.path(2) == (1, 2, 7)
    assert net.path(3) == (1, 2, 8)
    assert net.path(16) == (1, 5, 21)


def test_level_lookup():
    net = build_tree(4, 3)
    assert net.cb_at(1, 1) == 1
    for i in range(1, 17):
        assert net.cb_at(i, 1) == 1
    assert net.cb_at(1, 2) == 2
    assert net.cb_at(4, 2) == 2
    assert net.cb_at(5, 2) == 3
    assert net.cb_at(8, 2) == 3
    assert net.cb_at(1, 3) == 6
    assert net.cb_at(16, 3) == 21
    with pytest.raises(ValueError):
        net.cb_at(1, 4)
    with pytest.raises(ValueError):
        net.path(17)


@pytest.mark.parametrize("arity,depth", [(2, 2), (2, 3), (3, 2), (4, 2), (4, 3)])
def test_path_and_cb_at_agree(arity, depth):
    net = build_tree(arity, depth)
    for i in range(1, net.sensor_count + 1):
        p = net.path(i)
        assert len(p) == depth
        for d in range(1, depth + 1):
            assert net.cb_at(i, d) == p[d - 1]


@pytest.mark.parametrize("arity,depth", [(2, 3), (3, 2), (4, 3)])
def test_level_order_children_contiguous(arity, depth):
    net = build_tree(arity, depth)
    for cb in range(1, net.cb_count + 1):
        kids = net.children(cb)
        if kids:
            assert len(kids) == arity
            assert kids == tuple(range(kids[0], kids[0] + arity))
            assert all(net.parent(k) == cb for k in kids)
            assert kids[0] > cb


def test_sensors_under():
    net = build_tree(4, 3)
    assert list(net.sensors_under(1)) == list(range(1, 17))
    assert list(net.sensors_under(2)) == [1, 2, 3, 4]
    assert list(net.sensors_under(3)) == [5, 6, 7, 8]
    assert list(net.sensors_under(21)) == [16]


def test_healthy_readout_is_all_ones():
    net = build_tree(4, 3)
    obs = simulate_readout(net, FaultSet.of())
    assert obs.bits == (1,) * 16


def test_root_fault_kills_every_path():
    net = build_tree(4, 3)
    obs = simulate_readout(net, FaultSet.of(cbs=[1]))
    assert obs.bits == (0,) * 16


def test_leaf_fault_kills_one_path():
    net = build_tree(4, 3)
    obs = simulate_readout(net, FaultSet.of(cbs=[6]))
    assert obs.bits == (0,) + (1,) * 15


def test_faulted_sensor_inverts():
    net = build_tree(4, 3)
    obs = simulate_readout(net, FaultSet.of(sensors=[5]))
    expected = [1] * 16
    expected[4] = 0
    assert obs.bits == tuple(expected)
    # sensor fault below a dead path flips the zero back on
    obs = simulate_readout(net, FaultSet.of(cbs=[1], sensors=[5]))
    expected = [0] * 16
    expected[4] = 1
    assert obs.bits == tuple(expected)


def test_cb_faults_only_switch_readouts_off():
    import random

    rng = random.Random(7)
    net = build_tree(3, 3)
    for _ in range(50):
        cbs = rng.sample(range(1, net.cb_count + 1), rng.randint(0, 4))
        base = simulate_readout(net, FaultSet.of(cbs=cbs))
        more = simulate_readout(net, FaultSet.of(cbs=cbs + [rng.randint(1, net.cb_count)]))
        for b, m in zip(base.bits, more.bits):
            assert m <= b


def test_observation_groups_roundtrip():
    obs = Observation.from_groups("0101 0101 0101 1111")
    assert sum(obs.bits) == 10
    assert obs.groups(4) == ["0101", "0101", "0101", "1111"]
    with pytest.raises(ValueError):
        Observation.from_groups("01x1")


def test_fault_set_str():
    assert str(FaultSet.of(cbs=[2, 1], sensors=[4])) == "{cb:1, cb:2, sensor:4}"
