"""Tree-structured power-distribution network model.

A network is a complete k-ary tree of circuit breakers (CBs) indexed in
level order starting from the root (CB 1).  Current flows from a single
source at the root down to the leaf CBs; one ammeter-style sensor hangs off
each leaf CB and reports HIGH (1) when it sees current, LOW (0) otherwise.

CBs and sensors can both fail.  A faulty CB blocks current to everything
below it; a faulty sensor reports the complement of the true current state,
which is the worst case for a diagnoser since its readout carries no
information.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class PowerNetwork:
    """Complete k-ary tree of circuit breakers with one sensor per leaf.

    CB indices are 1-based and assigned in level order: root is 1, its
    children are 2..arity+1 left to right, and so on.  Sensor ``i`` is
    attached to the ``i``-th leaf CB in left-to-right order.
    """

    arity: int
    depth: int

    def __post_init__(self) -> None:
        if self.arity < 2:
            raise ValueError(f"arity must be >= 2, got {self.arity}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")

    @property
    def cb_count(self) -> int:
        return (self.arity**self.depth - 1) // (self.arity - 1)

    @property
    def sensor_count(self) -> int:
        return self.arity ** (self.depth - 1)

    def level_start(self, level: int) -> int:
        """First CB index at ``level`` (levels are 1-based; root level is 1)."""
        return (self.arity ** (level - 1) - 1) // (self.arity - 1) + 1

    def level_of(self, cb: int) -> int:
        self._check_cb(cb)
        level = 1
        while self.level_start(level + 1) <= cb:
            level += 1
        return level

    def parent(self, cb: int) -> int | None:
        self._check_cb(cb)
        if cb == 1:
            return None
        return (cb - 2) // self.arity + 1

    def children(self, cb: int) -> tuple[int, ...]:
        """Child CB indices, empty for leaf CBs."""
        self._check_cb(cb)
        first = self.arity * (cb - 1) + 2
        if first > self.cb_count:
            return ()
        return tuple(range(first, first + self.arity))

    def is_leaf(self, cb: int) -> bool:
        return self.arity * (cb - 1) + 2 > self.cb_count

    def leaf_cb(self, sensor: int) -> int:
        """CB index of the leaf that sensor ``sensor`` is attached to."""
        self._check_sensor(sensor)
        return self.level_start(self.depth) + sensor - 1

    def sensor_at(self, cb: int) -> int:
        """Sensor index attached to leaf CB ``cb``."""
        if not self.is_leaf(cb):
            raise ValueError(f"CB {cb} is not a leaf")
        return cb - self.level_start(self.depth) + 1

    def path(self, sensor: int) -> tuple[int, ...]:
        """CB indices from the root down to sensor ``sensor``'s leaf CB."""
        cb = self.leaf_cb(sensor)
        rev = [cb]
        while cb != 1:
            cb = (cb - 2) // self.arity + 1
            rev.append(cb)
        return tuple(reversed(rev))

    def cb_at(self, sensor: int, level: int) -> int:
        """CB on sensor ``sensor``'s path at the given level (1 = root)."""
        if not 1 <= level <= self.depth:
            raise ValueError(f"level {level} out of range 1..{self.depth}")
        return self.path(sensor)[level - 1]

    def sensors_under(self, cb: int) -> range:
        """Contiguous 1-based range of sensor indices below (or at) ``cb``."""
        level = self.level_of(cb)
        span = self.arity ** (self.depth - level)
        pos = cb - self.level_start(level)
        return range(pos * span + 1, (pos + 1) * span + 1)

    def _check_cb(self, cb: int) -> None:
        if not 1 <= cb <= self.cb_count:
            raise ValueError(f"CB index {cb} out of range 1..{self.cb_count}")

    def _check_sensor(self, sensor: int) -> None:
        if not 1 <= sensor <= self.sensor_count:
            raise ValueError(
                f"sensor index {sensor} out of range 1..{self.sensor_count}"
            )


@dataclass(frozen=True)
class Observation:
    """Sensor readouts, one bit per sensor; 1 is HIGH, 0 is LOW."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("readout bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def groups(self, group_size: int) -> list[str]:
        """Readout bits as strings of ``group_size`` bits in sensor order."""
        s = "".join(str(b) for b in self.bits)
        return [s[i : i + group_size] for i in range(0, len(s), group_size)]

    @classmethod
    def from_groups(cls, groups: str | list[str]) -> "Observation":
        if isinstance(groups, str):
            groups = groups.replace(",", " ").split()
        bits = []
        for g in groups:
            for ch in g:
                if ch not in "01":
                    raise ValueError(f"invalid readout character {ch!r}")
                bits.append(int(ch))
        return cls(tuple(bits))


@dataclass(frozen=True)
class FaultSet:
    """A set of faulted CBs and faulted sensors (separate index namespaces)."""

    cbs: frozenset[int] = field(default_factory=frozenset)
    sensors: frozenset[int] = field(default_factory=frozenset)

    @classmethod
    def of(cls, cbs=(), sensors=()) -> "FaultSet":
        return cls(frozenset(cbs), frozenset(sensors))

    @property
    def size(self) -> int:
        return len(self.cbs) + len(self.sensors)

    def __str__(self) -> str:
        parts = [f"cb:{i}" for i in sorted(self.cbs)]
        parts += [f"sensor:{i}" for i in sorted(self.sensors)]
        return "{" + ", ".join(parts) + "}" if parts else "{}"


def build_tree(arity: int, depth: int) -> PowerNetwork:
    """Build a complete ``arity``-ary CB tree with ``depth`` CB levels."""
    return PowerNetwork(arity, depth)


def simulate_readout(net: PowerNetwork, faults: FaultSet) -> Observation:
    """Deterministic readout implied by a fault set.

    The true current at sensor ``i`` is present iff no CB on its path is
    faulted.  A healthy sensor reports the true state; a faulted sensor
    reports the complement.
    """
    for cb in faults.cbs:
        net._check_cb(cb)
    for s in faults.sensors:
        net._check_sensor(s)
    bits = []
    for i in range(1, net.sensor_count + 1):
        current = 0 if any(cb in faults.cbs for cb in net.path(i)) else 1
        bits.append(current ^ (1 if i in faults.sensors else 0))
    return Observation(tuple(bits))


def check_observation(net: PowerNetwork, obs: Observation) -> None:
    """Raise if the readout length does not match the network."""
    if len(obs) != net.sensor_count:
        raise ValueError(
            f"readout has {len(obs)} bits, network has {net.sensor_count} sensors"
        )
