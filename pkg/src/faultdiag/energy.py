"""Pseudo-boolean cost function for the diagnosis problem.

The diagnosis cost over CB health bits ``x`` and sensor health bits ``y``
(1 = healthy, 0 = faulty) is the sum of two parts:

* a fault-count part, ``lambda_cb * sum(1 - x_i) + lambda_sensor * sum(1 - y_i)``;
* a consistency part, ``lambda_path * sum_i y_i * xor(f_i, l_i)`` where
  ``f_i`` is the predicted current at sensor ``i`` (the product of the ``x``
  bits along its path) and ``l_i`` the observed readout.

With ``lambda_path`` strictly larger than either fault weight, the global
minimum of the sum sits exactly on the consistent assignments with the
fewest (weighted) faults: an inconsistent assignment can always be improved
by declaring the offending sensor faulty, trading a penalty of
``lambda_path`` for the smaller ``lambda_sensor``.

``xor(f, l) = l + f - 2*f*l`` keeps everything polynomial; the consistency
part has degree ``depth + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .network import Observation, PowerNetwork, check_observation


@dataclass(frozen=True)
class VariableRegistry:
    """Dense 0-based indexing of the logical binary variables.

    Layout: CB variables first (``x_1 .. x_{n_cb}``), then sensor variables
    (``y_1 .. y_{n_sensor}``), then any ancilla variables introduced by the
    degree reduction.
    """

    n_cb: int
    n_sensor: int
    n_ancilla: int = 0

    @property
    def size(self) -> int:
        return self.n_cb + self.n_sensor + self.n_ancilla

    def x(self, cb: int) -> int:
        """Registry index of CB variable ``x_cb`` (1-based CB index)."""
        if not 1 <= cb <= self.n_cb:
            raise ValueError(f"CB index {cb} out of range")
        return cb - 1

    def y(self, sensor: int) -> int:
        """Registry index of sensor variable ``y_sensor`` (1-based)."""
        if not 1 <= sensor <= self.n_sensor:
            raise ValueError(f"sensor index {sensor} out of range")
        return self.n_cb + sensor - 1

    def ancilla(self, k: int) -> int:
        """Registry index of the ``k``-th ancilla (0-based)."""
        if not 0 <= k < self.n_ancilla:
            raise ValueError(f"ancilla index {k} out of range")
        return self.n_cb + self.n_sensor + k

    def role(self, index: int) -> tuple[str, int]:
        """(role, 1-based label) of a registry index; roles: cb/sensor/ancilla."""
        if not 0 <= index < self.size:
            raise ValueError(f"variable index {index} out of range")
        if index < self.n_cb:
            return "cb", index + 1
        if index < self.n_cb + self.n_sensor:
            return "sensor", index - self.n_cb + 1
        return "ancilla", index - self.n_cb - self.n_sensor + 1

    def with_ancillas(self, n_ancilla: int) -> "VariableRegistry":
        return VariableRegistry(self.n_cb, self.n_sensor, n_ancilla)


@dataclass(frozen=True)
class PenaltyParams:
    """Penalty weights of the cost function.

    ``lambda_ancilla`` is the weight of the ancilla-consistency gadgets added
    during degree reduction; ``None`` selects a per-ancilla weight large
    enough that violating a gadget can never pay off (see quadratize module).
    """

    lambda_path: float = 3.0
    lambda_fault_cb: float = 1.0
    lambda_fault_sensor: float = 1.0
    lambda_ancilla: float | None = None

    def __post_init__(self) -> None:
        if self.lambda_path <= 0 or self.lambda_fault_cb <= 0 or self.lambda_fault_sensor <= 0:
            raise ValueError("penalty weights must be positive")
        if self.lambda_path <= max(self.lambda_fault_cb, self.lambda_fault_sensor):
            raise ValueError(
                "lambda_path must exceed both fault weights "
                f"({self.lambda_path} <= max({self.lambda_fault_cb}, {self.lambda_fault_sensor}))"
            )
        if self.lambda_ancilla is not None and self.lambda_ancilla <= 0:
            raise ValueError("lambda_ancilla must be positive when given")


class PseudoBoolean:
    """Multilinear polynomial over binary variables.

    Terms are keyed by sorted tuples of distinct registry indices; repeated
    indices fold away on construction (x**2 == x on bits) and exact-zero
    coefficients are dropped.  The empty product is kept separately in
    ``constant``.
    """

    __slots__ = ("terms", "constant", "registry")

    def __init__(
        self,
        registry: VariableRegistry,
        terms: dict[tuple[int, ...], float] | None = None,
        constant: float = 0.0,
    ):
        self.registry = registry
        self.constant = constant
        self.terms: dict[tuple[int, ...], float] = {}
        if terms:
            for key, coeff in terms.items():
                self.add_term(key, coeff)

    def add_term(self, indices, coeff: float) -> None:
        """Add ``coeff * prod(q_i for i in indices)``, folding duplicates."""
        if coeff == 0.0:
            return
        key = tuple(sorted(set(indices)))
        for i in key:
            if not 0 <= i < self.registry.size:
                raise ValueError(f"variable index {i} outside registry")
        if not key:
            self.constant += coeff
            return
        new = self.terms.get(key, 0.0) + coeff
        if new == 0.0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    def add(self, other: "PseudoBoolean") -> None:
        self.constant += other.constant
        for key, coeff in other.terms.items():
            self.add_term(key, coeff)

    def copy(self, registry: VariableRegistry | None = None) -> "PseudoBoolean":
        out = PseudoBoolean(registry or self.registry)
        out.constant = self.constant
        out.terms = dict(self.terms)
        return out

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def evaluate(self, bits) -> float:
        """Exact multilinear evaluation at a full 0/1 assignment."""
        if len(bits) != self.registry.size:
            raise ValueError(
                f"assignment has {len(bits)} bits, registry has {self.registry.size}"
            )
        total = self.constant
        for key, coeff in self.terms.items():
            prod = 1
            for i in key:
                if not bits[i]:
                    prod = 0
                    break
            if prod:
                total += coeff
        return total

    def __repr__(self) -> str:
        return (
            f"PseudoBoolean(n={self.registry.size}, terms={len(self.terms)}, "
            f"degree={self.degree()}, constant={self.constant})"
        )


def make_registry(net: PowerNetwork) -> VariableRegistry:
    return VariableRegistry(net.cb_count, net.sensor_count)


def consistency_term(
    net: PowerNetwork, obs: Observation, params: PenaltyParams
) -> PseudoBoolean:
    """``lambda_path * sum_i y_i * xor(f_i, l_i)`` as a multilinear polynomial.

    For ``l_i = 1`` the summand is ``y_i - y_i * f_i``; for ``l_i = 0`` it is
    ``y_i * f_i``, with ``f_i`` the monomial ``prod(x_j, j on path i)``.
    """
    check_observation(net, obs)
    reg = make_registry(net)
    poly = PseudoBoolean(reg)
    lam = params.lambda_path
    for i in range(1, net.sensor_count + 1):
        yi = reg.y(i)
        mono = [yi] + [reg.x(cb) for cb in net.path(i)]
        if obs.bits[i - 1] == 1:
            poly.add_term((yi,), lam)
            poly.add_term(mono, -lam)
        else:
            poly.add_term(mono, lam)
    return poly


def fault_count_term(net: PowerNetwork, params: PenaltyParams) -> PseudoBoolean:
    """Weighted number of faults: linear in every health bit."""
    reg = make_registry(net)
    poly = PseudoBoolean(reg)
    for cb in range(1, net.cb_count + 1):
        poly.constant += params.lambda_fault_cb
        poly.add_term((reg.x(cb),), -params.lambda_fault_cb)
    for s in range(1, net.sensor_count + 1):
        poly.constant += params.lambda_fault_sensor
        poly.add_term((reg.y(s),), -params.lambda_fault_sensor)
    return poly


def build_problem(
    net: PowerNetwork, obs: Observation, params: PenaltyParams
) -> PseudoBoolean:
    """Full diagnosis cost: fault count plus readout-consistency penalty."""
    if params.lambda_path <= max(params.lambda_fault_cb, params.lambda_fault_sensor):
        raise ValueError("lambda_path must exceed the fault weights")
    poly = fault_count_term(net, params)
    poly.add(consistency_term(net, obs, params))
    return poly


def evaluate(poly: PseudoBoolean, bits) -> float:
    return poly.evaluate(bits)


def predicted_current(net: PowerNetwork, bits, sensor: int) -> int:
    """Prediction ``f_i`` for one sensor from the CB bits of an assignment."""
    return int(all(bits[cb - 1] for cb in net.path(sensor)))


def is_consistent(net: PowerNetwork, obs: Observation, bits) -> bool:
    """True iff every healthy sensor's prediction matches its readout."""
    check_observation(net, obs)
    reg = make_registry(net)
    for i in range(1, net.sensor_count + 1):
        if not bits[reg.y(i)]:
            continue
        if predicted_current(net, bits, i) != obs.bits[i - 1]:
            return False
    return True
