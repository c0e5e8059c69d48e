"""Degree reduction of the diagnosis cost to a quadratic binary form.

The consistency part of the cost has one degree-(D+1) monomial per path
(D = tree depth).  Reduction to quadratic exploits a structural fact: a
minimum-fault consistent assignment never places two faults on the same
root-to-leaf path, because the deeper fault would be redundant (everything
it blocks is already blocked above).  On the at-most-one-fault-per-path
assignments, with S_i = sum(x_j, j on path i):

* HIGH readout (l = 1): the monomial ``y_i * prod(x_j)`` can be replaced by
  the linear form ``y_i * (1 - D + S_i)``; the summand ``y_i - y_i*f_i``
  becomes ``y_i * (D - S_i)``, which counts faults on the path when the
  sensor is trusted.  Already quadratic.
* LOW readout (l = 0): the monomial is replaced by ``y_i * (1 - D + S_i)^2``,
  which is zero exactly when the path carries one fault and positive
  otherwise, so redundant extra faults are penalized rather than ignored.
  Expansion leaves cubic terms ``y_i * x_n * x_m``.

The remaining cubics collapse through product substitutions ``u*v -> a``
with a fresh ancilla bit per substitution.  Two substitution shapes exist:

* sensor substitutions ``y_i * x_n -> a`` — private to path ``i``; applied
  from the leaf level inward, the substitution at level ``d`` collapses the
  ``d - 1`` still-open terms pairing ``x_n`` with its ancestors;
* pair substitutions ``x_n * x_m -> a`` (``m`` an ancestor of ``n``) —
  shared by every LOW path through ``n``, so they win exactly when more
  than ``d - 1`` discrepant sensors sit below ``n`` (ties go to sensor
  substitutions).

Each substitution gets a penalty gadget ``w * (uv - 2ua - 2va + 3a)``,
which is zero iff ``a == u*v`` and at least ``w`` otherwise.  The default
weight, one plus the total magnitude of the terms rewritten onto the
ancilla, makes violating a gadget strictly unprofitable, so minimizing over
the ancillas reproduces the substituted polynomial exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .energy import (
    PenaltyParams,
    PseudoBoolean,
    VariableRegistry,
    build_problem,
    make_registry,
)
from .network import Observation, PowerNetwork, check_observation


@dataclass(frozen=True)
class Substitution:
    """One product substitution ``u*v -> ancilla``.

    ``kind`` is "sensor" for y*x products and "pair" for x*x products;
    ``collapses`` lists the cubic term keys this substitution owns.
    """

    kind: str
    u: int
    v: int
    ancilla: int
    collapses: tuple[tuple[int, int, int], ...]


@dataclass(frozen=True)
class ReductionPlan:
    substitutions: tuple[Substitution, ...]

    @property
    def n_ancilla(self) -> int:
        return len(self.substitutions)


@dataclass
class Qubo:
    """Quadratic form over bits: ``offset + sum Q[i,j] q_i q_j`` (i <= j).

    Diagonal entries are the linear weights.  ``terms`` stores only nonzero
    coefficients, keyed by (i, j) with i <= j.
    """

    n: int
    terms: dict[tuple[int, int], float]
    offset: float
    registry: VariableRegistry

    def evaluate(self, bits) -> float:
        if len(bits) != self.n:
            raise ValueError(f"assignment has {len(bits)} bits, model has {self.n}")
        total = self.offset
        for (i, j), c in self.terms.items():
            if bits[i] and bits[j]:
                total += c
        return total

    def adjacency(self) -> dict[int, set[int]]:
        """Coupling graph over variables (off-diagonal nonzeros)."""
        adj: dict[int, set[int]] = {i: set() for i in range(self.n)}
        for (i, j), c in self.terms.items():
            if i != j and c != 0.0:
                adj[i].add(j)
                adj[j].add(i)
        return adj


def substitute_high_readout(
    poly: PseudoBoolean, net: PowerNetwork, obs: Observation
) -> PseudoBoolean:
    """Rewrite the HIGH-readout path monomials to linear fault counters."""
    check_observation(net, obs)
    reg = poly.registry
    out = poly.copy()
    for i in range(1, net.sensor_count + 1):
        if obs.bits[i - 1] != 1:
            continue
        yi = reg.y(i)
        path = [reg.x(cb) for cb in net.path(i)]
        key = tuple(sorted([yi] + path))
        if key not in out.terms:
            raise ValueError(f"expected path monomial for HIGH sensor {i} missing")
        coeff = out.terms.pop(key)
        depth = len(path)
        out.add_term((yi,), coeff * (1 - depth))
        for xj in path:
            out.add_term((yi, xj), coeff)
    return out


def substitute_low_readout(
    poly: PseudoBoolean, net: PowerNetwork, obs: Observation
) -> PseudoBoolean:
    """Rewrite the LOW-readout path monomials to squared fault counters.

    ``prod(x_j) -> (1 - D + S)^2`` expanded multilinearly: constant
    ``(1-D)^2``, linear ``(2(1-D) + 1) * x_j``, and pair terms
    ``2 * x_n * x_m`` — all still multiplied by ``y_i``, so the pair terms
    come out cubic.
    """
    check_observation(net, obs)
    reg = poly.registry
    out = poly.copy()
    for i in range(1, net.sensor_count + 1):
        if obs.bits[i - 1] != 0:
            continue
        yi = reg.y(i)
        path = [reg.x(cb) for cb in net.path(i)]
        key = tuple(sorted([yi] + path))
        if key not in out.terms:
            raise ValueError(f"expected path monomial for LOW sensor {i} missing")
        coeff = out.terms.pop(key)
        depth = len(path)
        c1 = 1 - depth
        out.add_term((yi,), coeff * c1 * c1)
        for xj in path:
            out.add_term((yi, xj), coeff * (2 * c1 + 1))
        for a in range(depth):
            for b in range(a + 1, depth):
                out.add_term((yi, path[a], path[b]), coeff * 2)
    return out


def _cubic_terms(poly: PseudoBoolean) -> dict[tuple[int, int, int], float]:
    cubics = {}
    for key in poly.terms:
        if len(key) > 3:
            raise ValueError("polynomial has terms above degree 3; substitute first")
        if len(key) == 3:
            cubics[key] = poly.terms[key]
    return cubics


def plan_reduction(
    poly: PseudoBoolean, net: PowerNetwork, obs: Observation
) -> ReductionPlan:
    """Choose the substitutions that collapse every cubic term exactly once.

    Pair substitutions are decided first, one decision per CB ``n`` at level
    ``d >= 2``: if the number of discrepant (LOW) sensors below ``n``
    exceeds ``d - 1``, all ancestor pairs of ``n`` are collapsed through
    shared pair ancillas; otherwise each discrepant path through ``n`` gets
    a private sensor substitution at that level.  Paths are then processed
    in sensor order, levels from the leaf inward, so every cubic term is
    owned by the substitution at its deeper CB.
    """
    check_observation(net, obs)
    reg = poly.registry
    cubics = _cubic_terms(poly)
    for key in cubics:
        roles = sorted(reg.role(i)[0] for i in key)
        if roles != ["cb", "cb", "sensor"]:
            raise ValueError(f"unexpected cubic term {key}; not of the y*x*x shape")

    discrepant = [i for i in range(1, net.sensor_count + 1) if obs.bits[i - 1] == 0]
    low_below = {}
    for i in discrepant:
        for cb in net.path(i):
            low_below[cb] = low_below.get(cb, 0) + 1

    # Pair-substituted CBs: strictly more discrepant sensors below than the
    # d-1 ancestor pairs a shared ancilla set would cost.
    pair_cbs = set()
    for cb, count in low_below.items():
        d = net.level_of(cb)
        if d >= 2 and count > d - 1:
            pair_cbs.add(cb)

    subs: list[tuple[str, int, int, list]] = []  # (kind, u, v, collapsed keys)
    owner: dict[tuple[int, int, int], int] = {}

    for cb in sorted(pair_cbs):
        d = net.level_of(cb)
        ancestors = net.path(net.sensors_under(cb)[0])[: d - 1]
        for anc in ancestors:
            u, v = reg.x(cb), reg.x(anc)
            collapsed = []
            for i in net.sensors_under(cb):
                if obs.bits[i - 1] != 0:
                    continue
                key = tuple(sorted((reg.y(i), u, v)))
                collapsed.append(key)
                owner[key] = len(subs)
            subs.append(("pair", u, v, collapsed))

    for i in discrepant:
        path = net.path(i)
        yi = reg.y(i)
        for d in range(net.depth, 1, -1):
            cb = path[d - 1]
            if cb in pair_cbs:
                continue
            u = reg.x(cb)
            collapsed = []
            for e in range(d - 1):
                key = tuple(sorted((yi, u, reg.x(path[e]))))
                if key not in owner:
                    collapsed.append(key)
                    owner[key] = len(subs)
            if collapsed:
                subs.append(("sensor", yi, u, collapsed))

    missing = set(cubics) - set(owner)
    if missing:
        raise ValueError(f"planner left cubic terms uncollapsed: {sorted(missing)}")

    n_anc = len(subs)
    ext = reg.with_ancillas(n_anc)
    planned = tuple(
        Substitution(kind, u, v, ext.ancilla(k), tuple(collapsed))
        for k, (kind, u, v, collapsed) in enumerate(subs)
    )
    return ReductionPlan(planned)


def apply_plan(poly: PseudoBoolean, plan: ReductionPlan) -> PseudoBoolean:
    """Collapse the planned cubic terms onto their ancillas (no gadgets yet)."""
    reg = poly.registry.with_ancillas(plan.n_ancilla)
    out = PseudoBoolean(reg)
    out.constant = poly.constant
    owner = {}
    for sub in plan.substitutions:
        for key in sub.collapses:
            owner[key] = sub
    for key, coeff in poly.terms.items():
        if len(key) < 3:
            out.add_term(key, coeff)
            continue
        sub = owner.get(key)
        if sub is None:
            raise ValueError(f"cubic term {key} has no owning substitution")
        (third,) = [i for i in key if i not in (sub.u, sub.v)]
        out.add_term((third, sub.ancilla), coeff)
    return out


def ancilla_gadget(
    u: int, v: int, a: int, weight: float, registry: VariableRegistry
) -> PseudoBoolean:
    """Penalty ``weight * (uv - 2ua - 2va + 3a)``: zero iff ``a == u*v``."""
    if weight <= 0:
        raise ValueError("gadget weight must be positive")
    poly = PseudoBoolean(registry)
    poly.add_term((u, v), weight)
    poly.add_term((u, a), -2.0 * weight)
    poly.add_term((v, a), -2.0 * weight)
    poly.add_term((a,), 3.0 * weight)
    return poly


def gadget_weights(reduced: PseudoBoolean, plan: ReductionPlan,
                   params: PenaltyParams) -> list[float]:
    """Per-ancilla gadget weights.

    Default: one plus the summed magnitude of the reduced terms carrying the
    ancilla, so any energy the ancilla terms could save is strictly smaller
    than the gadget penalty for setting ``a != u*v``.
    """
    if params.lambda_ancilla is not None:
        return [params.lambda_ancilla] * plan.n_ancilla
    weights = []
    for sub in plan.substitutions:
        mag = sum(
            abs(c) for key, c in reduced.terms.items() if sub.ancilla in key
        )
        weights.append(1.0 + mag)
    return weights


def _fold_to_qubo(poly: PseudoBoolean) -> Qubo:
    if poly.degree() > 2:
        raise ValueError("polynomial is not quadratic")
    terms: dict[tuple[int, int], float] = {}
    for key, coeff in poly.terms.items():
        ij = (key[0], key[0]) if len(key) == 1 else (key[0], key[1])
        terms[ij] = terms.get(ij, 0.0) + coeff
    terms = {ij: c for ij, c in terms.items() if c != 0.0}
    return Qubo(poly.registry.size, terms, poly.constant, poly.registry)


def quadratize(
    problem: PseudoBoolean,
    net: PowerNetwork,
    obs: Observation,
    params: PenaltyParams,
) -> Qubo:
    """Reduce the diagnosis cost to a Qubo with the same global minimizers.

    The (x, y) projections of the Qubo's minimizers are exactly the
    minimum-fault consistent assignments, and the minimum value equals the
    minimum of the original cost (constants from the expansions accumulate
    in the offset).
    """
    poly = substitute_high_readout(problem, net, obs)
    poly = substitute_low_readout(poly, net, obs)
    plan = plan_reduction(poly, net, obs)
    reduced = apply_plan(poly, plan)
    for sub, w in zip(plan.substitutions, gadget_weights(reduced, plan, params)):
        reduced.add(ancilla_gadget(sub.u, sub.v, sub.ancilla, w, reduced.registry))
    return _fold_to_qubo(reduced)


def compile_instance(
    net: PowerNetwork, obs: Observation, params: PenaltyParams
) -> tuple[Qubo, ReductionPlan]:
    """Build the cost and quadratize it; also returns the reduction plan."""
    problem = build_problem(net, obs, params)
    poly = substitute_high_readout(problem, net, obs)
    poly = substitute_low_readout(poly, net, obs)
    plan = plan_reduction(poly, net, obs)
    reduced = apply_plan(poly, plan)
    for sub, w in zip(plan.substitutions, gadget_weights(reduced, plan, params)):
        reduced.add(ancilla_gadget(sub.u, sub.v, sub.ancilla, w, reduced.registry))
    return _fold_to_qubo(reduced), plan


def substituted_problem(
    net: PowerNetwork, obs: Observation, params: PenaltyParams
) -> PseudoBoolean:
    """The cost after both readout substitutions, before ancilla reduction."""
    problem = build_problem(net, obs, params)
    poly = substitute_high_readout(problem, net, obs)
    return substitute_low_readout(poly, net, obs)
