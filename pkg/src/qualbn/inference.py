"""Exact inference: variable elimination, an enumeration oracle, d-separation.

All operations are pure functions of an immutable :class:`~qualbn.model.Network`
and are safe to call concurrently. Posteriors are renormalized once at the
end of each query; evidence with joint probability zero raises
:class:`~qualbn.errors.ImpossibleEvidenceError` rather than returning NaN.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ImpossibleEvidenceError, OracleTooLargeError, StructuralError
from .model import Network, Scenario, topological_order

DEFAULT_ORACLE_CAP = 2**22

Evidence = Mapping[str, str]


@dataclass(frozen=True)
class Posterior:
    """Distribution over one node's states, in declared state order."""

    node: str
    states: tuple[str, ...]
    probabilities: tuple[float, ...]

    def p(self, state: str) -> float:
        try:
            return self.probabilities[self.states.index(state)]
        except ValueError:
            raise StructuralError(f"unknown state {state!r} for node {self.node}") from None

    def as_array(self) -> np.ndarray:
        return np.array(self.probabilities)

    @property
    def argmax_state(self) -> str:
        return self.states[int(np.argmax(self.probabilities))]


@dataclass(frozen=True, eq=False)
class Factor:
    """Nonnegative table over a set of variables.

    ``values`` has one axis per scope variable, in scope order; flattening in
    C order gives the row-major layout with the first scope variable slowest.
    """

    scope: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != len(self.scope):
            raise StructuralError(
                f"factor over {self.scope} needs {len(self.scope)} axes, got {arr.ndim}"
            )
        if arr.size and (np.any(arr < 0) or np.any(~np.isfinite(arr))):
            raise StructuralError("factor values must be nonnegative and finite")
        object.__setattr__(self, "values", arr)


def factor_product(a: Factor, b: Factor) -> Factor:
    """Pointwise product over the union of the two scopes."""
    scope = a.scope + tuple(v for v in b.scope if v not in a.scope)
    a_vals = a.values.reshape(a.values.shape + (1,) * (len(scope) - len(a.scope)))
    b_in_scope = [v for v in scope if v in b.scope]
    b_vals = np.transpose(b.values, [b.scope.index(v) for v in b_in_scope])
    shape = tuple(
        b_vals.shape[b_in_scope.index(v)] if v in b.scope else 1 for v in scope
    )
    return Factor(scope, a_vals * b_vals.reshape(shape))


def factor_marginalize(f: Factor, var: str) -> Factor:
    axis = f.scope.index(var)
    scope = f.scope[:axis] + f.scope[axis + 1:]
    return Factor(scope, f.values.sum(axis=axis))


def factor_reduce(f: Factor, var: str, state_index: int) -> Factor:
    axis = f.scope.index(var)
    scope = f.scope[:axis] + f.scope[axis + 1:]
    return Factor(scope, np.take(f.values, state_index, axis=axis))


def _as_evidence(net: Network, evidence: Evidence | Scenario | None) -> dict[str, int]:
    """Resolve evidence to state indices, validating every reference."""
    if evidence is None:
        mapping: Mapping[str, str] = {}
    elif isinstance(evidence, Scenario):
        mapping = evidence.evidence
    else:
        mapping = evidence
    resolved: dict[str, int] = {}
    for node_id, state in mapping.items():
        resolved[node_id] = net.node(node_id).state_index(state)
    return resolved


def _evidence_names(net: Network, ev: dict[str, int]) -> dict[str, str]:
    return {n: net.node(n).states[i] for n, i in ev.items()}


def _node_factor(net: Network, node_id: str) -> Factor:
    node = net.node(node_id)
    scope = node.parents + (node_id,)
    shape = net.parent_cards(node_id) + (node.n_states,)
    return Factor(scope, net.cpt(node_id).reshape(shape))


def _elimination_order(
    net: Network, scopes: list[tuple[str, ...]], to_eliminate: set[str], heuristic: str
) -> list[str]:
    decl = {node_id: i for i, node_id in enumerate(net.node_ids)}
    if heuristic == "declared":
        return sorted(to_eliminate, key=lambda v: decl[v])
    if heuristic != "min_degree":
        raise StructuralError(f"unknown elimination heuristic {heuristic!r}")

    neighbors: dict[str, set[str]] = {}
    for scope in scopes:
        for v in scope:
            neighbors.setdefault(v, set()).update(u for u in scope if u != v)
    for v in to_eliminate:
        neighbors.setdefault(v, set())

    remaining = set(to_eliminate)
    order: list[str] = []
    while remaining:
        v = min(remaining, key=lambda u: (len(neighbors[u]), decl[u]))
        order.append(v)
        remaining.discard(v)
        around = neighbors.pop(v)
        for u in around:
            neighbors[u].discard(v)
        for u, w in itertools.combinations(around, 2):
            neighbors[u].add(w)
            neighbors[w].add(u)
    return order


def query(
    net: Network,
    target: str,
    evidence: Evidence | Scenario | None = None,
    *,
    heuristic: str = "min_degree",
) -> Posterior:
    """Exact posterior P(target | evidence) by variable elimination.

    The result is independent of the elimination order; ``heuristic`` selects
    "min_degree" (default) or "declared" purely for testing that independence.
    """
    node = net.node(target)
    ev = _as_evidence(net, evidence)

    factors: list[Factor] = []
    for n in net.nodes:
        f = _node_factor(net, n.id)
        for var, idx in ev.items():
            if var in f.scope:
                f = factor_reduce(f, var, idx)
        factors.append(f)

    to_eliminate = {n.id for n in net.nodes if n.id not in ev and n.id != target}
    order = _elimination_order(net, [f.scope for f in factors], to_eliminate, heuristic)

    for var in order:
        touching = [f for f in factors if var in f.scope]
        rest = [f for f in factors if var not in f.scope]
        product = touching[0]
        for f in touching[1:]:
            product = factor_product(product, f)
        factors = rest + [factor_marginalize(product, var)]

    result = factors[0]
    for f in factors[1:]:
        result = factor_product(result, f)

    z = float(result.values.sum())
    if z <= 0.0:
        raise ImpossibleEvidenceError(_evidence_names(net, ev))

    if target in ev:
        probs = np.zeros(node.n_states)
        probs[ev[target]] = 1.0
    else:
        if result.scope != (target,):
            raise StructuralError(f"residual scope {result.scope!r} after elimination")
        probs = result.values / z
    return Posterior(target, node.states, tuple(float(p) for p in probs))


def all_marginals(
    net: Network,
    evidence: Evidence | Scenario | None = None,
    *,
    heuristic: str = "min_degree",
) -> list[Posterior]:
    """Posterior for every node, in declaration order.

    Observed nodes come back as point distributions on their observed state.
    """
    return [query(net, n.id, evidence, heuristic=heuristic) for n in net.nodes]


def joint_enumerate(
    net: Network,
    target: str,
    evidence: Evidence | Scenario | None = None,
    *,
    cap: int = DEFAULT_ORACLE_CAP,
) -> Posterior:
    """Reference posterior computed by summing the full joint distribution.

    Independent of the variable-elimination path; used as the testing oracle.
    """
    node = net.node(target)
    ev = _as_evidence(net, evidence)

    order = topological_order(net)
    cards = [net.card(n) for n in order]
    total = 1
    for c in cards:
        total *= c
    if total > cap:
        raise OracleTooLargeError(f"joint state space {total} exceeds cap {cap}")

    position = {n: i for i, n in enumerate(order)}
    joint = np.ones(tuple(cards))
    for node_id in order:
        n = net.node(node_id)
        scope = n.parents + (node_id,)
        table = net.cpt(node_id).reshape(net.parent_cards(node_id) + (n.n_states,))
        axes = [position[v] for v in scope]
        perm = np.argsort(axes)
        aligned = np.transpose(table, perm)
        shape = [1] * len(order)
        for axis, size in zip(sorted(axes), aligned.shape):
            shape[axis] = size
        joint = joint * aligned.reshape(shape)

    for var, idx in ev.items():
        axis = position[var]
        mask = np.zeros((joint.shape[axis],))
        mask[idx] = 1.0
        shape = [1] * joint.ndim
        shape[axis] = joint.shape[axis]
        joint = joint * mask.reshape(shape)

    sum_axes = tuple(i for i, n in enumerate(order) if n != target)
    vec = joint.sum(axis=sum_axes)
    z = float(vec.sum())
    if z <= 0.0:
        raise ImpossibleEvidenceError(_evidence_names(net, ev))
    return Posterior(target, node.states, tuple(float(p) for p in vec / z))


def d_separated_sets(
    net: Network,
    xs: set[str],
    ys: set[str],
    given: set[str] | frozenset[str] = frozenset(),
) -> bool:
    """Whether every path between the node sets is blocked given the conditioning set.

    Uses the prune-and-disconnect criterion: repeatedly drop leaf nodes
    outside xs|ys|given, delete edges leaving the conditioning set, then test
    undirected connectivity. Overlapping xs and ys are never separated.
    """
    for node_id in set(xs) | set(ys) | set(given):
        net.node(node_id)
    xs = set(xs) - set(given)
    ys = set(ys) - set(given)
    if not xs or not ys:
        return True  # fully conditioned side: nothing left to vary
    if xs & ys:
        return False

    keep = xs | ys | set(given)
    alive = set(net.node_ids)
    edges = {(p, c) for p, c in net.arcs()}

    changed = True
    while changed:
        changed = False
        for node_id in sorted(alive):
            if node_id in keep:
                continue
            if not any(p == node_id for p, _ in edges):
                alive.discard(node_id)
                edges = {(p, c) for p, c in edges if c != node_id}
                changed = True

    edges = {(p, c) for p, c in edges if p not in given}

    adjacency: dict[str, set[str]] = {n: set() for n in alive}
    for p, c in edges:
        if p in alive and c in alive:
            adjacency[p].add(c)
            adjacency[c].add(p)

    frontier = list(xs & alive)
    seen = set(frontier)
    while frontier:
        current = frontier.pop()
        if current in ys:
            return False
        for nxt in adjacency[current]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return True


def d_separated(net: Network, x: str, y: str, given: set[str] | frozenset[str] = frozenset()) -> bool:
    """Whether x and y are d-separated given the conditioning set."""
    if x == y:
        raise StructuralError("d-separation query needs two distinct nodes")
    if x in given or y in given:
        raise StructuralError("d-separation endpoints cannot be in the conditioning set")
    return d_separated_sets(net, {x}, {y}, set(given))
