"""Discrete Bayesian network data model.

A :class:`Network` is an immutable DAG of discrete nodes. Each node carries a
local probability structure: an explicit conditional probability table, a
noisy-OR gate, or a deterministic function of its parents. Local structures
expand to explicit tables on demand; everything downstream (inference,
checking, export) consumes the expanded form.

Row convention used throughout the package: the row index for a parent-state
combination is row-major over the parents as declared, first parent slowest.
The order in which a node's states are declared is semantically meaningful:
sign analysis treats it as ascending (e.g. none < mild < severe).

Probability rows whose sum is within ``ROW_SUM_TOL`` of 1 are renormalized
exactly at load: the stored exact rows are rationals summing to exactly 1,
and the float table is the correctly rounded view of those rationals. This
keeps float round-trip noise out of inference and makes the prior exporter's
exactness guarantees possible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import StructuralError

ROW_SUM_TOL = 1e-9

ExactRow = tuple[Fraction, ...]


def _frozen_array(values, *, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ExplicitCpt:
    """Conditional probability table: one row per parent-state combination.

    ``table`` has shape (n_rows, n_states); rows are ordered row-major over
    the parents as declared, first parent slowest. Values are kept as given;
    validation and normalization happen at the network level.
    """

    table: np.ndarray

    def __post_init__(self):
        arr = np.array(self.table, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise StructuralError("cpt table must be rows x states")
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)

    @property
    def n_rows(self) -> int:
        return int(self.table.shape[0])

    @property
    def n_states(self) -> int:
        return int(self.table.shape[1])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExplicitCpt)
            and self.table.shape == other.table.shape
            and bool(np.array_equal(self.table, other.table))
        )


@dataclass(frozen=True)
class NoisyOr:
    """Noisy-OR gate for a binary child of binary parents (states false,true).

    Each parent in its true state independently activates the child with its
    activation probability; ``leak`` activates the child regardless. The
    expansion satisfies, exactly in float arithmetic,

        P(child=false | x) = (1 - leak) * prod over active parents of (1 - p_i)
    """

    activation: tuple[float, ...]
    leak: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "activation", tuple(float(p) for p in self.activation))
        object.__setattr__(self, "leak", float(self.leak))
        for p in self.activation:
            if not 0.0 <= p <= 1.0:
                raise StructuralError(f"noisy-or activation {p!r} outside [0, 1]")
        if not 0.0 <= self.leak <= 1.0:
            raise StructuralError(f"noisy-or leak {self.leak!r} outside [0, 1]")


@dataclass(frozen=True)
class Deterministic:
    """Deterministic function of the parents: one child state name per row.

    ``outcomes`` lists the certain child state for every parent-state
    combination, in the package-wide row order. Constraint nodes (children
    added to enforce a relationship over their parents) are the typical use;
    the constraint is applied by observing the child in its satisfied state.
    """

    outcomes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(str(s) for s in self.outcomes))


LocalStructure = Union[ExplicitCpt, NoisyOr, Deterministic]


@dataclass(frozen=True)
class NodeDef:
    """One discrete chance node: identity, ordered states, parents, local structure."""

    id: str
    states: tuple[str, ...]
    local: LocalStructure
    parents: tuple[str, ...] = ()
    display_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "parents", tuple(str(p) for p in self.parents))
        if not self.display_name:
            object.__setattr__(self, "display_name", self.id)
        if not self.id:
            raise StructuralError("node id must be non-empty")
        if len(self.states) < 2:
            raise StructuralError(f"node {self.id}: needs at least 2 states")
        if any(not s for s in self.states):
            raise StructuralError(f"node {self.id}: state names must be non-empty")
        if len(set(self.states)) != len(self.states):
            raise StructuralError(f"node {self.id}: duplicate state names")
        if len(set(self.parents)) != len(self.parents):
            raise StructuralError(f"node {self.id}: duplicate parents")
        if self.id in self.parents:
            raise StructuralError(f"node {self.id}: cannot be its own parent")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise StructuralError(f"unknown state {state!r} for node {self.id}") from None


@dataclass(frozen=True)
class Scenario:
    """A named evidence assignment used as a query context."""

    name: str
    evidence: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "evidence", dict(self.evidence))

    def items(self) -> list[tuple[str, str]]:
        return sorted(self.evidence.items())


@dataclass(frozen=True)
class Violation:
    """One violated invariant found by :func:`validate_network`."""

    kind: str  # "dangling-parent" | "cycle" | "local-structure" | "row-count" | "row-sum" | "state-reference"
    node: str | None
    detail: str

    def __str__(self) -> str:
        where = f"node {self.node}: " if self.node else ""
        return f"[{self.kind}] {where}{self.detail}"


def _exact_normalized_rows(table: np.ndarray) -> tuple[ExactRow, ...]:
    """Renormalize each row exactly in rational arithmetic.

    Rows with a zero (or negative) raw sum are passed through unchanged;
    validation reports them.
    """
    rows: list[ExactRow] = []
    for raw in table:
        fr = [Fraction(float(v)) for v in raw]
        total = sum(fr)
        if total <= 0:
            rows.append(tuple(fr))
        else:
            rows.append(tuple(v / total for v in fr))
    return tuple(rows)


def _rows_to_floats(rows: tuple[ExactRow, ...]) -> np.ndarray:
    return _frozen_array([[float(v) for v in row] for row in rows])


def expand_local(node: NodeDef, parent_cards: Sequence[int] | None = None) -> ExplicitCpt:
    """Expand a node's local structure to an explicit table.

    Explicit tables pass through unchanged. ``parent_cards`` (the state count
    of each parent, in order) enables the structural checks that need network
    context; the network always supplies it.
    """
    local = node.local
    if isinstance(local, ExplicitCpt):
        return local

    if isinstance(local, NoisyOr):
        if node.n_states != 2:
            raise StructuralError(f"node {node.id}: noisy-or requires a binary child")
        if len(local.activation) != len(node.parents):
            raise StructuralError(
                f"node {node.id}: noisy-or has {len(local.activation)} activation "
                f"probabilities for {len(node.parents)} parents"
            )
        if parent_cards is not None and any(c != 2 for c in parent_cards):
            raise StructuralError(f"node {node.id}: noisy-or requires binary parents")
        n = len(node.parents)
        table = np.empty((2**n, 2))
        for row, bits in enumerate(itertools.product((0, 1), repeat=n)):
            p_false = 1.0 - local.leak
            for bit, p in zip(bits, local.activation):
                if bit:
                    p_false *= 1.0 - p
            table[row, 0] = p_false
            table[row, 1] = 1.0 - p_false
        return ExplicitCpt(table)

    if isinstance(local, Deterministic):
        n_rows = len(local.outcomes)
        if parent_cards is not None:
            expected = int(np.prod([int(c) for c in parent_cards])) if parent_cards else 1
            if n_rows != expected:
                raise StructuralError(
                    f"node {node.id}: deterministic table has {n_rows} rows, "
                    f"expected {expected}"
                )
        table = np.zeros((n_rows, node.n_states))
        for row, outcome in enumerate(local.outcomes):
            table[row, node.state_index(outcome)] = 1.0
        return ExplicitCpt(table)

    raise StructuralError(f"node {node.id}: unknown local structure {type(local).__name__}")


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable DAG of discrete nodes.

    Construction only requires unique node ids; use :func:`validate_network`
    to surface every violated invariant as data. Queries assume a network
    that validates cleanly.
    """

    nodes: tuple[NodeDef, ...]
    name: str = ""
    description: str = ""
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        by_id: dict[str, NodeDef] = {}
        for node in self.nodes:
            if node.id in by_id:
                raise StructuralError(f"duplicate node id {node.id!r}")
            by_id[node.id] = node
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_cpt_cache", {})
        object.__setattr__(self, "_exact_cache", {})
        children: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for node in self.nodes:
            for parent in node.parents:
                if parent in children:
                    children[parent].append(node.id)
        object.__setattr__(self, "_children", {k: tuple(v) for k, v in children.items()})

    # -- structure ----------------------------------------------------------

    def node(self, node_id: str) -> NodeDef:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise StructuralError(f"unknown node {node_id!r}") from None

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._by_id

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def card(self, node_id: str) -> int:
        return self.node(node_id).n_states

    def children(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return self._children[node_id]

    def arcs(self) -> tuple[tuple[str, str], ...]:
        return tuple((p, n.id) for n in self.nodes for p in n.parents)

    def parent_cards(self, node_id: str) -> tuple[int, ...]:
        return tuple(self.card(p) for p in self.node(node_id).parents)

    def row_index(self, node_id: str, parent_states: Sequence[str]) -> int:
        """Row index for a parent-state combination (first parent slowest)."""
        node = self.node(node_id)
        if len(parent_states) != len(node.parents):
            raise StructuralError(
                f"node {node_id}: expected {len(node.parents)} parent states, "
                f"got {len(parent_states)}"
            )
        idx = 0
        for parent, state in zip(node.parents, parent_states):
            idx = idx * self.card(parent) + self.node(parent).state_index(state)
        return idx

    def row_states(self, node_id: str, row: int) -> tuple[str, ...]:
        """Inverse of :meth:`row_index`."""
        node = self.node(node_id)
        states: list[str] = []
        for parent in reversed(node.parents):
            pnode = self.node(parent)
            states.append(pnode.states[row % pnode.n_states])
            row //= pnode.n_states
        return tuple(reversed(states))

    # -- probabilities ------------------------------------------------------

    def exact_cpt(self, node_id: str) -> tuple[ExactRow, ...]:
        """Expanded CPT rows as exact rationals, each summing to exactly 1."""
        cached = self._exact_cache.get(node_id)
        if cached is None:
            node = self.node(node_id)
            expanded = expand_local(node, self.parent_cards(node_id))
            cached = _exact_normalized_rows(expanded.table)
            self._exact_cache[node_id] = cached
        return cached

    def cpt(self, node_id: str) -> np.ndarray:
        """Expanded, exactly renormalized CPT as a read-only float table."""
        cached = self._cpt_cache.get(node_id)
        if cached is None:
            cached = _rows_to_floats(self.exact_cpt(node_id))
            self._cpt_cache[node_id] = cached
        return cached


def topological_order(net: Network) -> list[str]:
    """Node ids with every parent before its children; declaration order breaks ties."""
    placed: set[str] = set()
    order: list[str] = []
    pending = list(net.nodes)
    while pending:
        progressed = False
        remaining: list[NodeDef] = []
        for node in pending:
            if all(p in placed for p in node.parents if p in net):
                placed.add(node.id)
                order.append(node.id)
                progressed = True
            else:
                remaining.append(node)
        pending = remaining
        if not progressed:
            cycle = _find_cycle(net, [n.id for n in pending])
            names = ", ".join(sorted(cycle))
            raise StructuralError(f"cycle among nodes {{{names}}}")
    return order


def _find_cycle(net: Network, candidates: list[str]) -> list[str]:
    """Return the node ids of one directed cycle among ``candidates``.

    Every candidate left over by the topological sort has at least one
    unplaced parent, so walking parent links must revisit a node.
    """
    in_candidates = set(candidates)
    pos: dict[str, int] = {}
    path: list[str] = []
    node = candidates[0]
    while node not in pos:
        pos[node] = len(path)
        path.append(node)
        node = next(p for p in net.node(node).parents if p in in_candidates)
    return path[pos[node]:]


def validate_network(net: Network) -> list[Violation]:
    """Report every violated invariant; an empty list means the network is valid.

    Violations come out in a deterministic order: reference problems in
    declaration order, then any cycle, then per-node local-structure problems
    in topological order (declaration order when a cycle prevents sorting).
    """
    violations: list[Violation] = []

    resolvable: set[str] = set()
    for node in net.nodes:
        dangling = [p for p in node.parents if p not in net]
        for parent in dangling:
            violations.append(
                Violation("dangling-parent", node.id, f"parent {parent!r} does not exist")
            )
        if not dangling:
            resolvable.add(node.id)

    node_order = [n.id for n in net.nodes]
    try:
        node_order = topological_order(net)
    except StructuralError as exc:
        violations.append(Violation("cycle", None, str(exc)))

    for node_id in node_order:
        if node_id not in resolvable:
            continue
        violations.extend(_validate_local(net, net.node(node_id)))
    return violations


def _validate_local(net: Network, node: NodeDef) -> list[Violation]:
    out: list[Violation] = []
    parent_cards = net.parent_cards(node.id)
    expected_rows = 1
    for c in parent_cards:
        expected_rows *= c
    local = node.local

    if isinstance(local, ExplicitCpt):
        if local.n_states != node.n_states:
            out.append(
                Violation(
                    "row-count",
                    node.id,
                    f"table has {local.n_states} columns for {node.n_states} states",
                )
            )
            return out
        if local.n_rows != expected_rows:
            out.append(
                Violation(
                    "row-count",
                    node.id,
                    f"table has {local.n_rows} rows, expected {expected_rows}",
                )
            )
            return out
        for row_idx, row in enumerate(local.table):
            ctx = ",".join(net.row_states(node.id, row_idx)) or "-"
            if np.any(~np.isfinite(row)) or np.any(row < 0):
                out.append(
                    Violation(
                        "row-sum",
                        node.id,
                        f"row {row_idx} ({ctx}) has negative or non-finite entries",
                    )
                )
                continue
            total = float(np.sum(row))
            if abs(total - 1.0) > ROW_SUM_TOL:
                out.append(
                    Violation(
                        "row-sum",
                        node.id,
                        f"row {row_idx} ({ctx}) sums to {total:.10g}, expected 1",
                    )
                )
        return out

    if isinstance(local, NoisyOr):
        if node.n_states != 2:
            out.append(Violation("local-structure", node.id, "noisy-or child must be binary"))
        for parent, card in zip(node.parents, parent_cards):
            if card != 2:
                out.append(
                    Violation(
                        "local-structure",
                        node.id,
                        f"noisy-or parent {parent} must be binary",
                    )
                )
        if len(local.activation) != len(node.parents):
            out.append(
                Violation(
                    "local-structure",
                    node.id,
                    f"{len(local.activation)} activation probabilities for "
                    f"{len(node.parents)} parents",
                )
            )
        return out

    if isinstance(local, Deterministic):
        if len(local.outcomes) != expected_rows:
            out.append(
                Violation(
                    "row-count",
                    node.id,
                    f"deterministic table has {len(local.outcomes)} rows, "
                    f"expected {expected_rows}",
                )
            )
        for row_idx, outcome in enumerate(local.outcomes):
            if outcome not in node.states:
                out.append(
                    Violation(
                        "state-reference",
                        node.id,
                        f"row {row_idx} maps to unknown state {outcome!r}",
                    )
                )
        return out

    out.append(Violation("local-structure", node.id, f"unknown local structure {type(local).__name__}"))
    return out


def validate_scenario(net: Network, scenario: Scenario) -> list[str]:
    """Problems with a scenario's evidence against a network (empty = fine)."""
    problems: list[str] = []
    for node_id, state in scenario.items():
        if node_id not in net:
            problems.append(f"scenario {scenario.name}: unknown node {node_id}")
        elif state not in net.node(node_id).states:
            problems.append(
                f"scenario {scenario.name}: unknown state {state!r} for node {node_id}"
            )
    return problems


def networks_equivalent(a: Network, b: Network) -> bool:
    """Order-insensitive semantic equality (same nodes, structures, metadata)."""
    if (a.name, a.description, a.provenance) != (b.name, b.description, b.provenance):
        return False
    if set(a.node_ids) != set(b.node_ids):
        return False
    for node_id in a.node_ids:
        na, nb = a.node(node_id), b.node(node_id)
        if (na.display_name, na.states, na.parents) != (nb.display_name, nb.states, nb.parents):
            return False
        if type(na.local) is not type(nb.local) or na.local != nb.local:
            return False
    return True
