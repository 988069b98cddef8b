"""Shared test utilities: random network/evidence generation."""

from __future__ import annotations

import numpy as np

from qualbn.model import ExplicitCpt, Network, NodeDef


def random_network(
    rng: np.random.Generator,
    max_nodes: int = 8,
    max_states: int = 3,
    max_parents: int = 3,
) -> Network:
    """Random DAG with strictly positive CPTs (every evidence set is possible)."""
    n = int(rng.integers(2, max_nodes + 1))
    ids = [f"N{i}" for i in range(n)]
    nodes = []
    cards: list[int] = []
    for i in range(n):
        card = int(rng.integers(2, max_states + 1))
        cards.append(card)
        k = int(rng.integers(0, min(max_parents, i) + 1))
        parent_idx = sorted(rng.choice(i, size=k, replace=False).tolist()) if k else []
        rows = 1
        for j in parent_idx:
            rows *= cards[j]
        table = rng.gamma(1.0, 1.0, size=(rows, card)) + 0.05
        table = table / table.sum(axis=1, keepdims=True)
        nodes.append(
            NodeDef(
                ids[i],
                tuple(f"s{j}" for j in range(card)),
                ExplicitCpt(table),
                parents=tuple(ids[j] for j in parent_idx),
            )
        )
    return Network(tuple(nodes), name="random")


def random_evidence(
    rng: np.random.Generator, net: Network, max_observed: int = 3
) -> dict[str, str]:
    k = int(rng.integers(0, min(max_observed, len(net.nodes)) + 1))
    picked = rng.choice(len(net.nodes), size=k, replace=False) if k else []
    evidence = {}
    for i in picked:
        node = net.nodes[int(i)]
        evidence[node.id] = node.states[int(rng.integers(0, node.n_states))]
    return evidence
