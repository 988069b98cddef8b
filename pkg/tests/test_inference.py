from __future__ import annotations

import numpy as np
import pytest

from qualbn.errors import ImpossibleEvidenceError, OracleTooLargeError, StructuralError
from qualbn.inference import (
    Factor,
    all_marginals,
    d_separated,
    d_separated_sets,
    factor_marginalize,
    factor_product,
    factor_reduce,
    joint_enumerate,
    query,
)
from qualbn.model import Deterministic, ExplicitCpt, Network, NodeDef

from helpers import random_evidence, random_network


def binary(node_id, table, parents=()):
    return NodeDef(node_id, ("false", "true"), ExplicitCpt(table), parents=tuple(parents))


@pytest.fixture()
def chain_net() -> Network:
    # P(A=t)=0.3, P(B=t|A=t)=0.9, P(B=t|A=f)=0.2
    return Network(
        nodes=(
            binary("A", [[0.7, 0.3]]),
            binary("B", [[0.8, 0.2], [0.1, 0.9]], parents=("A",)),
        )
    )


# ---------------------------------------------------------------------------
# Factors
# ---------------------------------------------------------------------------

def test_factor_shape_must_match_scope():
    with pytest.raises(StructuralError):
        Factor(("A",), np.ones((2, 2)))


def test_factor_rejects_negative_values():
    with pytest.raises(StructuralError):
        Factor(("A",), np.array([0.5, -0.1]))


def test_factor_product_aligns_axes():
    a = Factor(("X",), np.array([0.25, 0.75]))
    b = Factor(("Y", "X"), np.array([[0.1, 0.2], [0.3, 0.4]]))
    product = factor_product(a, b)
    assert product.scope == ("X", "Y")
    # product[x, y] = a[x] * b[y, x]
    expected = np.array([[0.25 * 0.1, 0.25 * 0.3], [0.75 * 0.2, 0.75 * 0.4]])
    assert np.allclose(product.values, expected)


def test_factor_marginalize_and_reduce():
    f = Factor(("X", "Y"), np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert np.allclose(factor_marginalize(f, "Y").values, [0.3, 0.7])
    reduced = factor_reduce(f, "X", 1)
    assert reduced.scope == ("Y",)
    assert np.allclose(reduced.values, [0.3, 0.4])


# ---------------------------------------------------------------------------
# query / joint_enumerate
# ---------------------------------------------------------------------------

def test_hand_bayes_chain(chain_net):
    # oracle for the oracle: P(A=t | B=t) = 0.3*0.9 / (0.3*0.9 + 0.7*0.2)
    expected = 0.27 / 0.41
    assert query(chain_net, "A", {"B": "true"}).p("true") == pytest.approx(expected, abs=1e-12)
    assert joint_enumerate(chain_net, "A", {"B": "true"}).p("true") == pytest.approx(
        expected, abs=1e-12
    )


def test_root_prior_returned_verbatim(resp_net):
    post = query(resp_net, "VirusEntry")
    assert post.probabilities == tuple(resp_net.cpt("VirusEntry")[0])


def test_observed_target_is_point_mass(chain_net):
    post = query(chain_net, "B", {"B": "true"})
    assert post.probabilities == (0.0, 1.0)


def test_observed_target_still_checks_evidence_consistency():
    net = Network(
        nodes=(
            binary("A", [[1.0, 0.0]]),
            binary("B", [[0.5, 0.5], [0.5, 0.5]], parents=("A",)),
        )
    )
    with pytest.raises(ImpossibleEvidenceError):
        query(net, "A", {"A": "true"})


def test_impossible_evidence_names_the_evidence(xor_net):
    with pytest.raises(ImpossibleEvidenceError) as exc_info:
        query(
            xor_net,
            "CauseB",
            {"CauseA": "true", "CauseB": "true", "ExactlyOne": "true"},
        )
    message = str(exc_info.value)
    assert "CauseA=true" in message and "ExactlyOne=true" in message


def test_unknown_node_and_state_are_errors(chain_net):
    with pytest.raises(StructuralError, match="unknown node"):
        query(chain_net, "Nope")
    with pytest.raises(StructuralError, match="unknown state"):
        query(chain_net, "A", {"B": "nope"})


def test_deterministic_chain_posteriors_are_zero_one():
    net = Network(
        nodes=(
            binary("A", [[0.4, 0.6]]),
            NodeDef("B", ("false", "true"), Deterministic(("true", "false")), parents=("A",)),
        )
    )
    post = joint_enumerate(net, "B", {"A": "true"})
    assert post.probabilities == (1.0, 0.0)
    assert query(net, "B", {"A": "true"}).probabilities == (1.0, 0.0)


def test_oracle_cap_enforced(resp_net):
    with pytest.raises(OracleTooLargeError, match="exceeds cap"):
        joint_enumerate(resp_net, "Death", cap=10)


def test_query_matches_oracle_on_random_networks():
    rng = np.random.default_rng(2024)
    for _ in range(25):
        net = random_network(rng)
        evidence = random_evidence(rng, net)
        for target in net.node_ids:
            ve = query(net, target, evidence)
            enum = joint_enumerate(net, target, evidence)
            diff = np.max(np.abs(ve.as_array() - enum.as_array()))
            assert diff <= 1e-9


def test_posteriors_normalized(resp_net):
    rng = np.random.default_rng(5)
    for _ in range(10):
        net = random_network(rng)
        evidence = random_evidence(rng, net)
        for post in all_marginals(net, evidence):
            assert abs(sum(post.probabilities) - 1.0) <= 1e-9


def test_elimination_orders_agree():
    rng = np.random.default_rng(11)
    for _ in range(20):
        net = random_network(rng)
        evidence = random_evidence(rng, net)
        for target in net.node_ids:
            a = query(net, target, evidence, heuristic="min_degree")
            b = query(net, target, evidence, heuristic="declared")
            assert np.max(np.abs(a.as_array() - b.as_array())) <= 1e-12


def test_all_marginals_observed_nodes_are_points(resp_net):
    marginals = {m.node: m for m in all_marginals(resp_net, {"Death": "true"})}
    assert marginals["Death"].probabilities == (0.0, 1.0)


def test_all_marginals_empty_evidence_match_enumeration(resp_net):
    for post in all_marginals(resp_net):
        enum = joint_enumerate(resp_net, post.node)
        assert np.max(np.abs(post.as_array() - enum.as_array())) <= 1e-9


def test_all_marginals_full_evidence_all_points(chain_net):
    marginals = all_marginals(chain_net, {"A": "false", "B": "true"})
    assert [m.probabilities for m in marginals] == [(1.0, 0.0), (0.0, 1.0)]


# ---------------------------------------------------------------------------
# d-separation
# ---------------------------------------------------------------------------

def _chain3() -> Network:
    return Network(
        nodes=(
            binary("A", [[0.5, 0.5]]),
            binary("B", [[0.9, 0.1], [0.2, 0.8]], parents=("A",)),
            binary("C", [[0.9, 0.1], [0.2, 0.8]], parents=("B",)),
        )
    )


def _collider() -> Network:
    return Network(
        nodes=(
            binary("A", [[0.5, 0.5]]),
            binary("B", [[0.5, 0.5]]),
            binary(
                "C",
                [[0.9, 0.1], [0.6, 0.4], [0.3, 0.7], [0.2, 0.8]],
                parents=("A", "B"),
            ),
            binary("D", [[0.9, 0.1], [0.2, 0.8]], parents=("C",)),
        )
    )


def test_chain_blocked_by_middle():
    net = _chain3()
    assert d_separated(net, "A", "C", {"B"}) is True
    assert d_separated(net, "A", "C") is False


def test_collider_rules():
    net = _collider()
    assert d_separated(net, "A", "B") is True
    assert d_separated(net, "A", "B", {"C"}) is False
    assert d_separated(net, "A", "B", {"D"}) is False  # descendant of collider


def test_fork_blocked_by_root():
    net = Network(
        nodes=(
            binary("R", [[0.5, 0.5]]),
            binary("X", [[0.9, 0.1], [0.2, 0.8]], parents=("R",)),
            binary("Y", [[0.7, 0.3], [0.4, 0.6]], parents=("R",)),
        )
    )
    assert d_separated(net, "X", "Y") is False
    assert d_separated(net, "X", "Y", {"R"}) is True


def test_d_separation_argument_validation(chain_net):
    with pytest.raises(StructuralError):
        d_separated(chain_net, "A", "A")
    with pytest.raises(StructuralError):
        d_separated(chain_net, "A", "B", {"A"})
    with pytest.raises(StructuralError):
        d_separated(chain_net, "A", "Ghost")


def test_d_separated_sets_overlap_is_dependent(chain_net):
    assert d_separated_sets(chain_net, {"A"}, {"A", "B"}) is False


def test_structural_separation_implies_numeric_invariance():
    # Whenever d-separation holds, no evidence on x may move y's posterior.
    rng = np.random.default_rng(99)
    checked = 0
    for _ in range(20):
        net = random_network(rng, max_nodes=6)
        ids = list(net.node_ids)
        for _ in range(6):
            x, y = rng.choice(len(ids), size=2, replace=False)
            x, y = ids[int(x)], ids[int(y)]
            rest = [n for n in ids if n not in (x, y)]
            k = int(rng.integers(0, len(rest) + 1))
            given = {rest[int(i)] for i in rng.choice(len(rest), size=k, replace=False)} if k else set()
            if not d_separated(net, x, y, given):
                continue
            checked += 1
            given_evidence = {
                g: net.node(g).states[int(rng.integers(0, net.card(g)))] for g in given
            }
            base = query(net, y, given_evidence).as_array()
            for state in net.node(x).states:
                moved = query(net, y, {**given_evidence, x: state}).as_array()
                assert np.max(np.abs(moved - base)) <= 1e-9
    assert checked >= 5  # the sweep must actually find separated pairs
