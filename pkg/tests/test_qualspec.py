from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qualbn.errors import SuiteBindError, SuiteParseError
from qualbn.model import Scenario
from qualbn.suite import (
    Argmax,
    ArcSign,
    AssertionSuite,
    Compare,
    Direction,
    Invariant,
    Magnitude,
    Range,
    bind_suite,
    parse_suite,
    serialize_suite,
)


def issues_of(text: str):
    with pytest.raises(SuiteParseError) as exc_info:
        parse_suite(text)
    return exc_info.value.issues


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_scenario_plus_direction():
    suite = parse_suite(
        "scenario death: Death=true\n"
        "assert direction VirusEntry=true under death increases\n"
    )
    assert len(suite.scenarios) == 1
    assert suite.scenarios[0].evidence == {"Death": "true"}
    (a,) = suite.assertions
    assert isinstance(a, Direction)
    assert (a.node, a.state, a.scenario, a.expected) == ("VirusEntry", "true", "death", "increases")
    assert a.baseline == "prior"
    assert a.eps is None


def test_empty_document_is_valid_empty_suite():
    suite = parse_suite("")
    assert suite.scenarios == () and suite.assertions == ()


def test_comments_and_blank_lines_ignored():
    suite = parse_suite("# a comment\n\n   \nscenario s: X=a  # trailing\n")
    assert suite.scenarios[0].evidence == {"X": "a"}


def test_every_assertion_kind_parses():
    text = (
        "scenario s1: X=a\n"
        "scenario s2: X=b, Y=c\n"
        "assert direction X=a under s1 vs s2 decreases eps 0.01\n"
        "assert compare P(X=a) under s1 ~ eps 0.02 under s2\n"
        "assert compare P(X=a) under s1 <= under s2\n"
        "assert range X=a under s1 in [0.25, 0.75]\n"
        "assert argmax X under s1 is a\n"
        "assert invariant Y under s1 eps 0.005 dsep\n"
        "assert sign X -> Y +\n"
        "assert magnitude X=a under s1 > under s2\n"
    )
    suite = parse_suite(text)
    kinds = [a.kind for a in suite.assertions]
    assert kinds == [
        "direction",
        "compare",
        "compare",
        "range",
        "argmax",
        "invariant",
        "sign",
        "magnitude",
    ]
    direction = suite.assertions[0]
    assert direction.baseline == "s2" and direction.eps == 0.01
    invariant = suite.assertions[5]
    assert invariant.require_dsep is True and invariant.eps == 0.005


def test_range_lo_greater_than_hi_is_error():
    issues = issues_of("scenario s: X=a\nassert range X=true under s in [0.4, 0.2]\n")
    assert any("lo" in i.message and "hi" in i.message for i in issues)
    assert issues[0].line == 2


def test_range_bounds_must_be_probabilities():
    issues = issues_of("scenario s: X=a\nassert range X=true under s in [0.5, 1.5]\n")
    assert any("[0, 1]" in i.message for i in issues)


def test_duplicate_scenario_name_is_error():
    issues = issues_of("scenario s: X=a\nscenario s: X=b\n")
    assert any("duplicate scenario" in i.message for i in issues)


def test_prior_scenario_name_is_reserved():
    issues = issues_of("scenario prior: X=a\n")
    assert any("reserved" in i.message for i in issues)


def test_unknown_assertion_kind_reported_with_line():
    issues = issues_of("assert wiggle X under s\n")
    assert issues[0].line == 1
    assert "unknown assertion kind" in issues[0].message


def test_malformed_probability_literal_reported_with_column():
    issues = issues_of("scenario s: X=a\nassert range X=a under s in [0.4.2, 0.5]\n")
    (issue,) = issues
    assert issue.line == 2
    assert issue.column > 1
    assert "0.4.2" in issue.message


def test_eps_outside_open_interval_rejected():
    assert any("(0, 0.5)" in i.message for i in issues_of(
        "scenario s: X=a\nassert invariant X under s eps 0.5\n"
    ))
    assert any("(0, 0.5)" in i.message for i in issues_of(
        "scenario s: X=a\nassert invariant X under s eps 0\n"
    ))


def test_compare_eps_requires_approx_relation():
    issues = issues_of("scenario s: X=a\nassert compare P(X=a) under s < eps 0.1 under prior\n")
    assert any("~" in i.message for i in issues)


def test_undeclared_scenario_reference_is_error():
    issues = issues_of("assert argmax X under missing is a\n")
    assert any("undeclared scenario 'missing'" in i.message for i in issues)


def test_prior_scenario_always_available():
    suite = parse_suite("assert argmax X under prior is a\n")
    assert suite.assertions[0].scenario == "prior"


def test_multiple_errors_all_reported():
    text = "scenario s: X=a\nscenario s: X=a\nassert nope X\nassert range X=a under s in [0.9, 0.1]\n"
    issues = issues_of(text)
    assert len(issues) == 3
    assert [i.line for i in issues] == [2, 3, 4]


def test_duplicate_evidence_node_in_scenario_is_error():
    issues = issues_of("scenario s: X=a, X=b\n")
    assert any("assigned twice" in i.message for i in issues)


# ---------------------------------------------------------------------------
# Round-trip and totality
# ---------------------------------------------------------------------------

_ident = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True).filter(
    lambda s: s != "prior"
)
_eps_values = st.sampled_from([0.001, 0.01, 0.05, 0.1, 0.25])


@st.composite
def suites(draw) -> AssertionSuite:
    names = draw(st.lists(_ident, min_size=1, max_size=4, unique=True))
    scenarios = []
    for name in names:
        nodes = draw(st.lists(_ident, min_size=1, max_size=3, unique=True))
        scenarios.append(Scenario(name, {n: draw(_ident) for n in nodes}))
    scenario_names = names + ["prior"]
    any_scenario = st.sampled_from(scenario_names)

    assertions = []
    for _ in range(draw(st.integers(min_value=0, max_value=6))):
        kind = draw(st.integers(min_value=0, max_value=6))
        node, state = draw(_ident), draw(_ident)
        if kind == 0:
            assertions.append(
                Direction(
                    node, state, draw(any_scenario),
                    draw(st.sampled_from(["increases", "decreases", "unchanged"])),
                    baseline=draw(any_scenario),
                    eps=draw(st.none() | _eps_values),
                )
            )
        elif kind == 1:
            relation = draw(st.sampled_from(["<", ">", "<=", ">=", "~"]))
            eps = draw(_eps_values) if relation == "~" and draw(st.booleans()) else None
            assertions.append(
                Compare(node, state, draw(any_scenario), relation, draw(any_scenario), eps=eps)
            )
        elif kind == 2:
            lo = draw(st.floats(min_value=0, max_value=0.5, allow_nan=False))
            hi = draw(st.floats(min_value=0.5, max_value=1, allow_nan=False))
            assertions.append(Range(node, state, draw(any_scenario), lo, hi))
        elif kind == 3:
            assertions.append(Argmax(node, draw(any_scenario), state))
        elif kind == 4:
            assertions.append(
                Invariant(node, draw(any_scenario), eps=draw(st.none() | _eps_values),
                          require_dsep=draw(st.booleans()))
            )
        elif kind == 5:
            assertions.append(
                ArcSign(node, state, draw(st.sampled_from(["+", "-", "0", "ambiguous"])))
            )
        else:
            assertions.append(
                Magnitude(node, state, draw(any_scenario),
                          draw(st.sampled_from(["<", ">"])), draw(any_scenario))
            )
    return AssertionSuite("generated", tuple(scenarios), tuple(assertions))


@settings(max_examples=150, deadline=None)
@given(suites())
def test_serialize_parse_round_trip(suite):
    reparsed = parse_suite(serialize_suite(suite), name=suite.name)
    assert reparsed.scenarios == suite.scenarios
    assert reparsed.assertions == suite.assertions


def test_bundled_suite_round_trips(resp_suite):
    reparsed = parse_suite(serialize_suite(resp_suite), name=resp_suite.name)
    assert reparsed == resp_suite


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=300))
def test_parser_total_on_arbitrary_text(text):
    try:
        suite = parse_suite(text)
    except SuiteParseError as exc:
        assert exc.issues  # diagnostics, never a bare failure
    else:
        assert isinstance(suite, AssertionSuite)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="asertdc irnagmption<>=[]().,~#+-0123456789\n", max_size=200))
def test_parser_total_on_grammar_like_text(text):
    try:
        parse_suite(text)
    except SuiteParseError:
        pass


# ---------------------------------------------------------------------------
# Binding
# ---------------------------------------------------------------------------

def test_bundled_suite_binds(resp_net, resp_suite):
    bound = bind_suite(resp_suite, resp_net)
    assert bound.net is resp_net


def test_unknown_node_reported_by_name(resp_net):
    suite = parse_suite("scenario s: Deathh=true\nassert argmax Death under s is true\n")
    with pytest.raises(SuiteBindError, match="unknown node Deathh"):
        bind_suite(suite, resp_net)


def test_unknown_state_reported(resp_net):
    suite = parse_suite("assert range Death=perhaps under prior in [0, 1]\n")
    with pytest.raises(SuiteBindError, match="unknown state 'perhaps'"):
        bind_suite(suite, resp_net)


def test_sign_on_missing_arc_names_the_pair(resp_net):
    suite = parse_suite("assert sign MOF -> SaO2 +\n")
    with pytest.raises(SuiteBindError, match="no arc MOF -> SaO2"):
        bind_suite(suite, resp_net)


def test_bind_collects_every_problem(resp_net):
    suite = parse_suite(
        "scenario s: Ghost=true\n"
        "assert argmax Spook under s is x\n"
        "assert sign Death -> MOF +\n"
    )
    with pytest.raises(SuiteBindError) as exc_info:
        bind_suite(suite, resp_net)
    assert len(exc_info.value.problems) == 3
