"""Qualitative-behaviour assertion suites: data model, parser, serializer, binder.

A suite is a plain-text document, one statement per line, ``#`` comments:

    scenario <name>: <Node>=<state>[, <Node>=<state>...]
    assert direction <Node>=<state> under <scenario> [vs <scenario>] (increases|decreases|unchanged [eps <e>])
    assert compare P(<Node>=<state>) under <s1> (<|>|<=|>=|~ [eps <e>]) under <s2>
    assert range <Node>=<state> under <scenario> in [<lo>, <hi>]
    assert argmax <Node> under <scenario> is <state>
    assert invariant <Node> under <scenario> [eps <e>] [dsep]
    assert sign <Parent> -> <Child> (+|-|0|ambiguous)
    assert magnitude <Node>=<state> under <s1> (<|>) under <s2>

Identifiers (node ids, state names, scenario names) match
``[A-Za-z_][A-Za-z0-9_]*``. The scenario name ``prior`` is reserved for the
empty evidence set and is always available. Parsing is total: any input
yields either a suite or a full list of diagnostics, never a crash.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import ParseIssue, SuiteBindError, SuiteParseError
from .model import Network, Scenario

PRIOR_SCENARIO = "prior"
DEFAULT_EPS = 1e-6

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_NUM = r"[-+0-9.eE]+"


@dataclass(frozen=True)
class Direction:
    """Posterior of a state moves the stated way versus a baseline scenario."""

    node: str
    state: str
    scenario: str
    expected: str  # "increases" | "decreases" | "unchanged"
    baseline: str = PRIOR_SCENARIO
    eps: float | None = None

    kind = "direction"

    def render(self) -> str:
        text = f"assert direction {self.node}={self.state} under {self.scenario}"
        if self.baseline != PRIOR_SCENARIO:
            text += f" vs {self.baseline}"
        text += f" {self.expected}"
        if self.eps is not None:
            text += f" eps {self.eps!r}"
        return text


@dataclass(frozen=True)
class Compare:
    """Posterior of a state under one scenario relates to another scenario's."""

    node: str
    state: str
    scenario_a: str
    relation: str  # "<" | ">" | "<=" | ">=" | "~"
    scenario_b: str
    eps: float | None = None

    kind = "compare"

    def render(self) -> str:
        text = f"assert compare P({self.node}={self.state}) under {self.scenario_a} {self.relation}"
        if self.eps is not None:
            text += f" eps {self.eps!r}"
        return text + f" under {self.scenario_b}"


@dataclass(frozen=True)
class Range:
    """Posterior of a state lies in a closed interval."""

    node: str
    state: str
    scenario: str
    lo: float
    hi: float

    kind = "range"

    def render(self) -> str:
        return (
            f"assert range {self.node}={self.state} under {self.scenario} "
            f"in [{self.lo!r}, {self.hi!r}]"
        )


@dataclass(frozen=True)
class Argmax:
    """The stated state is strictly the most probable one under the scenario."""

    node: str
    scenario: str
    expected_state: str

    kind = "argmax"

    def render(self) -> str:
        return f"assert argmax {self.node} under {self.scenario} is {self.expected_state}"


@dataclass(frozen=True)
class Invariant:
    """The node's full posterior stays at its prior under the scenario."""

    node: str
    scenario: str
    eps: float | None = None
    require_dsep: bool = False

    kind = "invariant"

    def render(self) -> str:
        text = f"assert invariant {self.node} under {self.scenario}"
        if self.eps is not None:
            text += f" eps {self.eps!r}"
        if self.require_dsep:
            text += " dsep"
        return text


@dataclass(frozen=True)
class ArcSign:
    """The influence sign derived from the child's CPT matches the stated one."""

    parent: str
    child: str
    expected: str  # "+" | "-" | "0" | "ambiguous"

    kind = "sign"

    def render(self) -> str:
        return f"assert sign {self.parent} -> {self.child} {self.expected}"


@dataclass(frozen=True)
class Magnitude:
    """Absolute change from the prior under one scenario relates to another's."""

    node: str
    state: str
    scenario_a: str
    relation: str  # "<" | ">"
    scenario_b: str

    kind = "magnitude"

    def render(self) -> str:
        return (
            f"assert magnitude {self.node}={self.state} under {self.scenario_a} "
            f"{self.relation} under {self.scenario_b}"
        )


Assertion = Union[Direction, Compare, Range, Argmax, Invariant, ArcSign, Magnitude]


@dataclass(frozen=True)
class AssertionSuite:
    """Named scenarios plus the assertions that reference them."""

    name: str
    scenarios: tuple[Scenario, ...]
    assertions: tuple[Assertion, ...]
    default_eps: float = DEFAULT_EPS

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "assertions", tuple(self.assertions))

    def scenario(self, name: str) -> Scenario:
        if name == PRIOR_SCENARIO:
            return Scenario(PRIOR_SCENARIO, {})
        for s in self.scenarios:
            if s.name == name:
                return s
        raise KeyError(name)

    def scenario_names(self) -> set[str]:
        return {s.name for s in self.scenarios} | {PRIOR_SCENARIO}


@dataclass(frozen=True)
class BoundSuite:
    """A suite whose every node, state and arc reference resolved against a network."""

    suite: AssertionSuite
    net: Network


_SCENARIO_RE = re.compile(rf"^scenario\s+({_IDENT})\s*:\s*(.+)$")
_ASSIGN_RE = re.compile(rf"^({_IDENT})\s*=\s*({_IDENT})$")
_DIRECTION_RE = re.compile(
    rf"^assert\s+direction\s+({_IDENT})=({_IDENT})\s+under\s+({_IDENT})"
    rf"(?:\s+vs\s+({_IDENT}))?\s+(increases|decreases|unchanged)"
    rf"(?:\s+eps\s+({_NUM}))?$"
)
_COMPARE_RE = re.compile(
    rf"^assert\s+compare\s+P\(\s*({_IDENT})\s*=\s*({_IDENT})\s*\)\s+under\s+({_IDENT})"
    rf"\s+(<=|>=|<|>|~)(?:\s+eps\s+({_NUM}))?\s+under\s+({_IDENT})$"
)
_RANGE_RE = re.compile(
    rf"^assert\s+range\s+({_IDENT})=({_IDENT})\s+under\s+({_IDENT})"
    rf"\s+in\s+\[\s*({_NUM})\s*,\s*({_NUM})\s*\]$"
)
_ARGMAX_RE = re.compile(
    rf"^assert\s+argmax\s+({_IDENT})\s+under\s+({_IDENT})\s+is\s+({_IDENT})$"
)
_INVARIANT_RE = re.compile(
    rf"^assert\s+invariant\s+({_IDENT})\s+under\s+({_IDENT})"
    rf"(?:\s+eps\s+({_NUM}))?(\s+dsep)?$"
)
_SIGN_RE = re.compile(
    rf"^assert\s+sign\s+({_IDENT})\s*->\s*({_IDENT})\s+(\+|-|0|ambiguous)$"
)
_MAGNITUDE_RE = re.compile(
    rf"^assert\s+magnitude\s+({_IDENT})=({_IDENT})\s+under\s+({_IDENT})"
    rf"\s+(<|>)\s+under\s+({_IDENT})$"
)


class _LineParser:
    """Accumulates statements and diagnostics for one document."""

    def __init__(self, default_eps: float):
        self.default_eps = default_eps
        self.issues: list[ParseIssue] = []
        self.scenarios: list[Scenario] = []
        self.assertions: list[Assertion] = []
        self._scenario_names: set[str] = set()
        self._scenario_uses: list[tuple[int, str]] = []

    def error(self, line_no: int, message: str, column: int = 1) -> None:
        self.issues.append(ParseIssue(line_no, column, message))

    def _number(self, line_no: int, text: str, what: str, raw_line: str) -> float | None:
        try:
            value = float(text)
        except ValueError:
            col = raw_line.find(text) + 1
            self.error(line_no, f"malformed {what} literal {text!r}", col)
            return None
        if value != value or value in (float("inf"), float("-inf")):
            self.error(line_no, f"{what} must be finite, got {text!r}")
            return None
        return value

    def _eps(self, line_no: int, text: str | None, raw_line: str) -> float | None:
        if text is None:
            return None
        value = self._number(line_no, text, "eps", raw_line)
        if value is None:
            return None
        if not 0.0 < value < 0.5:
            self.error(line_no, f"eps must be in (0, 0.5), got {value!r}")
            return None
        return value

    def _probability(self, line_no: int, text: str, what: str, raw_line: str) -> float | None:
        value = self._number(line_no, text, what, raw_line)
        if value is None:
            return None
        if not 0.0 <= value <= 1.0:
            self.error(line_no, f"{what} must be in [0, 1], got {value!r}")
            return None
        return value

    def _use(self, line_no: int, scenario: str) -> str:
        self._scenario_uses.append((line_no, scenario))
        return scenario

    def line(self, line_no: int, raw: str) -> None:
        text = raw.split("#", 1)[0].strip()
        if not text:
            return

        if text == "scenario" or text.startswith("scenario ") or text.startswith("scenario\t"):
            m = _SCENARIO_RE.match(text)
            if not m:
                self.error(line_no, "malformed scenario statement")
                return
            name, body = m.group(1), m.group(2)
            if name == PRIOR_SCENARIO:
                self.error(line_no, f"scenario name {PRIOR_SCENARIO!r} is reserved for empty evidence")
                return
            if name in self._scenario_names:
                self.error(line_no, f"duplicate scenario name {name!r}")
                return
            evidence: dict[str, str] = {}
            ok = True
            for part in body.split(","):
                part = part.strip()
                am = _ASSIGN_RE.match(part)
                if not am:
                    col = raw.find(part) + 1 if part else 1
                    self.error(line_no, f"malformed evidence assignment {part!r}", col)
                    ok = False
                    continue
                node, state = am.group(1), am.group(2)
                if node in evidence:
                    self.error(line_no, f"node {node} assigned twice in scenario {name}")
                    ok = False
                    continue
                evidence[node] = state
            if ok:
                self._scenario_names.add(name)
                self.scenarios.append(Scenario(name, evidence))
            return

        if not (text == "assert" or text.startswith("assert ") or text.startswith("assert\t")):
            self.error(line_no, f"unknown statement {text.split()[0]!r}")
            return

        m = _DIRECTION_RE.match(text)
        if m:
            eps = self._eps(line_no, m.group(6), raw)
            if m.group(6) is not None and eps is None:
                return
            self.assertions.append(
                Direction(
                    node=m.group(1),
                    state=m.group(2),
                    scenario=self._use(line_no, m.group(3)),
                    baseline=self._use(line_no, m.group(4)) if m.group(4) else PRIOR_SCENARIO,
                    expected=m.group(5),
                    eps=eps,
                )
            )
            return

        m = _COMPARE_RE.match(text)
        if m:
            eps = self._eps(line_no, m.group(5), raw)
            if m.group(5) is not None and eps is None:
                return
            if eps is not None and m.group(4) != "~":
                self.error(line_no, f"eps only applies to the ~ relation, not {m.group(4)!r}")
                return
            self.assertions.append(
                Compare(
                    node=m.group(1),
                    state=m.group(2),
                    scenario_a=self._use(line_no, m.group(3)),
                    relation=m.group(4),
                    scenario_b=self._use(line_no, m.group(6)),
                    eps=eps,
                )
            )
            return

        m = _RANGE_RE.match(text)
        if m:
            lo = self._probability(line_no, m.group(4), "range bound", raw)
            hi = self._probability(line_no, m.group(5), "range bound", raw)
            if lo is None or hi is None:
                return
            if lo > hi:
                self.error(line_no, f"range bounds invalid: lo {lo!r} > hi {hi!r}")
                return
            self.assertions.append(
                Range(
                    node=m.group(1),
                    state=m.group(2),
                    scenario=self._use(line_no, m.group(3)),
                    lo=lo,
                    hi=hi,
                )
            )
            return

        m = _ARGMAX_RE.match(text)
        if m:
            self.assertions.append(
                Argmax(node=m.group(1), scenario=self._use(line_no, m.group(2)), expected_state=m.group(3))
            )
            return

        m = _INVARIANT_RE.match(text)
        if m:
            eps = self._eps(line_no, m.group(3), raw)
            if m.group(3) is not None and eps is None:
                return
            self.assertions.append(
                Invariant(
                    node=m.group(1),
                    scenario=self._use(line_no, m.group(2)),
                    eps=eps,
                    require_dsep=m.group(4) is not None,
                )
            )
            return

        m = _SIGN_RE.match(text)
        if m:
            self.assertions.append(ArcSign(parent=m.group(1), child=m.group(2), expected=m.group(3)))
            return

        m = _MAGNITUDE_RE.match(text)
        if m:
            self.assertions.append(
                Magnitude(
                    node=m.group(1),
                    state=m.group(2),
                    scenario_a=self._use(line_no, m.group(3)),
                    relation=m.group(4),
                    scenario_b=self._use(line_no, m.group(5)),
                )
            )
            return

        kind = text.split()[1] if len(text.split()) > 1 else "?"
        known = {"direction", "compare", "range", "argmax", "invariant", "sign", "magnitude"}
        if kind in known:
            self.error(line_no, f"malformed {kind} assertion")
        else:
            self.error(line_no, f"unknown assertion kind {kind!r}")

    def finish(self) -> None:
        for line_no, name in self._scenario_uses:
            if name != PRIOR_SCENARIO and name not in self._scenario_names:
                self.error(line_no, f"undeclared scenario {name!r}")


def parse_suite(text: str, name: str = "suite", default_eps: float = DEFAULT_EPS) -> AssertionSuite:
    """Parse a suite document; raises :class:`SuiteParseError` with every diagnostic."""
    parser = _LineParser(default_eps)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        parser.line(line_no, raw)
    parser.finish()
    if parser.issues:
        raise SuiteParseError(parser.issues)
    return AssertionSuite(
        name=name,
        scenarios=tuple(parser.scenarios),
        assertions=tuple(parser.assertions),
        default_eps=default_eps,
    )


def serialize_suite(suite: AssertionSuite) -> str:
    """Canonical text for a suite; reparses to a structurally equal suite."""
    lines: list[str] = []
    for s in suite.scenarios:
        body = ", ".join(f"{n}={v}" for n, v in s.evidence.items())
        lines.append(f"scenario {s.name}: {body}")
    if suite.scenarios and suite.assertions:
        lines.append("")
    for a in suite.assertions:
        lines.append(a.render())
    return "\n".join(lines) + "\n"


def bind_suite(suite: AssertionSuite, net: Network) -> BoundSuite:
    """Resolve every node/state/arc reference; raises with all problems found."""
    problems: list[str] = []

    def check_state(node: str, state: str, where: str) -> None:
        if node not in net:
            problems.append(f"{where}: unknown node {node}")
        elif state not in net.node(node).states:
            problems.append(f"{where}: unknown state {state!r} for node {node}")

    def check_node(node: str, where: str) -> None:
        if node not in net:
            problems.append(f"{where}: unknown node {node}")

    for s in suite.scenarios:
        for node, state in s.items():
            check_state(node, state, f"scenario {s.name}")

    arcs = set(net.arcs())
    for i, a in enumerate(suite.assertions):
        where = f"assertion {i + 1} ({a.kind})"
        if isinstance(a, (Direction, Compare, Range, Magnitude)):
            check_state(a.node, a.state, where)
        elif isinstance(a, Argmax):
            check_state(a.node, a.expected_state, where)
        elif isinstance(a, Invariant):
            check_node(a.node, where)
        elif isinstance(a, ArcSign):
            check_node(a.parent, where)
            check_node(a.child, where)
            if a.parent in net and a.child in net and (a.parent, a.child) not in arcs:
                problems.append(f"{where}: no arc {a.parent} -> {a.child}")

    if problems:
        raise SuiteBindError(problems)
    return BoundSuite(suite=suite, net=net)
