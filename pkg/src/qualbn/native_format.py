"""Native plain-text network format: reader and canonical writer.

Grammar (UTF-8, ``#`` starts a comment outside quotes, blank lines ignored):

    network "<name>"
    description "<text>"
    provenance "<text>"

    node <id> "<display>" states [s1, s2, ...] parents [p1, ...]
      cpt:
        (<parent states>) -> (<p1>, <p2>, ...)
    # or
      noisyor: leak=<x> p=[<p1>, ...]
    # or
      det:
        (<parent states>) -> <state>

Root nodes use ``parents []`` and a single row ``() -> (...)``. Rows may
appear in any order but must cover every parent-state combination exactly
once. The writer emits nodes in topological order with probabilities at 9
significant digits; reading that canonical form back yields an identical
network.
"""

from __future__ import annotations

import re
from decimal import Decimal

from .errors import NetworkFormatError, ParseIssue
from .model import (
    Deterministic,
    ExplicitCpt,
    Network,
    NodeDef,
    NoisyOr,
    Scenario,
    StructuralError,
    topological_order,
    validate_network,
)

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_IDENT_RE = re.compile(_IDENT)
_NODE_RE = re.compile(
    rf"^node\s+({_IDENT})\s+\"((?:[^\"\\]|\\.)*)\"\s+states\s+\[([^\]]*)\]"
    rf"\s+parents\s+\[([^\]]*)\]$"
)
_HEADER_RE = re.compile(r"^(network|description|provenance)\s+\"((?:[^\"\\]|\\.)*)\"$")
_CPT_ROW_RE = re.compile(r"^\(([^)]*)\)\s*->\s*\(([^)]*)\)$")
_DET_ROW_RE = re.compile(rf"^\(([^)]*)\)\s*->\s*({_IDENT})$")
_NOISYOR_RE = re.compile(r"^noisyor:\s*leak\s*=\s*(\S+)\s+p\s*=\s*\[([^\]]*)\]$")


def _unescape(text: str) -> str:
    return text.replace("\\\"", "\"").replace("\\\\", "\\")


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\"", "\\\"")


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    escaped = False
    for ch in line:
        if escaped:
            out.append(ch)
            escaped = False
            continue
        if ch == "\\" and quoted:
            out.append(ch)
            escaped = True
            continue
        if ch == "\"":
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out).strip()


def _split_list(text: str) -> list[str]:
    text = text.strip()
    if not text:
        return []
    return [item.strip() for item in text.split(",")]


class _Reader:
    def __init__(self, text: str):
        self.issues: list[ParseIssue] = []
        self.meta = {"network": "", "description": "", "provenance": ""}
        self.nodes: list[dict] = []  # staged node definitions
        self.node_lines: dict[str, int] = {}
        self._current: dict | None = None
        self._mode: str | None = None  # None | "cpt" | "det"
        for line_no, raw in enumerate(text.splitlines(), start=1):
            self._line(line_no, raw)

    def error(self, line_no: int, message: str, column: int = 1) -> None:
        self.issues.append(ParseIssue(line_no, column, message))

    def _line(self, line_no: int, raw: str) -> None:
        text = _strip_comment(raw)
        if not text:
            return

        m = _HEADER_RE.match(text)
        if m:
            if self._current is not None:
                self.error(line_no, f"{m.group(1)} header must precede node definitions")
                return
            self.meta[m.group(1)] = _unescape(m.group(2))
            return

        if text.startswith("node ") or text.startswith("node\t"):
            m = _NODE_RE.match(text)
            if not m:
                self.error(line_no, "malformed node declaration")
                self._current = None
                self._mode = None
                return
            node_id = m.group(1)
            if node_id in self.node_lines:
                self.error(line_no, f"duplicate node id {node_id}")
                self._current = None
                self._mode = None
                return
            bad_tokens = [
                t for t in _split_list(m.group(3)) + _split_list(m.group(4))
                if not _IDENT_RE.fullmatch(t)
            ]
            if bad_tokens:
                self.error(
                    line_no,
                    f"invalid identifier {bad_tokens[0]!r} (states and parents "
                    "must match [A-Za-z_][A-Za-z0-9_]*)",
                )
                self._current = None
                self._mode = None
                return
            self._current = {
                "id": node_id,
                "display": _unescape(m.group(2)),
                "states": _split_list(m.group(3)),
                "parents": _split_list(m.group(4)),
                "local": None,
                "rows": {},  # context tuple -> (line, payload)
                "line": line_no,
            }
            self.node_lines[node_id] = line_no
            self.nodes.append(self._current)
            self._mode = None
            return

        if self._current is None:
            self.error(line_no, f"statement outside a node block: {text!r}")
            return

        if text == "cpt:":
            self._set_local(line_no, "cpt")
            return
        if text == "det:":
            self._set_local(line_no, "det")
            return

        m = _NOISYOR_RE.match(text)
        if m:
            self._set_local(line_no, "noisyor")
            try:
                leak = float(m.group(1))
                activation = [float(v) for v in _split_list(m.group(2))]
            except ValueError:
                self.error(line_no, "malformed noisyor probabilities")
                return
            self._current["noisyor"] = (leak, activation, line_no)
            return

        if self._mode == "cpt":
            m = _CPT_ROW_RE.match(text)
            if not m:
                self.error(line_no, f"malformed cpt row: {text!r}")
                return
            context = tuple(_split_list(m.group(1)))
            try:
                probs = [float(v) for v in _split_list(m.group(2))]
            except ValueError:
                self.error(line_no, f"malformed probability in row {text!r}")
                return
            self._add_row(line_no, context, probs)
            return

        if self._mode == "det":
            m = _DET_ROW_RE.match(text)
            if not m:
                self.error(line_no, f"malformed det row: {text!r}")
                return
            context = tuple(_split_list(m.group(1)))
            self._add_row(line_no, context, m.group(2))
            return

        self.error(line_no, f"unexpected statement {text!r}")

    def _set_local(self, line_no: int, kind: str) -> None:
        if self._current["local"] is not None:
            self.error(line_no, f"node {self._current['id']} already has a local structure")
        self._current["local"] = kind
        self._mode = kind if kind in ("cpt", "det") else None

    def _add_row(self, line_no: int, context: tuple[str, ...], payload) -> None:
        rows = self._current["rows"]
        if context in rows:
            self.error(line_no, f"duplicate row for context ({', '.join(context) or ''})")
            return
        rows[context] = (line_no, payload)

    def build(self) -> Network:
        if self.issues:
            raise NetworkFormatError(self.issues)

        staged: list[NodeDef] = []
        state_lookup = {n["id"]: n["states"] for n in self.nodes}
        for spec in self.nodes:
            node_def = self._build_node(spec, state_lookup)
            if node_def is not None:
                staged.append(node_def)
        if self.issues:
            raise NetworkFormatError(self.issues)

        try:
            net = Network(
                nodes=tuple(staged),
                name=self.meta["network"],
                description=self.meta["description"],
                provenance=self.meta["provenance"],
            )
        except StructuralError as exc:
            raise NetworkFormatError([ParseIssue(1, 1, str(exc))]) from exc

        violations = validate_network(net)
        if violations:
            issues = [
                ParseIssue(self.node_lines.get(v.node, 1), 1, str(v)) for v in violations
            ]
            raise NetworkFormatError(issues)
        return net

    def _build_node(self, spec: dict, state_lookup: dict[str, list[str]]) -> NodeDef | None:
        line = spec["line"]
        parents = spec["parents"]
        contexts = _enumerate_contexts(parents, state_lookup)

        local = None
        if spec["local"] == "noisyor":
            leak, activation, _ = spec["noisyor"]
            try:
                local = NoisyOr(tuple(activation), leak)
            except StructuralError as exc:
                self.error(line, str(exc))
                return None
        elif spec["local"] in ("cpt", "det"):
            if contexts is None:
                self.error(line, f"node {spec['id']}: parent states unknown (undefined parent)")
                return None
            ordered = self._ordered_rows(spec, contexts)
            if ordered is None:
                return None
            if spec["local"] == "cpt":
                local = ExplicitCpt(ordered)
            else:
                local = Deterministic(tuple(ordered))
        else:
            self.error(line, f"node {spec['id']}: missing local structure (cpt:/det:/noisyor:)")
            return None

        try:
            return NodeDef(
                id=spec["id"],
                display_name=spec["display"],
                states=tuple(spec["states"]),
                parents=tuple(parents),
                local=local,
            )
        except StructuralError as exc:
            self.error(line, str(exc))
            return None

    def _ordered_rows(self, spec: dict, contexts: list[tuple[str, ...]]):
        rows = spec["rows"]
        ordered = []
        missing = [c for c in contexts if c not in rows]
        if missing:
            shown = ", ".join("(" + ",".join(c) + ")" for c in missing[:3])
            self.error(
                spec["line"],
                f"node {spec['id']}: missing rows for {len(missing)} contexts, e.g. {shown}",
            )
            return None
        extras = [c for c in rows if c not in set(contexts)]
        for context in extras:
            line_no, _ = rows[context]
            self.error(line_no, f"node {spec['id']}: row context ({','.join(context)}) does not match parents")
        if extras:
            return None
        for context in contexts:
            ordered.append(rows[context][1])
        return ordered


def _enumerate_contexts(
    parents: list[str], state_lookup: dict[str, list[str]]
) -> list[tuple[str, ...]] | None:
    """All parent-state combinations in row order (first parent slowest)."""
    if any(p not in state_lookup for p in parents):
        return None
    contexts: list[tuple[str, ...]] = [()]
    for parent in parents:
        contexts = [c + (s,) for c in contexts for s in state_lookup[parent]]
    return contexts


def read_native(text: str) -> Network:
    """Parse and validate a native model document."""
    return _Reader(text).build()


def _fmt(p: float) -> str:
    return f"{p:.9g}"


def _fmt_row(row) -> list[str]:
    """Format one probability row so its decimal sum is exactly 1.

    All entries print at 9 significant digits except the largest, which
    carries the exact decimal complement; without that, the rounding drift of
    a wide row could exceed the reader's row-sum tolerance.
    """
    texts = [_fmt(p) for p in row]
    largest = max(range(len(row)), key=lambda i: (row[i], -i))
    others = sum((Decimal(t) for i, t in enumerate(texts) if i != largest), Decimal(0))
    complement = Decimal(1) - others
    if complement >= 0:
        texts[largest] = format(complement.normalize(), "f")
    return texts


def write_native(net: Network) -> str:
    """Canonical serialization: topological node order, 9-significant-digit values."""
    lines = [
        f'network "{_escape(net.name)}"',
        f'description "{_escape(net.description)}"',
        f'provenance "{_escape(net.provenance)}"',
        "",
    ]
    for node_id in topological_order(net):
        node = net.node(node_id)
        states = ", ".join(node.states)
        parents = ", ".join(node.parents)
        lines.append(
            f'node {node.id} "{_escape(node.display_name)}" states [{states}] parents [{parents}]'
        )
        local = node.local
        if isinstance(local, NoisyOr):
            ps = ", ".join(_fmt(p) for p in local.activation)
            lines.append(f"  noisyor: leak={_fmt(local.leak)} p=[{ps}]")
        elif isinstance(local, Deterministic):
            lines.append("  det:")
            for row_index, outcome in enumerate(local.outcomes):
                ctx = ", ".join(net.row_states(node_id, row_index))
                lines.append(f"    ({ctx}) -> {outcome}")
        else:
            lines.append("  cpt:")
            for row_index, row in enumerate(net.cpt(node_id)):
                ctx = ", ".join(net.row_states(node_id, row_index))
                probs = ", ".join(_fmt_row(row))
                lines.append(f"    ({ctx}) -> ({probs})")
        lines.append("")
    return "\n".join(lines)


def parse_evidence_option(net: Network, text: str) -> Scenario:
    """Parse a ``Node=state[,Node=state...]`` CLI option into a scenario."""
    evidence: dict[str, str] = {}
    if text.strip():
        for part in text.split(","):
            part = part.strip()
            if "=" not in part:
                raise StructuralError(f"malformed evidence {part!r}, expected Node=state")
            node, state = part.split("=", 1)
            evidence[node.strip()] = state.strip()
    scenario = Scenario("cli", evidence)
    for node, state in scenario.items():
        net.node(node).state_index(state)  # raises with the entity named
    return scenario
