"""Reader for the XDSL (GeNIe/SMILE) interchange format, discrete-CPT subset.

Supported content: ``<cpt>`` chance nodes with ``<state>`` lists, optional
``<parents>`` and a flat ``<probabilities>`` vector. The vector is unflattened
with the child's states varying fastest and parent combinations row-major,
first-listed parent slowest; posterior reproduction on the bundled example
model pins this convention. Display names are picked up from the GeNIe
``<extensions>`` block when present. Anything else (decision/utility nodes,
noisymax, submodels) is out of scope and rejected explicitly.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .errors import NetworkFormatError, ParseIssue
from .model import ExplicitCpt, Network, NodeDef, StructuralError, validate_network

_UNSUPPORTED = {
    "noisymax",
    "noisyadder",
    "deterministic",
    "decision",
    "utility",
    "mau",
    "equation",
}


def read_xdsl(text: str) -> Network:
    """Parse an XDSL document into a network of explicit-CPT nodes."""
    issues: list[ParseIssue] = []
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = getattr(exc, "position", (1, 0))
        raise NetworkFormatError([ParseIssue(line, col + 1, f"malformed XML: {exc.msg}")]) from exc

    if root.tag != "smile":
        raise NetworkFormatError([ParseIssue(1, 1, f"expected <smile> root, got <{root.tag}>")])

    nodes_el = root.find("nodes")
    if nodes_el is None:
        raise NetworkFormatError([ParseIssue(1, 1, "missing <nodes> element")])

    display_names = _genie_names(root)
    network_name = _genie_network_name(root) or root.get("id", "")

    defs: list[NodeDef] = []
    cards: dict[str, int] = {}
    for el in nodes_el:
        if el.tag in _UNSUPPORTED:
            issues.append(
                ParseIssue(1, 1, f"unsupported node type <{el.tag}> (id {el.get('id')!r})")
            )
            continue
        if el.tag != "cpt":
            issues.append(ParseIssue(1, 1, f"unknown element <{el.tag}> in <nodes>"))
            continue

        node_id = el.get("id")
        if not node_id:
            issues.append(ParseIssue(1, 1, "<cpt> without id attribute"))
            continue
        states = [s.get("id", "") for s in el.findall("state")]
        parents_el = el.find("parents")
        parents = parents_el.text.split() if parents_el is not None and parents_el.text else []
        probs_el = el.find("probabilities")
        if probs_el is None or not probs_el.text:
            issues.append(ParseIssue(1, 1, f"node {node_id}: missing <probabilities>"))
            continue
        try:
            flat = [float(v) for v in probs_el.text.split()]
        except ValueError:
            issues.append(ParseIssue(1, 1, f"node {node_id}: malformed probability value"))
            continue

        n_states = len(states)
        parent_rows = 1
        for p in parents:
            parent_rows *= cards.get(p, 0)
        if any(p not in cards for p in parents):
            # Forward or dangling reference; row count can't be checked here,
            # so stage it and let network validation report the reference.
            parent_rows = None

        if n_states and parent_rows is not None:
            expected = parent_rows * n_states
            if len(flat) != expected:
                issues.append(
                    ParseIssue(
                        1,
                        1,
                        f"node {node_id}: expected {expected} probabilities "
                        f"({parent_rows} rows x {n_states} states), got {len(flat)}",
                    )
                )
                continue

        cards[node_id] = n_states
        table = [flat[i: i + n_states] for i in range(0, len(flat), n_states)] if n_states else []
        try:
            defs.append(
                NodeDef(
                    id=node_id,
                    display_name=display_names.get(node_id, ""),
                    states=tuple(states),
                    parents=tuple(parents),
                    local=ExplicitCpt(table),
                )
            )
        except StructuralError as exc:
            issues.append(ParseIssue(1, 1, str(exc)))

    if issues:
        raise NetworkFormatError(issues)

    try:
        net = Network(nodes=tuple(defs), name=network_name)
    except StructuralError as exc:
        raise NetworkFormatError([ParseIssue(1, 1, str(exc))]) from exc

    violations = validate_network(net)
    if violations:
        raise NetworkFormatError([ParseIssue(1, 1, str(v)) for v in violations])
    return net


def _genie_names(root: ET.Element) -> dict[str, str]:
    names: dict[str, str] = {}
    extensions = root.find("extensions")
    if extensions is None:
        return names
    for genie in extensions.findall("genie"):
        for node in genie.iter("node"):
            node_id = node.get("id")
            name_el = node.find("name")
            if node_id and name_el is not None and name_el.text:
                names[node_id] = name_el.text
    return names


def _genie_network_name(root: ET.Element) -> str | None:
    extensions = root.find("extensions")
    if extensions is None:
        return None
    genie = extensions.find("genie")
    if genie is None:
        return None
    return genie.get("name")
