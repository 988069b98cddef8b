"""Evaluate assertion suites against a parameterised network.

Also derives per-arc influence signs from CPTs, exports the parameterisation
as Dirichlet pseudo-counts for later quantitative work, and re-checks a
quantitative parameterisation against the same suite.

Reports are deterministic: identical inputs produce byte-identical text and
structured documents (stable ordering, fixed float formatting).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ImpossibleEvidenceError, StructuralError
from .inference import Posterior, all_marginals, d_separated_sets
from .model import Network
from .suite import (
    Argmax,
    ArcSign,
    Assertion,
    AssertionSuite,
    BoundSuite,
    Compare,
    Direction,
    Invariant,
    Magnitude,
    PRIOR_SCENARIO,
    Range,
    bind_suite,
    serialize_suite,
)

DSEP_NUMERIC_TOL = 1e-9
_SIGN_EQ_TOL = 1e-12


# ---------------------------------------------------------------------------
# Check reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssertionResult:
    """Verdict for one assertion plus the numbers that justify it."""

    index: int
    kind: str
    label: str
    verdict: str  # "pass" | "fail" | "error"
    detail: str
    values: dict
    epsilon: float | None = None


@dataclass(frozen=True)
class CheckReport:
    """Per-assertion verdicts for one (network, suite) pair."""

    model_name: str
    suite_name: str
    model_hash: str
    suite_hash: str
    results: tuple[AssertionResult, ...]

    @property
    def counts(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "error": 0}
        for r in self.results:
            out[r.verdict] += 1
        return out

    @property
    def exit_code(self) -> int:
        counts = self.counts
        if counts["error"]:
            return 2
        if counts["fail"]:
            return 1
        return 0

    def to_doc(self) -> dict:
        return {
            "model": {"name": self.model_name, "hash": self.model_hash},
            "suite": {"name": self.suite_name, "hash": self.suite_hash},
            "summary": self.counts,
            "assertions": [
                {
                    "index": r.index,
                    "kind": r.kind,
                    "label": r.label,
                    "verdict": r.verdict,
                    "detail": r.detail,
                    "values": r.values,
                    "epsilon": r.epsilon,
                }
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"model: {self.model_name}  [{self.model_hash[:12]}]",
            f"suite: {self.suite_name}  [{self.suite_hash[:12]}]",
            "",
        ]
        for r in self.results:
            lines.append(f"[{r.verdict:5s}] {r.label}")
            lines.append(f"        {r.detail}")
        counts = self.counts
        lines.append("")
        lines.append(
            f"{counts['pass']} passed, {counts['fail']} failed, {counts['error']} errors"
        )
        return "\n".join(lines) + "\n"


def _p4(x: float) -> str:
    return f"{x:.4f}"


def _hash_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class _Session:
    """Caches per-scenario marginals (and their failures) during one check run."""

    def __init__(self, net: Network, suite: AssertionSuite, default_eps: float):
        self.net = net
        self.suite = suite
        self.default_eps = default_eps
        self._marginals: dict[str, dict[str, Posterior] | ImpossibleEvidenceError] = {}
        self._signs: dict[tuple[str, str], ArcSignResult] | None = None

    def eps(self, assertion_eps: float | None) -> float:
        return self.default_eps if assertion_eps is None else assertion_eps

    def marginals(self, scenario_name: str) -> dict[str, Posterior]:
        cached = self._marginals.get(scenario_name)
        if cached is None:
            scenario = self.suite.scenario(scenario_name)
            try:
                cached = {p.node: p for p in all_marginals(self.net, scenario)}
            except ImpossibleEvidenceError as exc:
                cached = exc
            self._marginals[scenario_name] = cached
        if isinstance(cached, ImpossibleEvidenceError):
            raise cached
        return cached

    def posterior(self, scenario_name: str, node: str) -> Posterior:
        return self.marginals(scenario_name)[node]

    def signs(self) -> dict[tuple[str, str], ArcSignResult]:
        if self._signs is None:
            self._signs = {(r.parent, r.child): r for r in derive_signs(self.net)}
        return self._signs


def check(net: Network, suite: AssertionSuite | BoundSuite) -> CheckReport:
    """Evaluate every assertion; per-assertion problems become verdicts, not crashes."""
    if isinstance(suite, BoundSuite):
        bound = suite if suite.net is net else bind_suite(suite.suite, net)
    else:
        bound = bind_suite(suite, net)
    plain = bound.suite

    session = _Session(net, plain, plain.default_eps)
    results = [
        _evaluate(session, i, assertion)
        for i, assertion in enumerate(plain.assertions)
    ]
    from .native_format import write_native  # deferred: avoids import cycle

    return CheckReport(
        model_name=net.name or "network",
        suite_name=plain.name,
        model_hash=_hash_text(write_native(net)),
        suite_hash=_hash_text(serialize_suite(plain)),
        results=tuple(results),
    )


def _evaluate(session: _Session, index: int, a: Assertion) -> AssertionResult:
    try:
        return _EVALUATORS[a.kind](session, index, a)
    except ImpossibleEvidenceError as exc:
        return AssertionResult(
            index=index,
            kind=a.kind,
            label=a.render(),
            verdict="error",
            detail=str(exc),
            values={"error": str(exc)},
        )


def _result(index, a, verdict, detail, values, eps=None) -> AssertionResult:
    return AssertionResult(
        index=index,
        kind=a.kind,
        label=a.render(),
        verdict=verdict,
        detail=detail,
        values=values,
        epsilon=eps,
    )


def _eval_direction(session: _Session, index: int, a: Direction) -> AssertionResult:
    eps = session.eps(a.eps)
    p = session.posterior(a.scenario, a.node).p(a.state)
    b = session.posterior(a.baseline, a.node).p(a.state)
    delta = p - b
    if a.expected == "increases":
        ok = delta > eps
    elif a.expected == "decreases":
        ok = -delta > eps
    else:  # unchanged
        ok = abs(delta) <= eps
    detail = (
        f"P({a.node}={a.state}) = {_p4(p)} under {a.scenario}, "
        f"{_p4(b)} under {a.baseline} (delta {delta:+.4f}, eps {eps:g})"
    )
    values = {"posterior": p, "baseline": b, "delta": delta}
    return _result(index, a, "pass" if ok else "fail", detail, values, eps)


def _eval_compare(session: _Session, index: int, a: Compare) -> AssertionResult:
    pa = session.posterior(a.scenario_a, a.node).p(a.state)
    pb = session.posterior(a.scenario_b, a.node).p(a.state)
    eps = session.eps(a.eps) if a.relation == "~" else None
    if a.relation == "<":
        ok = pa < pb
    elif a.relation == ">":
        ok = pa > pb
    elif a.relation == "<=":
        ok = pa <= pb
    elif a.relation == ">=":
        ok = pa >= pb
    else:  # "~"
        ok = abs(pa - pb) <= eps
    detail = (
        f"P({a.node}={a.state}) = {_p4(pa)} under {a.scenario_a}, "
        f"{_p4(pb)} under {a.scenario_b}"
    )
    if eps is not None:
        detail += f" (eps {eps:g})"
    values = {"lhs": pa, "rhs": pb}
    return _result(index, a, "pass" if ok else "fail", detail, values, eps)


def _eval_range(session: _Session, index: int, a: Range) -> AssertionResult:
    p = session.posterior(a.scenario, a.node).p(a.state)
    ok = a.lo <= p <= a.hi
    detail = f"P({a.node}={a.state}) = {_p4(p)} under {a.scenario}, bounds [{a.lo:g}, {a.hi:g}]"
    values = {"posterior": p, "lo": a.lo, "hi": a.hi}
    return _result(index, a, "pass" if ok else "fail", detail, values)


def _eval_argmax(session: _Session, index: int, a: Argmax) -> AssertionResult:
    eps = session.eps(None)
    post = session.posterior(a.scenario, a.node)
    probs = np.asarray(post.probabilities)
    # Ties break toward the lowest state index; a tie within eps cannot
    # evidence the claim, so it fails explicitly.
    top = int(np.argmax(probs))
    ranked = np.sort(probs)[::-1]
    tie = len(probs) > 1 and (ranked[0] - ranked[1]) <= eps
    observed = post.states[top]
    values = {
        "distribution": {s: float(p) for s, p in zip(post.states, post.probabilities)},
        "observed": observed,
    }
    if tie:
        detail = (
            f"top states within eps {eps:g} of each other under {a.scenario}: tie, "
            f"distribution {', '.join(f'{s}={_p4(p)}' for s, p in zip(post.states, post.probabilities))}"
        )
        return _result(index, a, "fail", "tie: " + detail, values, eps)
    ok = observed == a.expected_state
    detail = (
        f"most probable {a.node} under {a.scenario} is {observed} "
        f"({', '.join(f'{s}={_p4(p)}' for s, p in zip(post.states, post.probabilities))})"
    )
    return _result(index, a, "pass" if ok else "fail", detail, values, eps)


def _eval_invariant(session: _Session, index: int, a: Invariant) -> AssertionResult:
    prior = session.posterior(PRIOR_SCENARIO, a.node)
    post = session.posterior(a.scenario, a.node)
    max_delta = float(
        np.max(np.abs(np.asarray(post.probabilities) - np.asarray(prior.probabilities)))
    )
    scenario = session.suite.scenario(a.scenario)
    if a.require_dsep:
        # The dsep flag pins the numeric tolerance at DSEP_NUMERIC_TOL; any
        # per-assertion eps governs only the plain numeric form.
        eps = DSEP_NUMERIC_TOL
        separated = d_separated_sets(
            session.net, {a.node}, set(scenario.evidence), frozenset()
        )
        ok = separated and max_delta <= eps
        detail = (
            f"max |delta| = {max_delta:.3e} under {a.scenario}, "
            f"d-separated: {'yes' if separated else 'no'}"
        )
        values = {"max_abs_delta": max_delta, "d_separated": separated}
    else:
        eps = session.eps(a.eps)
        ok = max_delta <= eps
        detail = f"max |delta| = {max_delta:.3e} under {a.scenario} (eps {eps:g})"
        values = {"max_abs_delta": max_delta}
    return _result(index, a, "pass" if ok else "fail", detail, values, eps)


def _eval_sign(session: _Session, index: int, a: ArcSign) -> AssertionResult:
    derived = session.signs()[(a.parent, a.child)]
    ok = derived.sign == a.expected
    detail = f"derived sign {derived.sign} for {a.parent} -> {a.child}"
    if derived.witnesses:
        detail += f" (witnesses: {'; '.join(derived.witnesses)})"
    values = {"derived": derived.sign, "witnesses": list(derived.witnesses)}
    return _result(index, a, "pass" if ok else "fail", detail, values)


def _eval_magnitude(session: _Session, index: int, a: Magnitude) -> AssertionResult:
    prior = session.posterior(PRIOR_SCENARIO, a.node).p(a.state)
    da = abs(session.posterior(a.scenario_a, a.node).p(a.state) - prior)
    db = abs(session.posterior(a.scenario_b, a.node).p(a.state) - prior)
    ok = da < db if a.relation == "<" else da > db
    detail = (
        f"|delta from prior| of P({a.node}={a.state}): {da:.4f} under {a.scenario_a}, "
        f"{db:.4f} under {a.scenario_b}"
    )
    values = {"delta_a": da, "delta_b": db, "prior": prior}
    return _result(index, a, "pass" if ok else "fail", detail, values)


_EVALUATORS = {
    "direction": _eval_direction,
    "compare": _eval_compare,
    "range": _eval_range,
    "argmax": _eval_argmax,
    "invariant": _eval_invariant,
    "sign": _eval_sign,
    "magnitude": _eval_magnitude,
}


# ---------------------------------------------------------------------------
# Influence signs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcSignResult:
    """Derived influence sign of one arc, with witnessing contexts when ambiguous."""

    parent: str
    child: str
    sign: str  # "+" | "-" | "0" | "ambiguous"
    witnesses: tuple[str, ...] = ()


def _dominance(lo_row: np.ndarray, hi_row: np.ndarray) -> str:
    """First-order stochastic dominance of hi_row over lo_row ("up"), or the reverse.

    States are ordered as declared; comparison is on cumulative sums over all
    but the last state. Returns "up", "down", "flat" or "mixed".
    """
    cum_lo = np.cumsum(lo_row)[:-1]
    cum_hi = np.cumsum(hi_row)[:-1]
    diff = cum_hi - cum_lo
    up = np.any(diff < -_SIGN_EQ_TOL)
    down = np.any(diff > _SIGN_EQ_TOL)
    if up and down:
        return "mixed"
    if up:
        return "up"
    if down:
        return "down"
    return "flat"


def derive_signs(net: Network) -> list[ArcSignResult]:
    """Influence sign of every arc, from the child CPT alone.

    The sign is "+" when increasing the parent (in declared state order)
    shifts the child's conditional distribution upward by first-order
    stochastic dominance in every other-parent context, strictly in at least
    one; "-" dually; "0" when the parent never changes the distribution; and
    "ambiguous" otherwise, with the conflicting contexts as witnesses.
    """
    results: list[ArcSignResult] = []
    for child_def in net.nodes:
        child = child_def.id
        cards = net.parent_cards(child)
        shape = cards + (child_def.n_states,)
        table = net.cpt(child).reshape(shape)
        for axis, parent in enumerate(child_def.parents):
            other_axes = [i for i in range(len(cards)) if i != axis]
            per_context: list[tuple[str, str]] = []  # (classification, context text)
            for combo in itertools.product(*(range(cards[i]) for i in other_axes)):
                idx: list = [slice(None)] * len(cards)
                for pos, value in zip(other_axes, combo):
                    idx[pos] = value
                rows = table[tuple(idx)]  # (parent card, child states)
                states: list[str] = []
                for pos, value in zip(other_axes, combo):
                    other = net.node(child_def.parents[pos])
                    states.append(f"{other.id}={other.states[value]}")
                context = ", ".join(states) if states else "-"
                verdicts = {
                    _dominance(rows[k], rows[k + 1]) for k in range(rows.shape[0] - 1)
                }
                if "mixed" in verdicts or ("up" in verdicts and "down" in verdicts):
                    per_context.append(("mixed", context))
                elif "up" in verdicts:
                    per_context.append(("up", context))
                elif "down" in verdicts:
                    per_context.append(("down", context))
                else:
                    per_context.append(("flat", context))

            kinds = {kind for kind, _ in per_context}
            if kinds <= {"flat"}:
                sign, witnesses = "0", ()
            elif kinds <= {"up", "flat"}:
                sign, witnesses = "+", ()
            elif kinds <= {"down", "flat"}:
                sign, witnesses = "-", ()
            else:
                sign = "ambiguous"
                witnesses = tuple(
                    f"{kind} in context ({context})"
                    for kind, context in per_context
                    if kind != "flat"
                )
            results.append(ArcSignResult(parent=parent, child=child, sign=sign, witnesses=witnesses))
    return results


# ---------------------------------------------------------------------------
# Prior export
# ---------------------------------------------------------------------------

PRIOR_EXPORT_WARNING = (
    "WARNING: these pseudo-counts were derived from a qualitative parameterisation.\n"
    "The numbers express intended behaviour, not calibrated estimates; whatever\n"
    "confidence they encode belongs to the qualitative relationships between the\n"
    "variables, not to these specific values. Treat them as a weak starting point\n"
    "for quantitative parameter learning and review them before trusting them."
)


@dataclass(frozen=True)
class RowPrior:
    """Dirichlet pseudo-counts for one CPT row, exact."""

    node: str
    row_index: int
    parent_states: tuple[str, ...]
    alphas: tuple[Fraction, ...]

    @property
    def alpha_floats(self) -> tuple[float, ...]:
        return tuple(float(a) for a in self.alphas)


@dataclass(frozen=True)
class PriorExport:
    """Per-row Dirichlet pseudo-counts alpha = ESS * p for a whole network.

    Exact by construction: each row's alphas sum to exactly the equivalent
    sample size, and alpha_i / ESS reproduces the row's probability exactly.
    """

    model_name: str
    ess: Fraction
    rows: tuple[RowPrior, ...]
    warnings: tuple[str, ...]

    def to_text(self) -> str:
        lines = ["# Dirichlet prior export"]
        lines.extend(f"# {line}" for line in PRIOR_EXPORT_WARNING.splitlines())
        lines.append("#")
        lines.append(f"model {self.model_name}")
        lines.append(f"ess {float(self.ess):.17g}")
        lines.append("")
        current = None
        for row in self.rows:
            if row.node != current:
                current = row.node
                lines.append(f"node {row.node}")
            ctx = ",".join(row.parent_states) or "-"
            alphas = ", ".join(f"{a:.17g}" for a in row.alpha_floats)
            lines.append(f"  ({ctx}) -> ({alphas})")
        if self.warnings:
            lines.append("")
            lines.extend(f"# note: {w}" for w in self.warnings)
        return "\n".join(lines) + "\n"


def export_prior(net: Network, ess: float | int | Fraction = 5) -> PriorExport:
    """Dirichlet pseudo-counts for every expanded CPT row.

    ``ess`` is the equivalent sample size (total pseudo-count mass per row);
    it controls how strongly the exported prior resists data later.
    """
    ess_frac = Fraction(ess)
    if ess_frac <= 0:
        raise StructuralError(f"equivalent sample size must be positive, got {ess!r}")

    rows: list[RowPrior] = []
    warnings: list[str] = []
    for node in net.nodes:
        exact = net.exact_cpt(node.id)
        for row_index, exact_row in enumerate(exact):
            alphas = tuple(ess_frac * q for q in exact_row)
            parent_states = net.row_states(node.id, row_index)
            rows.append(
                RowPrior(
                    node=node.id,
                    row_index=row_index,
                    parent_states=parent_states,
                    alphas=alphas,
                )
            )
            if any(a == 0 for a in alphas):
                ctx = ",".join(parent_states) or "-"
                zero_states = [
                    node.states[i] for i, a in enumerate(alphas) if a == 0
                ]
                warnings.append(
                    f"{node.id} ({ctx}): zero pseudo-count for {', '.join(zero_states)}"
                )
    return PriorExport(
        model_name=net.name or "network",
        ess=ess_frac,
        rows=tuple(rows),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Qualitative-vs-quantitative comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RowDivergence:
    """Largest absolute probability difference within one CPT row."""

    node: str
    row_index: int
    parent_states: tuple[str, ...]
    max_abs_diff: float


@dataclass(frozen=True)
class ComparisonReport:
    """Suite verdicts on the quantitative network plus per-row divergences.

    Divergence is informational only: precise numbers are not the contract a
    qualitative parameterisation makes, so only assertion failures fail a run.
    """

    check: CheckReport
    divergences: tuple[RowDivergence, ...]

    @property
    def max_divergence(self) -> float:
        return max((d.max_abs_diff for d in self.divergences), default=0.0)

    @property
    def exit_code(self) -> int:
        return self.check.exit_code

    def to_doc(self) -> dict:
        return {
            "check": self.check.to_doc(),
            "divergence": {
                "max": self.max_divergence,
                "rows": [
                    {
                        "node": d.node,
                        "row": d.row_index,
                        "parents": list(d.parent_states),
                        "max_abs_diff": d.max_abs_diff,
                    }
                    for d in self.divergences
                ],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [self.check.to_text()]
        lines.append("parameter divergence (informational):")
        for d in self.divergences:
            ctx = ",".join(d.parent_states) or "-"
            lines.append(f"  {d.node} ({ctx}): max |diff| = {d.max_abs_diff:.6f}")
        lines.append(f"  overall max |diff| = {self.max_divergence:.6f}")
        return "\n".join(lines) + "\n"


def _structural_differences(a: Network, b: Network) -> list[str]:
    problems: list[str] = []
    ids_a, ids_b = set(a.node_ids), set(b.node_ids)
    for missing in sorted(ids_a - ids_b):
        problems.append(f"node {missing} only in first network")
    for missing in sorted(ids_b - ids_a):
        problems.append(f"node {missing} only in second network")
    for node_id in sorted(ids_a & ids_b):
        na, nb = a.node(node_id), b.node(node_id)
        if na.states != nb.states:
            problems.append(f"node {node_id}: states differ ({na.states} vs {nb.states})")
        if na.parents != nb.parents:
            problems.append(f"node {node_id}: parents differ ({na.parents} vs {nb.parents})")
    return problems


def compare(
    qualitative: Network, quantitative: Network, suite: AssertionSuite
) -> ComparisonReport:
    """Check the suite on the quantitative network and tabulate CPT divergence.

    Both networks must share the same structure (nodes, states in order,
    parents in order); otherwise this raises with every difference listed and
    produces no partial report.
    """
    problems = _structural_differences(qualitative, quantitative)
    if problems:
        raise StructuralError("networks differ structurally:\n" + "\n".join(problems))

    report = check(quantitative, suite)
    divergences: list[RowDivergence] = []
    for node in qualitative.nodes:
        qual_cpt = qualitative.cpt(node.id)
        quant_cpt = quantitative.cpt(node.id)
        for row_index in range(qual_cpt.shape[0]):
            diff = float(np.max(np.abs(qual_cpt[row_index] - quant_cpt[row_index])))
            divergences.append(
                RowDivergence(
                    node=node.id,
                    row_index=row_index,
                    parent_states=qualitative.row_states(node.id, row_index),
                    max_abs_diff=diff,
                )
            )
    return ComparisonReport(check=report, divergences=tuple(divergences))
