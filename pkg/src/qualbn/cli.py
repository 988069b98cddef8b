"""Command-line interface.

Exit codes are the contract: 0 all assertions pass, 1 at least one fails,
2 operational error (bad paths, parse failures, impossible queries, usage).
Text output prints probabilities at 4 decimals; structured output is JSON at
full precision with sorted keys, stable across runs.

The default assertion epsilon comes from, in increasing priority: the
built-in 1e-6, the QUALBN_EPSILON environment variable, the --epsilon flag,
and a per-assertion ``eps`` in the suite itself.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .checker import check, compare, derive_signs, export_prior
from .errors import QualbnError
from .inference import all_marginals, query
from .model import Network
from .native_format import parse_evidence_option, read_native
from .suite import DEFAULT_EPS, AssertionSuite, bind_suite, parse_suite
from .xdsl_format import read_xdsl

EPSILON_ENV_VAR = "QUALBN_EPSILON"


def _validated_eps(value: float, where: str) -> float:
    if not 0.0 < value < 0.5:
        raise QualbnError(f"{where} must be in (0, 0.5), got {value!r}")
    return value


def _default_eps() -> float:
    raw = os.environ.get(EPSILON_ENV_VAR)
    if raw is None:
        return DEFAULT_EPS
    try:
        value = float(raw)
    except ValueError:
        raise QualbnError(f"{EPSILON_ENV_VAR} is not a number: {raw!r}") from None
    return _validated_eps(value, EPSILON_ENV_VAR)


def load_model(path: str) -> Network:
    """Load a network from a .bn (native) or .xdsl file, by extension."""
    p = Path(path)
    if not p.exists():
        raise QualbnError(f"model file not found: {path}")
    text = p.read_text(encoding="utf-8")
    if p.suffix.lower() == ".xdsl":
        return read_xdsl(text)
    return read_native(text)


def load_suite(path: str, epsilon: float | None) -> AssertionSuite:
    p = Path(path)
    if not p.exists():
        raise QualbnError(f"suite file not found: {path}")
    if epsilon is not None:
        eps = _validated_eps(epsilon, "--epsilon")
    else:
        eps = _default_eps()
    return parse_suite(p.read_text(encoding="utf-8"), name=p.stem, default_eps=eps)


def _arrow(delta: float, eps: float) -> str:
    if delta > eps:
        return "↑"
    if delta < -eps:
        return "↓"
    return "·"


def _cmd_check(args) -> int:
    net = load_model(args.model)
    suite = load_suite(args.suite, args.epsilon)
    report = check(net, bind_suite(suite, net))
    if args.format == "structured":
        print(report.to_json())
    else:
        print(report.to_text(), end="")
    return report.exit_code


def _cmd_query(args) -> int:
    net = load_model(args.model)
    scenario = parse_evidence_option(net, args.evidence or "")
    eps = args.epsilon if args.epsilon is not None else _default_eps()

    priors = {m.node: m for m in all_marginals(net)}
    targets = [args.target] if args.target else list(net.node_ids)
    if args.target:
        net.node(args.target)

    if args.format == "structured":
        doc = {"evidence": dict(scenario.evidence), "marginals": []}
        for node_id in targets:
            post = query(net, node_id, scenario)
            prior = priors[node_id]
            doc["marginals"].append(
                {
                    "node": node_id,
                    "states": list(post.states),
                    "posterior": list(post.probabilities),
                    "prior": list(prior.probabilities),
                    "delta": [p - q for p, q in zip(post.probabilities, prior.probabilities)],
                }
            )
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0

    evidence_text = ", ".join(f"{n}={s}" for n, s in scenario.items()) or "(none)"
    print(f"evidence: {evidence_text}")
    for node_id in targets:
        post = query(net, node_id, scenario)
        prior = priors[node_id]
        print(f"{node_id}:")
        for state, p, q in zip(post.states, post.probabilities, prior.probabilities):
            delta = p - q
            print(
                f"  {state:12s} {p:.4f} {_arrow(delta, eps)} from {q:.4f} "
                f"(delta {delta:+.4f})"
            )
    return 0


def _cmd_signs(args) -> int:
    net = load_model(args.model)
    for result in derive_signs(net):
        line = f"{result.parent} -> {result.child}: {result.sign}"
        if result.witnesses:
            line += f"  [{'; '.join(result.witnesses)}]"
        print(line)
    return 0


def _cmd_compare(args) -> int:
    qual = load_model(args.qual_model)
    quant = load_model(args.quant_model)
    suite = load_suite(args.suite, args.epsilon)
    report = compare(qual, quant, suite)
    if args.format == "structured":
        print(report.to_json())
    else:
        print(report.to_text(), end="")
    return report.exit_code


def _cmd_export_prior(args) -> int:
    net = load_model(args.model)
    export = export_prior(net, args.ess)
    text = export.to_text()
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {len(export.rows)} rows (ess {args.ess:g}) to {args.out}")
    for warning in export.warnings:
        print(f"note: {warning}")
    return 0


def _cmd_serve(args) -> int:
    from .server import serve  # deferred: keeps CLI import light

    net = load_model(args.model)
    suite = None
    if args.suite:
        suite = bind_suite(load_suite(args.suite, args.epsilon), net)
    return serve(net, suite, host=args.host, port=args.port, ui_dir=args.ui_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qualbn",
        description="Check, query and serve qualitative behaviour of discrete Bayesian networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate an assertion suite against a model")
    p.add_argument("model")
    p.add_argument("suite")
    p.add_argument("--epsilon", type=float, default=None, help="default assertion epsilon")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("query", help="posteriors under evidence, with deltas vs prior")
    p.add_argument("model")
    p.add_argument("--evidence", default="", help="Node=state[,Node=state...]")
    p.add_argument("--target", default=None, help="single node (default: all)")
    p.add_argument("--epsilon", type=float, default=None, help="direction-arrow threshold")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("signs", help="derive arc influence signs from the CPTs")
    p.add_argument("model")
    p.set_defaults(func=_cmd_signs)

    p = sub.add_parser("compare", help="re-check a quantitative parameterisation")
    p.add_argument("qual_model")
    p.add_argument("quant_model")
    p.add_argument("suite")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("export-prior", help="export Dirichlet pseudo-counts")
    p.add_argument("model")
    p.add_argument("--ess", type=float, default=5.0, help="equivalent sample size")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_prior)

    p = sub.add_parser("serve", help="HTTP service for the scenario-explorer UI")
    p.add_argument("model")
    p.add_argument("--suite", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8348)
    p.add_argument("--ui-dir", default=None, help="directory of static UI assets")
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except QualbnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130


def entrypoint() -> None:
    try:
        sys.exit(main())
    except Exception as exc:  # the console script never shows a stack trace
        print(f"internal error: {exc}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    entrypoint()
