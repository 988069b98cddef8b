"""HTTP service for the scenario-explorer UI.

Endpoints (JSON bodies, stable field names):

    GET  /api/model   model description: nodes, states, arcs, loaded assertions
    POST /api/query   {"evidence": {node: state}} -> all marginals + deltas vs prior
    POST /api/check   optional {"scenarios": {name: {node: state}}} overrides -> check report
    GET  /api/signs   derived arc signs

Static UI assets are served at ``/`` from the configured directory. The model
and suite are loaded once at startup and never mutate, so every response is a
pure function of the request body and concurrent handling is safe.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .checker import check, derive_signs
from .errors import ImpossibleEvidenceError, QualbnError, StructuralError, SuiteBindError
from .inference import all_marginals
from .model import Network, Scenario
from .suite import BoundSuite, bind_suite

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>qualbn</title></head>
<body style="font-family: sans-serif; max-width: 40em; margin: 3em auto;">
<h1>qualbn service</h1>
<p>No UI assets configured (start with <code>--ui-dir</code>).</p>
<p>API: <code>GET /api/model</code>, <code>POST /api/query</code>,
<code>POST /api/check</code>, <code>GET /api/signs</code>.</p>
</body></html>
"""


@dataclass(frozen=True)
class AppState:
    """Immutable snapshot shared by every request handler."""

    net: Network
    suite: BoundSuite | None
    ui_dir: Path | None


def model_doc(state: AppState) -> dict:
    net = state.net
    doc = {
        "name": net.name,
        "description": net.description,
        "provenance": net.provenance,
        "nodes": [
            {
                "id": n.id,
                "display_name": n.display_name,
                "states": list(n.states),
                "parents": list(n.parents),
            }
            for n in net.nodes
        ],
        "arcs": [[p, c] for p, c in net.arcs()],
        "has_suite": state.suite is not None,
        "assertions": [],
    }
    if state.suite is not None:
        doc["assertions"] = [a.render() for a in state.suite.suite.assertions]
    return doc


def query_doc(state: AppState, evidence: dict) -> dict:
    net = state.net
    if not isinstance(evidence, dict):
        raise StructuralError("evidence must be an object of node: state")
    scenario = Scenario("request", {str(k): str(v) for k, v in evidence.items()})
    for node, state_name in scenario.items():
        net.node(node).state_index(state_name)  # raises naming the entity

    priors = {m.node: m for m in all_marginals(net)}
    marginals = []
    for post in all_marginals(net, scenario):
        prior = priors[post.node]
        marginals.append(
            {
                "node": post.node,
                "states": list(post.states),
                "posterior": list(post.probabilities),
                "prior": list(prior.probabilities),
                "delta": [p - q for p, q in zip(post.probabilities, prior.probabilities)],
                "observed": post.node in scenario.evidence,
            }
        )
    return {"evidence": dict(scenario.evidence), "marginals": marginals}


def check_doc(state: AppState, overrides: dict | None) -> dict:
    if state.suite is None:
        raise _NoSuite()
    suite = state.suite.suite
    if overrides:
        if not isinstance(overrides, dict):
            raise StructuralError("scenarios override must be an object")
        by_name = {s.name: s for s in suite.scenarios}
        for name, evidence in overrides.items():
            if not isinstance(evidence, dict):
                raise StructuralError(f"override for scenario {name!r} must be an object")
            by_name[str(name)] = Scenario(str(name), {str(k): str(v) for k, v in evidence.items()})
        suite = replace(suite, scenarios=tuple(by_name.values()))
    report = check(state.net, bind_suite(suite, state.net))
    return report.to_doc()


class _NoSuite(QualbnError):
    def __init__(self):
        super().__init__("no suite loaded")


def _make_handler(state: AppState):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        # -- helpers ------------------------------------------------------
        def _send_json(self, status: int, doc: dict) -> None:
            body = json.dumps(doc, indent=2, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                doc = json.loads(raw.decode("utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise StructuralError(f"malformed JSON body: {exc}") from exc
            if not isinstance(doc, dict):
                raise StructuralError("request body must be a JSON object")
            return doc

        # -- routes -------------------------------------------------------
        def do_GET(self) -> None:
            path = self.path.split("?", 1)[0]
            if path == "/api/model":
                self._send_json(200, model_doc(state))
            elif path == "/api/signs":
                doc = {
                    "signs": [
                        {
                            "parent": r.parent,
                            "child": r.child,
                            "sign": r.sign,
                            "witnesses": list(r.witnesses),
                        }
                        for r in derive_signs(state.net)
                    ]
                }
                self._send_json(200, doc)
            elif path.startswith("/api/"):
                self._send_json(404, {"error": "not found", "path": path})
            else:
                self._send_static(path)

        def do_POST(self) -> None:
            path = self.path.split("?", 1)[0]
            try:
                body = self._read_body()
                if path == "/api/query":
                    self._send_json(200, query_doc(state, body.get("evidence", {})))
                elif path == "/api/check":
                    self._send_json(200, check_doc(state, body.get("scenarios")))
                else:
                    self._send_json(404, {"error": "not found", "path": path})
            except _NoSuite as exc:
                self._send_json(409, {"error": "no suite loaded", "detail": str(exc)})
            except ImpossibleEvidenceError as exc:
                self._send_json(
                    422,
                    {
                        "error": "impossible evidence",
                        "evidence": exc.evidence,
                        "detail": str(exc),
                    },
                )
            except (StructuralError, SuiteBindError) as exc:
                self._send_json(400, {"error": "bad request", "detail": str(exc)})

        # -- static UI ------------------------------------------------------
        def _send_static(self, path: str) -> None:
            if path in ("", "/"):
                path = "/index.html"
            if state.ui_dir is None:
                if path == "/index.html":
                    body = _PLACEHOLDER_PAGE.encode("utf-8")
                    self.send_response(200)
                    self.send_header("Content-Type", "text/html; charset=utf-8")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                else:
                    self._send_json(404, {"error": "not found", "path": path})
                return

            root = state.ui_dir.resolve()
            target = (root / path.lstrip("/")).resolve()
            if not target.is_relative_to(root) or not target.is_file():
                self._send_json(404, {"error": "not found", "path": path})
                return
            body = target.read_bytes()
            ctype = _CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def create_server(
    net: Network,
    suite: BoundSuite | None = None,
    *,
    host: str = "127.0.0.1",
    port: int = 0,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build (and bind) the HTTP server; ``port=0`` picks a free port."""
    state = AppState(
        net=net,
        suite=suite,
        ui_dir=Path(ui_dir) if ui_dir else None,
    )
    return ThreadingHTTPServer((host, port), _make_handler(state))


def serve(
    net: Network,
    suite: BoundSuite | None = None,
    *,
    host: str = "127.0.0.1",
    port: int = 8348,
    ui_dir: str | Path | None = None,
) -> int:
    """Run the service until interrupted; prints the bound address on startup."""
    httpd = create_server(net, suite, host=host, port=port, ui_dir=ui_dir)
    bound_host, bound_port = httpd.server_address[:2]
    print(f"serving on http://{bound_host}:{bound_port}/", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


def start_background(
    net: Network,
    suite: BoundSuite | None = None,
    *,
    host: str = "127.0.0.1",
    ui_dir: str | Path | None = None,
) -> tuple[ThreadingHTTPServer, threading.Thread]:
    """Start the server on a free port in a daemon thread (used by tests)."""
    httpd = create_server(net, suite, host=host, port=0, ui_dir=ui_dir)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return httpd, thread
