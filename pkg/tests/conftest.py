"""Shared fixtures: local fake HTTP providers and fixture paths."""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from veriscope import kernels

FIXTURES = Path(__file__).parent / "fixtures"

# one line per acceptance criterion, echoed after the run so the result is
# visible even under pytest's output capture
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class _Handler(BaseHTTPRequestHandler):
    """Delegates every POST to the server's ``app`` callable.

    ``app(path, body_bytes, headers)`` returns (status, payload, delay_s);
    payload may be a JSON-able object or raw bytes (sent verbatim, which is
    how tests produce malformed bodies).
    """

    def do_POST(self):  # noqa: N802 (http.server API)
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        status, payload, delay = self.server.app(self.path, body, dict(self.headers))
        if delay:
            time.sleep(delay)
        data = payload if isinstance(payload, bytes) else json.dumps(payload).encode("utf-8")
        try:
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
        except BrokenPipeError:
            pass  # client timed out and hung up; that's the point of slow apps

    def log_message(self, *args):
        pass


@pytest.fixture
def http_factory():
    """Returns make(app) -> base URL; servers are torn down after the test."""
    servers = []

    def make(app):
        server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        server.block_on_close = False
        server.app = app
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append(server)
        return f"http://127.0.0.1:{server.server_address[1]}"

    yield make
    for server in servers:
        server.shutdown()
        server.server_close()


class RequestLog:
    """Thread-safe request counter + payload recorder for fake apps."""

    def __init__(self):
        self._lock = threading.Lock()
        self.bodies = []

    def add(self, body: bytes):
        with self._lock:
            self.bodies.append(body)

    @property
    def count(self) -> int:
        with self._lock:
            return len(self.bodies)


def embedding_app(log: RequestLog | None = None, dim: int = 256):
    """Fake embedding provider that answers with the local deterministic embedder."""

    def app(path, body, headers):
        if log is not None:
            log.add(body)
        texts = json.loads(body.decode("utf-8"))["texts"]
        rows = [list(kernels.embed_buckets(t, dim)) for t in texts]
        return 200, {"embeddings": rows, "dim": dim}, 0
    return app


def generation_app(text: str, log: RequestLog | None = None):
    """Fake generation provider returning a fixed completion."""

    def app(path, body, headers):
        if log is not None:
            log.add(body)
        return 200, {"text": text}, 0
    return app


def sleeping_app(delay_s: float, log: RequestLog | None = None):
    """Provider that answers too late; clients with a shorter timeout give up."""

    def app(path, body, headers):
        if log is not None:
            log.add(body)
        return 200, {"text": "too late"}, delay_s
    return app


def flaky_app(fail_first: int, inner, status: int = 500):
    """Fail the first ``fail_first`` requests with ``status``, then delegate."""
    state = {"n": 0}
    lock = threading.Lock()

    def app(path, body, headers):
        with lock:
            state["n"] += 1
            failing = state["n"] <= fail_first
        if failing:
            return status, {"error": "transient"}, 0
        return inner(path, body, headers)
    return app


@pytest.fixture
def mini_captions_path():
    return FIXTURES / "mini_captions.json"


@pytest.fixture
def mini_qa_path():
    return FIXTURES / "mini_qa.json"


@pytest.fixture
def defective_captions_path():
    return FIXTURES / "defective_captions.json"


@pytest.fixture
def golden_synth_path():
    return FIXTURES / "golden_synth_seed42_n100.json"
