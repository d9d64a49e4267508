"""Shared test fixtures: stub transports, a stub chat HTTP server, corpus."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest
from hypothesis import settings

from reviewkit.errors import TransportFailure
from reviewkit.judge import EndpointConfig

# property tests here are value checks, not benchmarks; timing flakes off
settings.register_profile("no-deadline", deadline=None)
settings.load_profile("no-deadline")

FIXTURES = Path(__file__).parent / "fixtures"


def fast_endpoint(**overrides) -> EndpointConfig:
    """Endpoint config with zero backoff so retry tests run instantly."""
    defaults = dict(
        base_url="http://stub.invalid/v1",
        model_name="stub-model",
        backoff_seconds=0.0,
    )
    defaults.update(overrides)
    return EndpointConfig(**defaults)


class ScriptedTransport:
    """Transport stub answering from a script.

    ``script`` is either a callable(messages) -> str or a list of replies
    consumed in order (the last reply repeats).  Every request is recorded.
    """

    def __init__(self, script):
        self._script = script
        self._index = 0
        self.requests: list[list[dict]] = []
        self._lock = threading.Lock()

    def __call__(self, endpoint, messages):
        with self._lock:
            self.requests.append(messages)
            if callable(self._script):
                return self._script(messages)
            reply = self._script[min(self._index, len(self._script) - 1)]
            self._index += 1
        if isinstance(reply, Exception):
            raise reply
        return reply


class FlakyTransport:
    """Fails with a retryable error ``failures`` times, then succeeds."""

    def __init__(self, failures: int, reply: str = "ok"):
        self.failures = failures
        self.reply = reply
        self.attempts = 0

    def __call__(self, endpoint, messages):
        self.attempts += 1
        if self.attempts <= self.failures:
            raise TransportFailure("stub 500", status=500)
        return self.reply


class ConcurrencyProbe:
    """Transport that records the peak number of concurrent in-flight calls."""

    def __init__(self, reply: str = "ok", hold_seconds: float = 0.02):
        self.reply = reply
        self.hold_seconds = hold_seconds
        self._lock = threading.Lock()
        self._in_flight = 0
        self.peak = 0

    def __call__(self, endpoint, messages):
        import time

        with self._lock:
            self._in_flight += 1
            self.peak = max(self.peak, self._in_flight)
        time.sleep(self.hold_seconds)
        with self._lock:
            self._in_flight -= 1
        return self.reply


class _StubChatHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length))
        status, content = self.server.reply_fn(payload["messages"])
        body = json.dumps(
            {"choices": [{"message": {"role": "assistant", "content": content}}]}
        ).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if status < 500:
            self.wfile.write(body)

    def log_message(self, *args):
        pass


class StubChatServer:
    """Local OpenAI-compatible chat endpoint answering from ``reply_fn``.

    ``reply_fn(messages) -> content`` or ``(status, content)``.
    """

    def __init__(self, reply_fn):
        def normalized(messages):
            result = reply_fn(messages)
            return result if isinstance(result, tuple) else (200, result)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _StubChatHandler)
        self._server.reply_fn = normalized
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/v1"

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_chat_server():
    servers = []

    def start(reply_fn) -> StubChatServer:
        server = StubChatServer(reply_fn)
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.close()


@pytest.fixture(scope="session")
def review_corpus():
    expected = json.loads((FIXTURES / "review_corpus" / "expected.json").read_text("utf-8"))
    docs = {
        name: (FIXTURES / "review_corpus" / f"{name}.md").read_text("utf-8")
        for name in expected
    }
    return docs, expected


@pytest.fixture(scope="session")
def arxiv_feed_xml():
    return (FIXTURES / "arxiv_feed.xml").read_text("utf-8")
