"""Remote backend protocol: payloads, retries, typed errors, ordering."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from crisp.backends.base import (
    BackendConfig,
    BackendError,
    GenerationRequest,
    ResponseDecodeError,
    TransportError,
    build_backend,
)
from crisp.backends.remote import RemoteBackend
from crisp.extraction import RawResponse, path_from_response


class _Handler(BaseHTTPRequestHandler):
    server_version = "stub/0"

    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length) or b"{}")
        self.server.requests.append((self.path, payload, dict(self.headers)))
        status, body = self.server.responder(self.path, payload, len(self.server.requests))
        data = body if isinstance(body, (bytes, str)) else json.dumps(body)
        if isinstance(data, str):
            data = data.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


@pytest.fixture
def server():
    httpd = HTTPServer(("127.0.0.1", 0), _Handler)
    httpd.requests = []
    httpd.responder = lambda path, payload, count: (200, {"ok": True})
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield httpd
    httpd.shutdown()
    thread.join(timeout=2)


def backend_for(server, **overrides):
    url = f"http://127.0.0.1:{server.server_address[1]}"
    kwargs = dict(
        kind="remote",
        endpoint=f"{url}/v1/completions",
        reward_endpoint=f"{url}/v1/reward",
        api_key="sk-test",
        model="test-model",
        timeout=5.0,
        max_parallel=4,
        retry_backoff=0.01,
    )
    kwargs.update(overrides)
    return RemoteBackend(BackendConfig(**kwargs))


def completion_body(texts, completion_tokens):
    return {
        "choices": [{"text": t} for t in texts],
        "usage": {"completion_tokens": completion_tokens},
    }


def gen_request(n=2, prefixes=None, **kw):
    return GenerationRequest(question="What is 2+2?", task_kind="math", n=n,
                             prefixes=prefixes or [], **kw)


def sample_path():
    return path_from_response(
        "q", RawResponse("Step 1: a.\nStep 2: The answer is: \\boxed{4}", 12), "math"
    )


class TestGenerate:
    def test_payload_and_responses(self, server):
        server.responder = lambda path, payload, count: (
            200, completion_body(["Step 1: The answer is: \\boxed{4}"] * payload["n"], 20),
        )
        backend = backend_for(server)
        out = backend.generate(gen_request(n=2))
        assert len(out) == 2
        assert out[0].token_count == 10  # 20 tokens split across 2 choices
        path, payload, headers = server.requests[0]
        assert path == "/v1/completions"
        assert payload["model"] == "test-model"
        assert payload["n"] == 2
        assert "# Reasoning:" in payload["prompt"]
        assert headers["Authorization"] == "Bearer sk-test"

    def test_uneven_token_split_is_deterministic(self, server):
        server.responder = lambda path, payload, count: (
            200, completion_body(["a", "b", "c"], 10),
        )
        backend = backend_for(server)
        out = backend.generate(gen_request(n=3))
        assert [r.token_count for r in out] == [4, 3, 3]

    def test_short_choice_list_is_an_error(self, server):
        server.responder = lambda path, payload, count: (200, completion_body(["only one"], 5))
        backend = backend_for(server)
        with pytest.raises(BackendError, match="expected 3"):
            backend.generate(gen_request(n=3))

    def test_prefix_round_robin_ordering(self, server):
        def responder(path, payload, count):
            # answer with the tail of the prompt so we can see which prefix ran
            tag = "P1" if "alpha" in payload["prompt"] else "P2"
            return 200, completion_body([f"Step 2: {tag} continuation {i}" for i in range(payload["n"])],
                                        payload["n"] * 7)

        server.responder = responder
        backend = backend_for(server)
        prefixes = [["Step 1: alpha."], ["Step 1: beta."]]
        out = backend.generate(gen_request(n=5, prefixes=prefixes))
        tags = ["P1" if "P1" in r.text else "P2" for r in out]
        assert tags == ["P1", "P2", "P1", "P2", "P1"]
        # 3 continuations for the first prefix, 2 for the second
        assert sum(1 for t in tags if t == "P1") == 3

    def test_missing_usage_is_decode_error(self, server):
        server.responder = lambda path, payload, count: (200, {"choices": [{"text": "x"}]})
        backend = backend_for(server)
        with pytest.raises(ResponseDecodeError, match="completion_tokens"):
            backend.generate(gen_request(n=1))

    def test_non_json_body_is_decode_error(self, server):
        server.responder = lambda path, payload, count: (200, b"<html>oops</html>")
        backend = backend_for(server)
        with pytest.raises(ResponseDecodeError):
            backend.generate(gen_request(n=1))

    def test_step_mode_truncates_to_first_step(self, server):
        server.responder = lambda path, payload, count: (
            200, completion_body(["Step 1: first.\nStep 2: second."], 8),
        )
        backend = backend_for(server)
        (resp,) = backend.generate(gen_request(n=1, step_mode=True))
        assert resp.text == "Step 1: first."
        assert server.requests[0][1]["stop"] == ["\nStep"]


class TestRetries:
    def test_5xx_retried_then_succeeds(self, server):
        def responder(path, payload, count):
            if count < 3:
                return 503, {"error": "busy"}
            return 200, completion_body(["x"], 4)

        server.responder = responder
        backend = backend_for(server)
        out = backend.generate(gen_request(n=1))
        assert len(out) == 1
        assert len(server.requests) == 3

    def test_retry_exhaustion_reports_attempts(self, server):
        server.responder = lambda path, payload, count: (500, {"error": "down"})
        backend = backend_for(server)
        with pytest.raises(TransportError) as err:
            backend.generate(gen_request(n=1))
        assert err.value.attempts == 4  # initial try + 3 retries

    def test_4xx_never_retried(self, server):
        server.responder = lambda path, payload, count: (400, {"error": "bad request"})
        backend = backend_for(server)
        with pytest.raises(BackendError, match="400"):
            backend.generate(gen_request(n=1))
        assert len(server.requests) == 1

    def test_connection_refused_is_transport_error(self):
        backend = RemoteBackend(BackendConfig(
            kind="remote", endpoint="http://127.0.0.1:9/v1/completions",
            reward_endpoint="http://127.0.0.1:9/v1/reward",
            timeout=0.2, retry_backoff=0.01,
        ))
        with pytest.raises(TransportError):
            backend.generate(gen_request(n=1))


class TestRewardScoring:
    def test_score_outcome(self, server):
        server.responder = lambda path, payload, count: (200, {"score": 0.83})
        backend = backend_for(server)
        signal = backend.score_outcome(sample_path(), question="What is 2+2?")
        assert signal.raw == pytest.approx(0.83)
        _, payload, _ = server.requests[0]
        assert payload == {"question": "What is 2+2?", "steps": sample_path().steps}

    def test_score_outcome_needs_question(self, server):
        backend = backend_for(server)
        with pytest.raises(BackendError, match="question"):
            backend.score_outcome(sample_path())

    def test_score_steps(self, server):
        server.responder = lambda path, payload, count: (
            200, {"step_scores": [0.9, 0.7]},
        )
        backend = backend_for(server)
        signal = backend.score_steps(sample_path(), question="q")
        assert signal.step_scores == [0.9, 0.7]

    def test_wrong_shape_is_decode_error(self, server):
        server.responder = lambda path, payload, count: (200, {"step_scores": [0.7]})
        backend = backend_for(server)
        with pytest.raises(ResponseDecodeError, match="score"):
            backend.score_outcome(sample_path(), question="q")

    def test_parallel_scoring_preserves_order(self, server):
        def responder(path, payload, count):
            # score derived from the request content, not arrival order
            return 200, {"score": len(payload["steps"][0]) / 100.0}

        server.responder = responder
        backend = backend_for(server, max_parallel=8)
        paths = [
            path_from_response("q", RawResponse(f"Step 1: {'x' * k}\nStep 2: The answer is: \\boxed{{1}}", 4), "math")
            for k in range(1, 13)
        ]
        signals = backend.score_paths(paths, mode="outcome", question="q")
        assert [s.raw for s in signals] == [len(p.steps[0]) / 100.0 for p in paths]


class TestConfig:
    def test_env_var_resolution(self, monkeypatch):
        monkeypatch.setenv("CRISP_ENDPOINT", "http://example.test/v1/completions")
        monkeypatch.setenv("CRISP_API_KEY", "sk-env")
        cfg = BackendConfig(kind="remote").resolve_env()
        assert cfg.endpoint == "http://example.test/v1/completions"
        assert cfg.api_key == "sk-env"

    def test_remote_without_endpoint_invalid(self, monkeypatch):
        monkeypatch.delenv("CRISP_ENDPOINT", raising=False)
        with pytest.raises(ValueError, match="endpoint"):
            build_backend(BackendConfig(kind="remote"))

    def test_simulator_requires_scenario(self):
        with pytest.raises(ValueError, match="scenario"):
            BackendConfig(kind="simulator", scenario=None).validate()
