"""Golden-transcript conformance against the real server process."""

import json
import socket
import subprocess
import sys
import time

import pytest

from mlmserve.config import ServerConfig
from mlmserve.protocol import handle_line
from mlmserve.service import MlmService


@pytest.fixture(scope="module")
def stdio_server(tiny_model_dir):
    proc = subprocess.Popen(
        [sys.executable, "-m", "mlmserve.server", "--model", tiny_model_dir,
         "--stdio", "--top-k", "8", "--max-length", "32"],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        bufsize=1,
    )
    yield proc
    proc.stdin.close()
    proc.wait(timeout=10)


def ask(proc, line):
    proc.stdin.write(line + "\n")
    proc.stdin.flush()
    reply = proc.stdout.readline()
    assert reply, "server closed its stdout"
    return json.loads(reply)


class TestStdioGoldenTranscript:
    def test_fill_mask_schema(self, stdio_server):
        response = ask(stdio_server, json.dumps({
            "id": 1, "op": "fill_mask",
            "tokens": ["the", "cat", "sat"], "mask_index": 1, "top_k": 5,
        }))
        assert response["id"] == 1
        assert response["ok"] is True
        dist = response["dist"]
        assert 1 <= len(dist) <= 5
        probs = [p for _, p in dist]
        assert abs(sum(probs) - 1.0) <= 1e-6
        assert probs == sorted(probs, reverse=True)
        assert all(isinstance(t, str) and isinstance(p, float) for t, p in dist)

    def test_identical_requests_identical_responses(self, stdio_server):
        line = json.dumps({
            "id": 2, "op": "fill_mask",
            "tokens": ["the", "dog", "ran"], "mask_index": 2, "top_k": 8,
        })
        assert ask(stdio_server, line) == ask(stdio_server, line)

    def test_embed_schema(self, stdio_server):
        response = ask(stdio_server, json.dumps({
            "id": 3, "op": "embed", "tokens": ["the", "cat"],
        }))
        assert response["id"] == 3 and response["ok"] is True
        assert all(isinstance(v, float) for v in response["vector"])

    def test_tokenize_offsets_cover_input(self, stdio_server):
        response = ask(stdio_server, json.dumps({
            "id": 4, "op": "tokenize", "text": "the cat sat on mat",
        }))
        assert response["ok"] is True
        assert response["tokens"] == ["the", "cat", "sat", "on", "mat"]
        assert response["offsets"][0] == [0, 3]
        assert response["offsets"][-1] == [15, 18]

    def test_malformed_line_survived(self, stdio_server):
        response = ask(stdio_server, "this is not json")
        assert response["ok"] is False
        assert response["id"] is None
        assert "malformed_request" in response["error"]
        # server still answers the next request
        follow_up = ask(stdio_server, json.dumps({
            "id": 5, "op": "embed", "tokens": ["cat"],
        }))
        assert follow_up["id"] == 5 and follow_up["ok"] is True

    def test_unknown_op(self, stdio_server):
        response = ask(stdio_server, json.dumps({"id": 6, "op": "translate"}))
        assert response["ok"] is False and response["id"] == 6

    def test_errors_echo_id(self, stdio_server):
        response = ask(stdio_server, json.dumps({
            "id": 99, "op": "fill_mask", "tokens": ["the"], "mask_index": 7,
        }))
        assert response["id"] == 99 and response["ok"] is False

    def test_too_long_error_string(self, stdio_server):
        response = ask(stdio_server, json.dumps({
            "id": 8, "op": "fill_mask", "tokens": ["the"] * 40, "mask_index": 0,
        }))
        assert response["ok"] is False and response["error"] == "too_long"

    def test_unknown_request_fields_ignored(self, stdio_server):
        response = ask(stdio_server, json.dumps({
            "id": 9, "op": "embed", "tokens": ["cat"], "trace": True, "v": 2,
        }))
        assert response["id"] == 9 and response["ok"] is True


class TestTcp:
    def test_round_trip_over_socket(self, tiny_model_dir):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        proc = subprocess.Popen(
            [sys.executable, "-m", "mlmserve.server", "--model", tiny_model_dir,
             "--port", str(port), "--top-k", "4"],
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            # model-loading progress also lands on stderr; scan for the banner
            for _ in range(200):
                line = proc.stderr.readline()
                if "listening" in line:
                    break
            else:
                pytest.fail("server never announced its port")
            with socket.create_connection(("127.0.0.1", port), timeout=30) as conn:
                stream = conn.makefile("rw", encoding="utf-8", newline="\n")
                stream.write(json.dumps({
                    "id": 1, "op": "fill_mask",
                    "tokens": ["the", "cat"], "mask_index": 0, "top_k": 4,
                }) + "\n")
                stream.flush()
                response = json.loads(stream.readline())
                assert response["id"] == 1 and response["ok"] is True
                assert abs(sum(p for _, p in response["dist"]) - 1.0) <= 1e-6
        finally:
            proc.terminate()
            proc.wait(timeout=10)


class TestHandleLineDirect:
    """In-process checks that don't need a subprocess."""

    @pytest.fixture(scope="class")
    def service(self, tiny_model_dir):
        return MlmService(ServerConfig(model=tiny_model_dir, top_k=8, max_length=32))

    def test_non_object_json(self, service):
        response = handle_line("[1, 2, 3]", service)
        assert response["ok"] is False and response["id"] is None

    def test_missing_op(self, service):
        response = handle_line('{"id": 1}', service)
        assert response["ok"] is False and response["id"] == 1

    def test_string_id_echoed_verbatim(self, service):
        response = handle_line(
            '{"id": "req-7", "op": "embed", "tokens": ["cat"]}', service
        )
        assert response["id"] == "req-7"
