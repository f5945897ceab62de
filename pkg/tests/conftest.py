"""Shared fixtures: an in-process HTTP server speaking the inference wire
contracts (embed, embed_tokens, chat, classify) with failure injection."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from iotadmin.embedding import StubEmbedder


class WireState:
    def __init__(self):
        self.embedder = StubEmbedder(dim=256)
        self.fail_next = 0          # respond 500 this many times
        self.drop_token_route = False
        self.classify_payload = None
        self.requests: list[tuple[str, dict]] = []

    def reset(self):
        self.__init__()


class _Handler(BaseHTTPRequestHandler):
    state: WireState

    def log_message(self, *args):  # keep test output quiet
        pass

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        return json.loads(self.rfile.read(length) or b"{}")

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        st = self.state
        body = self._read_body()
        st.requests.append((self.path, body))
        if st.fail_next > 0:
            st.fail_next -= 1
            self._send(500, {"error": "injected failure"})
            return
        if self.path == "/v1/embed":
            vectors = [st.embedder.embed([t])[0].tolist() for t in body["texts"]]
            self._send(200, {"vectors": vectors})
        elif self.path == "/v1/embed_tokens":
            if st.drop_token_route:
                self._send(404, {"error": "unsupported"})
                return
            token_embs = st.embedder.embed_tokens(body["text"])
            self._send(200, {"tokens": [te.token for te in token_embs],
                             "vectors": [te.vector.tolist() for te in token_embs]})
        elif self.path == "/v1/chat":
            prompt = body["prompt"]
            self._send(200, {"text": f"echoing: {prompt.splitlines()[-1]}",
                             "usage": {"tokens": 7}})
        elif self.path == "/v1/classify":
            if st.classify_payload is not None:
                self._send(200, st.classify_payload)
                return
            classes = ["Normal", "Port_Scanning"]
            labels, probs = [], []
            for text in body["texts"]:
                if "scan" in text:
                    labels.append("Port_Scanning")
                    probs.append([0.1, 0.9])
                else:
                    labels.append("Normal")
                    probs.append([0.8, 0.2])
            self._send(200, {"classes": classes, "labels": labels, "probs": probs})
        else:
            self._send(404, {"error": "no such route"})


@pytest.fixture(scope="session")
def wire_server():
    state = WireState()
    handler = type("Handler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base_url = f"http://127.0.0.1:{server.server_address[1]}"
    yield base_url, state
    server.shutdown()


@pytest.fixture()
def wire(wire_server):
    base_url, state = wire_server
    state.reset()
    return base_url, state
