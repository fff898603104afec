"""Shared fixtures: random menu generators and a local stub evaluator."""

from __future__ import annotations

import http.server
import threading

import numpy as np
import pytest

from contractlab.economics import ContractMenu, TypeGrid, quantize_types


def random_instance_params(rng: np.random.Generator, K: int):
    """One draw of (grid, delta-compatible shapes, costs) for menu tests."""
    phi_min = rng.uniform(5.0, 10.0)
    phi_max = rng.uniform(10.0, 15.0)
    grid = quantize_types(phi_min, phi_max, K)
    kappa = rng.uniform(1.0, 3.0)
    eta = rng.uniform(5.0, 10.0)
    return grid, kappa, eta


def random_menu(rng: np.random.Generator, K: int,
                q_max: float = 10.0, r_max: float = 20.0) -> ContractMenu:
    return ContractMenu(quality=rng.uniform(0.0, q_max, size=K),
                        reward=rng.uniform(0.0, r_max, size=K))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class _StubHandler(http.server.BaseHTTPRequestHandler):
    """Scriptable evaluator endpoint: pops canned responses off a queue."""

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        self.server.requests.append(
            (dict(self.headers.items()), body.decode("utf-8")))
        if self.server.responses:
            status, text = self.server.responses.pop(0)
        else:
            status, text = 200, "The rating is 7."
        payload = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_evaluator():
    """Local HTTP server; test code appends (status, body) pairs to
    ``server.responses`` and inspects ``server.requests``."""
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    server.responses = []
    server.requests = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server.url = f"http://127.0.0.1:{server.server_address[1]}/evaluate"
    yield server
    server.shutdown()
    thread.join(timeout=5)
