"""Serve a toy model over TCP or standard streams, one NDJSON response per line."""

from __future__ import annotations

import socketserver
import sys

from .model import ToyModel
from .protocol import handle_line


def serve_stdio(model: ToyModel, stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(handle_line(model, line) + "\n")
        stdout.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        while True:
            raw = self.rfile.readline()
            if not raw:
                break
            line = raw.decode("utf-8", "replace")
            if not line.strip():
                continue
            out = handle_line(self.server.model, line) + "\n"
            self.wfile.write(out.encode("utf-8"))
            self.wfile.flush()


class BridgeServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, model: ToyModel, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.model = model

    @property
    def endpoint(self) -> str:
        host, port = self.server_address
        return f"{host}:{port}"


def serve_tcp(model: ToyModel, host: str, port: int) -> None:
    with BridgeServer(model, host, port) as server:
        print(f"listening on {server.endpoint}", file=sys.stderr)
        server.serve_forever()
