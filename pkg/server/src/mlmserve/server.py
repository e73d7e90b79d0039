"""Serving loops and CLI.

stdio mode answers requests on standard output (diagnostics go to stderr,
never stdout); tcp mode accepts multiple connections, each with its own
single-threaded request loop.
"""

from __future__ import annotations

import argparse
import socketserver
import sys

from .config import ServerConfig
from .protocol import encode, handle_line
from .service import MlmService


def serve_stdio(service: MlmService, stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(encode(handle_line(line, service)) + "\n")
        stdout.flush()


def serve_tcp(service: MlmService, port: int) -> None:
    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace")
                if not line.strip():
                    continue
                payload = encode(handle_line(line, service)) + "\n"
                self.wfile.write(payload.encode("utf-8"))
                self.wfile.flush()

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server(("127.0.0.1", port), Handler) as server:
        print(f"mlm-server: listening on 127.0.0.1:{server.server_address[1]}",
              file=sys.stderr, flush=True)
        server.serve_forever()


def serve(config: ServerConfig) -> None:
    """Load the model and answer requests until terminated."""
    service = MlmService(config)
    print(f"mlm-server: loaded {config.model} on {config.device}",
          file=sys.stderr, flush=True)
    if config.listen == "stdio":
        serve_stdio(service)
    else:
        serve_tcp(service, config.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlm-server",
        description="Serve fill_mask/embed/tokenize for a masked LM over "
                    "newline-delimited JSON.",
    )
    parser.add_argument("--model", required=True,
                        help="Hugging Face model name or local path")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--stdio", action="store_true", default=True,
                      help="serve on standard streams (default)")
    mode.add_argument("--port", type=int, help="serve on a local TCP port")
    parser.add_argument("--top-k", dest="top_k", type=int, default=128,
                        help="default distribution truncation")
    parser.add_argument("--max-length", dest="max_length", type=int, default=512)
    parser.add_argument("--device", default="cpu")
    return parser


def main() -> None:
    args = build_parser().parse_args()
    config = ServerConfig(
        model=args.model,
        listen="tcp" if args.port else "stdio",
        port=args.port,
        top_k=args.top_k,
        max_length=args.max_length,
        device=args.device,
    )
    try:
        serve(config)
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()
