"""Command-line front end: a thin client of the matcomp service.

All computation happens behind the service API.  By default the CLI talks to
an in-process instance over an ASGI transport (no server needed); pass
--server URL to use a running one instead.

Exit codes: 0 success, 1 parse/input error, 2 internal error, 3 oracle
budget exceeded.  MATCOMP_THREADS caps simulation parallelism (0 = auto).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .clusters import geometric_k_grid, render_aggregate_csv, render_raw_csv
from .matfile import MatrixFileError, parse_matrix_text, render_matrix
from .service.models import MatrixModel, matrix_to_model, model_to_partial

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INTERNAL = 2
EXIT_BUDGET = 3


class ServiceClient:
    """Minimal JSON-over-HTTP client; in-process unless a server URL is given."""

    def __init__(self, server: Optional[str] = None):
        self._server = server
        self._app = None
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            from .service.app import create_app

            self._app = create_app()
            self._client = None

    def post(self, path: str, payload: dict):
        if self._client is not None:
            resp = self._client.post(path, json=payload)
        else:
            resp = self._asgi_request(path, payload)
        try:
            body = resp.json()
        except ValueError:
            body = {}
        return resp.status_code, body

    def _asgi_request(self, path: str, payload: dict):
        import asyncio

        import httpx

        async def go():
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://matcomp.local",
                                         timeout=600.0) as client:
                return await client.post(path, json=payload)

        return asyncio.run(go())


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _error_exit(status: int, body: dict) -> int:
    detail = body.get("detail", {})
    if isinstance(detail, dict):
        code = detail.get("code", "")
        message = detail.get("message", str(body))
    else:
        code, message = "", str(detail)
    if code == "budget-exceeded":
        return _fail(message, EXIT_BUDGET)
    if code == "unsupported-field":
        return _fail(message, EXIT_PARSE)
    if status >= 500:
        return _fail(f"internal service error: {message}", EXIT_INTERNAL)
    return _fail(message or f"request failed with status {status}", EXIT_PARSE)


def _load_matrix(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    matrix = parse_matrix_text(text)
    return matrix_to_model(matrix).model_dump()


def _matrix_from_payload(payload: dict):
    return model_to_partial(MatrixModel.model_validate(payload))


def cmd_complete(args, client: ServiceClient) -> int:
    try:
        matrix = _load_matrix(args.infile)
    except (OSError, MatrixFileError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    payload = {"matrix": matrix, "subdiag": not args.no_subdiag,
               "approx_trim": not args.no_approx}
    if args.zero_budget is not None:
        payload["zero_budget"] = args.zero_budget
    status, body = client.post("/v1/complete", payload)
    if status != 200:
        return _error_exit(status, body)
    completed = _matrix_from_payload(body["matrix"]).to_dense()
    with open(args.outfile, "w", encoding="utf-8") as fh:
        fh.write(render_matrix(completed))
    print(f"rank={body['rank']} deviation_bound={body['deviation_bound']}")
    return EXIT_OK


def cmd_decompose(args, client: ServiceClient) -> int:
    try:
        matrix = _load_matrix(args.infile)
    except (OSError, MatrixFileError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    status, body = client.post("/v1/decompose", {"matrix": matrix})
    if status != 200:
        return _error_exit(status, body)
    if args.json:
        print(json.dumps(body, indent=2))
        return EXIT_OK
    print("junk rows:", " ".join(map(str, body["junk_rows"])) or "(none)")
    print("junk cols:", " ".join(map(str, body["junk_cols"])) or "(none)")
    for i, cl in enumerate(body["clusters"]):
        rows = " ".join(map(str, cl["rows"]))
        cols = " ".join(map(str, cl["cols"]))
        print(f"cluster {i}: rows=[{rows}] cols=[{cols}]")
    print(f"clusters={len(body['clusters'])}")
    return EXIT_OK


def cmd_simulate(args, client: ServiceClient) -> int:
    if args.k_grid:
        try:
            k_values = [int(tok) for tok in args.k_grid.split(",") if tok.strip() != ""]
        except ValueError:
            return _fail(f"bad --k-grid {args.k_grid!r}", EXIT_PARSE)
    else:
        k_values = geometric_k_grid(args.n, args.k_steps)
    threads = None
    env = os.environ.get("MATCOMP_THREADS")
    if env is not None:
        try:
            threads = int(env)
        except ValueError:
            return _fail(f"bad MATCOMP_THREADS value {env!r}", EXIT_PARSE)
    payload = {"n": args.n, "k_values": k_values, "trials": args.trials,
               "seed": args.seed, "include_raw": args.raw is not None,
               "threads": threads}
    status, body = client.post("/v1/simulate", payload)
    if status != 200:
        return _error_exit(status, body)
    rows = [(row["n"], row["k"], row["mean_clusters"], row["stddev"])
            for row in body["aggregated"]]
    with open(args.outfile, "w", encoding="utf-8") as fh:
        fh.write(render_aggregate_csv(rows))
    if args.raw is not None:
        from .clusters import ClusterCountRecord

        records = [ClusterCountRecord(n=r["n"], k=r["k"], trial=r["trial"],
                                      clusters=r["clusters"]) for r in body["raw"]]
        with open(args.raw, "w", encoding="utf-8") as fh:
            fh.write(render_raw_csv(records))
    print(f"wrote {len(rows)} k-values x {args.trials} trials to {args.outfile}")
    return EXIT_OK


def cmd_oracle(args, client: ServiceClient) -> int:
    try:
        matrix = _load_matrix(args.infile)
    except (OSError, MatrixFileError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    payload = {"matrix": matrix}
    if args.max_unknowns is not None:
        payload["max_unknowns"] = args.max_unknowns
    status, body = client.post("/v1/oracle", payload)
    if status != 200:
        return _error_exit(status, body)
    print(f"mr={body['mr']}")
    if args.outfile:
        witness = _matrix_from_payload(body["witness"]).to_dense()
        with open(args.outfile, "w", encoding="utf-8") as fh:
            fh.write(render_matrix(witness))
    return EXIT_OK


def cmd_trim(args, client: ServiceClient) -> int:
    try:
        matrix = _load_matrix(args.infile)
    except (OSError, MatrixFileError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    status, body = client.post("/v1/trim", {"matrix": matrix})
    if status != 200:
        return _error_exit(status, body)
    core = _matrix_from_payload(body["core"])
    sys.stdout.write(render_matrix(core))
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            json.dump(body["log"], fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_serve(args, _client) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matcomp",
                                     description="Exact low-rank matrix completion toolkit")
    parser.add_argument("--server", default=None,
                        help="base URL of a running matcomp service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="complete a partial matrix to low rank")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--no-subdiag", action="store_true",
                   help="disable conjoined-line sub-decomposition")
    p.add_argument("--no-approx", action="store_true",
                   help="disable approximate trimming (exact trims only)")
    p.add_argument("--zero-budget", type=int, default=None,
                   help="max unknowns for the exact zero(u,A) test")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("decompose", help="report junk lines and clusters")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", help="cluster-count Monte Carlo, CSV output")
    p.add_argument("--n", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k-grid", default=None, help="comma-separated k values")
    group.add_argument("--k-steps", type=int, default=None,
                       help="geometric grid size from 1 to n^2 (plus k=0)")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--raw", default=None, help="also write per-trial CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact minimum rank by enumeration")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--max-unknowns", type=int, default=None)
    p.add_argument("--out", dest="outfile", default=None,
                   help="write a witness completion here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("trim", help="exact trimming; prints the core")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--log", default=None, help="write the trim log as JSON here")
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    client = None if args.command == "serve" else ServiceClient(args.server)
    try:
        return args.func(args, client)
    except OSError as exc:
        return _fail(str(exc), EXIT_PARSE)


if __name__ == "__main__":
    sys.exit(main())
