"""FastAPI service exposing the completion toolkit.

Stateless endpoints wrap the core library one-to-one; the CLI is a thin
client of this app (in-process by default, remote with --server).

Error contract: invalid inputs answer 400 with ``detail.code``
``invalid-input`` or ``unsupported-field``; an exceeded oracle budget
answers 422 with ``budget-exceeded``.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..clusters import aggregate_records, decompose, simulate_cluster_counts
from ..oracle import BudgetExceeded, OracleBudget, UnsupportedField, brute_min_rank
from ..pipeline import CompletionOptions, complete
from ..trim import trim_to_fixpoint
from .models import (ClusterModel, CompleteRequest, CompleteResponse, DecomposeRequest,
                     DecomposeResponse, OracleRequest, OracleResponse,
                     SimulateAggregateRow, SimulateRawRow, SimulateRequest,
                     SimulateResponse, TrimRequest, TrimResponse, matrix_to_model,
                     model_to_partial, trimlog_to_model)


def _bad_request(code: str, exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail={"code": code, "message": str(exc)})


def create_app() -> FastAPI:
    app = FastAPI(title="matcomp", version=__version__,
                  description="Exact low-rank matrix completion by decomposition and trimming")

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/complete", response_model=CompleteResponse)
    def complete_endpoint(req: CompleteRequest) -> CompleteResponse:
        try:
            M = model_to_partial(req.matrix)
            budget = OracleBudget(max_unknowns=req.zero_budget) if req.zero_budget is not None \
                else OracleBudget()
            opts = CompletionOptions(zero_budget=budget, enable_subdiag=req.subdiag,
                                     enable_approx_trim=req.approx_trim)
            result = complete(M, opts)
        except ValueError as exc:
            raise _bad_request("invalid-input", exc)
        return CompleteResponse(matrix=matrix_to_model(result.matrix), rank=result.rank,
                                deviation_bound=result.deviation_bound,
                                cluster_ranks=list(result.cluster_ranks),
                                trace=list(result.trace) if req.include_trace else None)

    @app.post("/v1/decompose", response_model=DecomposeResponse)
    def decompose_endpoint(req: DecomposeRequest) -> DecomposeResponse:
        try:
            M = model_to_partial(req.matrix)
            report = M.strip_junk()
            clusters = []
            if report.core.rows and report.core.cols:
                for cl in decompose(report.core).clusters:
                    clusters.append(ClusterModel(
                        rows=[report.row_map[r] for r in cl.rows],
                        cols=[report.col_map[c] for c in cl.cols]))
        except ValueError as exc:
            raise _bad_request("invalid-input", exc)
        return DecomposeResponse(junk_rows=list(report.junk_rows),
                                 junk_cols=list(report.junk_cols), clusters=clusters)

    @app.post("/v1/simulate", response_model=SimulateResponse)
    def simulate_endpoint(req: SimulateRequest) -> SimulateResponse:
        try:
            records = simulate_cluster_counts(req.n, req.k_values, req.trials, req.seed,
                                              threads=req.threads)
        except ValueError as exc:
            raise _bad_request("invalid-input", exc)
        aggregated = [SimulateAggregateRow(n=n, k=k, mean_clusters=mean, stddev=std)
                      for n, k, mean, std in aggregate_records(records)]
        raw = None
        if req.include_raw:
            raw = [SimulateRawRow(n=r.n, k=r.k, trial=r.trial, clusters=r.clusters)
                   for r in records]
        return SimulateResponse(aggregated=aggregated, raw=raw)

    @app.post("/v1/oracle", response_model=OracleResponse)
    def oracle_endpoint(req: OracleRequest) -> OracleResponse:
        kwargs = {}
        if req.max_unknowns is not None:
            kwargs["max_unknowns"] = req.max_unknowns
        if req.max_elements is not None:
            kwargs["max_elements"] = req.max_elements
        budget = OracleBudget(**kwargs)
        try:
            M = model_to_partial(req.matrix)
            mr, witness = brute_min_rank(M, budget)
        except BudgetExceeded as exc:
            raise HTTPException(status_code=422,
                                detail={"code": "budget-exceeded", "message": str(exc)})
        except UnsupportedField as exc:
            raise _bad_request("unsupported-field", exc)
        except ValueError as exc:
            raise _bad_request("invalid-input", exc)
        return OracleResponse(mr=mr, witness=matrix_to_model(witness))

    @app.post("/v1/trim", response_model=TrimResponse)
    def trim_endpoint(req: TrimRequest) -> TrimResponse:
        try:
            M = model_to_partial(req.matrix)
            outcome = trim_to_fixpoint(M)
        except ValueError as exc:
            raise _bad_request("invalid-input", exc)
        return TrimResponse(core=matrix_to_model(outcome.core),
                            log=trimlog_to_model(outcome.log, M.field),
                            approximate_count=outcome.approximate_count)

    return app


app = create_app()
