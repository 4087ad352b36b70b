"""Pydantic wire models and converters between JSON payloads and core types.

Matrix values travel as field-literal strings (``"3"``, ``"2/5"``,
``"0.25"``) so exact values survive JSON round trips.
"""

from __future__ import annotations

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field

from ..fields import DenseMatrix, FieldSpec, PRIME_FIELD, RATIONAL
from ..partial import PartialMatrix
from ..trim import TrimLog, TrimRecord


class FieldModel(BaseModel):
    kind: Literal["gf2", "gfp", "rational", "real"]
    modulus: Optional[int] = None
    tolerance: Optional[float] = None


class MatrixModel(BaseModel):
    field: FieldModel
    rows: int = Field(ge=0)
    cols: int = Field(ge=0)
    entries: List[Tuple[int, int, str]] = Field(default_factory=list,
                                                description="known entries as (row, col, literal)")


def field_to_model(field: FieldSpec) -> FieldModel:
    if field.kind == PRIME_FIELD:
        if field.modulus == 2:
            return FieldModel(kind="gf2")
        return FieldModel(kind="gfp", modulus=field.modulus)
    if field.kind == RATIONAL:
        return FieldModel(kind="rational")
    return FieldModel(kind="real", tolerance=field.tolerance)


def model_to_field(model: FieldModel) -> FieldSpec:
    if model.kind == "gf2":
        return FieldSpec.gf(2)
    if model.kind == "gfp":
        if model.modulus is None:
            raise ValueError("gfp field needs a modulus")
        return FieldSpec.gf(model.modulus)
    if model.kind == "rational":
        return FieldSpec.rational()
    return FieldSpec.real(1e-9 if model.tolerance is None else model.tolerance)


def matrix_to_model(m) -> MatrixModel:
    field = m.field
    fmodel = field_to_model(field)
    if isinstance(m, PartialMatrix):
        entries = [(r, c, field.format_literal(v)) for r, c, v in m.known_items()]
    else:
        entries = [(r, c, field.format_literal(m.entry(r, c)))
                   for r in range(m.rows) for c in range(m.cols)]
    return MatrixModel(field=fmodel, rows=m.rows, cols=m.cols, entries=entries)


def model_to_partial(model: MatrixModel) -> PartialMatrix:
    field = model_to_field(model.field)
    known = {}
    for r, c, literal in model.entries:
        known[(r, c)] = field.parse_literal(literal)
    return PartialMatrix(model.rows, model.cols, field, known)


def model_to_dense(model: MatrixModel) -> DenseMatrix:
    return model_to_partial(model).to_dense()


# -- requests / responses ------------------------------------------------------


class CompleteRequest(BaseModel):
    matrix: MatrixModel
    subdiag: bool = True
    approx_trim: bool = True
    zero_budget: Optional[int] = Field(default=None, ge=0,
                                       description="max unknowns for the exact zero(u,A) test")
    include_trace: bool = False


class CompleteResponse(BaseModel):
    matrix: MatrixModel
    rank: int
    deviation_bound: int
    cluster_ranks: List[int]
    trace: Optional[List[dict]] = None


class ClusterModel(BaseModel):
    rows: List[int]
    cols: List[int]


class DecomposeRequest(BaseModel):
    matrix: MatrixModel


class DecomposeResponse(BaseModel):
    junk_rows: List[int]
    junk_cols: List[int]
    clusters: List[ClusterModel]


class SimulateRequest(BaseModel):
    n: int = Field(ge=1)
    k_values: List[int]
    trials: int = Field(ge=1)
    seed: int = Field(ge=0)
    include_raw: bool = False
    threads: Optional[int] = Field(default=None, ge=0)


class SimulateAggregateRow(BaseModel):
    n: int
    k: int
    mean_clusters: float
    stddev: float


class SimulateRawRow(BaseModel):
    n: int
    k: int
    trial: int
    clusters: int


class SimulateResponse(BaseModel):
    aggregated: List[SimulateAggregateRow]
    raw: Optional[List[SimulateRawRow]] = None


class OracleRequest(BaseModel):
    matrix: MatrixModel
    max_unknowns: Optional[int] = Field(default=None, ge=0)
    max_elements: Optional[int] = Field(default=None, ge=1)


class OracleResponse(BaseModel):
    mr: int
    witness: MatrixModel


class TrimRequest(BaseModel):
    matrix: MatrixModel


class TrimRecordModel(BaseModel):
    axis: Literal["row", "col"]
    index: int
    donors: List[int]
    coefficients: Optional[List[str]] = None
    approximate: bool
    known: Optional[List[Tuple[int, str]]] = None


class TrimLogModel(BaseModel):
    rows: int
    cols: int
    records: List[TrimRecordModel]


class TrimResponse(BaseModel):
    core: MatrixModel
    log: TrimLogModel
    approximate_count: int


def trimlog_to_model(log: TrimLog, field: FieldSpec) -> TrimLogModel:
    records = []
    for rec in log.records:
        coeffs = None
        if rec.coefficients is not None:
            coeffs = [field.format_literal(x) for x in rec.coefficients]
        known = [(pos, field.format_literal(v)) for pos, v in rec.known]
        records.append(TrimRecordModel(axis=rec.axis, index=rec.index,
                                       donors=list(rec.donors), coefficients=coeffs,
                                       approximate=rec.approximate, known=known))
    return TrimLogModel(rows=log.rows, cols=log.cols, records=records)


def model_to_trimlog(model: TrimLogModel, field: FieldSpec) -> TrimLog:
    records = []
    for rec in model.records:
        coeffs = None
        if rec.coefficients is not None:
            coeffs = tuple(field.parse_literal(x) for x in rec.coefficients)
        known = tuple((pos, field.parse_literal(v)) for pos, v in (rec.known or []))
        records.append(TrimRecord(axis=rec.axis, index=rec.index, donors=tuple(rec.donors),
                                  coefficients=coeffs, approximate=rec.approximate,
                                  known=known))
    return TrimLog(rows=model.rows, cols=model.cols, records=tuple(records))
