"""Plain-text matrix files: the CLI's on-disk format.

Line 1 declares the field (``field gf2``, ``field gfp 7``, ``field
rational``, ``field real 1e-9``), line 2 the dimensions, then one line per
row with whitespace-separated tokens: ``?`` for unknown, integer literals
over GF(p), ``a/b`` or integers over the rationals, decimals over the reals.
Lines starting with ``#`` are comments.  The format round-trips bit-exactly
on canonical files, so goldens stay diffable.
"""

from __future__ import annotations

from typing import Union

from .fields import DenseMatrix, FieldSpec, PRIME_FIELD, RATIONAL
from .partial import PartialMatrix

UNKNOWN_TOKEN = "?"


class MatrixFileError(ValueError):
    """Parse failure; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _significant_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped


def _parse_field(tokens, lineno: int) -> FieldSpec:
    if not tokens or tokens[0] != "field":
        raise MatrixFileError("expected a field header like 'field gf2'", lineno)
    try:
        if tokens[1:] == ["gf2"]:
            return FieldSpec.gf(2)
        if len(tokens) == 3 and tokens[1] == "gfp":
            return FieldSpec.gf(int(tokens[2]))
        if tokens[1:] == ["rational"]:
            return FieldSpec.rational()
        if len(tokens) == 3 and tokens[1] == "real":
            return FieldSpec.real(float(tokens[2]))
    except ValueError as exc:
        raise MatrixFileError(f"bad field header: {exc}", lineno) from None
    raise MatrixFileError(f"unrecognized field header {' '.join(tokens)!r}", lineno)


def parse_matrix_text(text: str) -> PartialMatrix:
    lines = list(_significant_lines(text))
    if not lines:
        raise MatrixFileError("empty matrix file", 1)
    lineno, header = lines[0]
    field = _parse_field(header.split(), lineno)
    if len(lines) < 2:
        raise MatrixFileError("missing dimension line", lineno)
    lineno, dims = lines[1]
    parts = dims.split()
    if len(parts) != 2:
        raise MatrixFileError("dimension line must be '<rows> <cols>'", lineno)
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixFileError("dimensions must be integers", lineno) from None
    if rows < 0 or cols < 0:
        raise MatrixFileError("dimensions must be nonnegative", lineno)
    data_lines = lines[2:]
    if len(data_lines) != rows:
        where = data_lines[rows][0] if len(data_lines) > rows else lineno
        raise MatrixFileError(f"expected {rows} data rows, found {len(data_lines)}", where)
    known = {}
    for r, (lno, line) in enumerate(data_lines):
        tokens = line.split()
        if len(tokens) != cols:
            raise MatrixFileError(f"row has {len(tokens)} tokens, expected {cols}", lno)
        for c, tok in enumerate(tokens):
            if tok == UNKNOWN_TOKEN:
                continue
            try:
                known[(r, c)] = field.parse_literal(tok)
            except (ValueError, ZeroDivisionError) as exc:
                raise MatrixFileError(f"bad value {tok!r}: {exc}", lno) from None
    return PartialMatrix(rows, cols, field, known)


def render_field_header(field: FieldSpec) -> str:
    if field.kind == PRIME_FIELD:
        return "field gf2" if field.modulus == 2 else f"field gfp {field.modulus}"
    if field.kind == RATIONAL:
        return "field rational"
    return f"field real {field.tolerance!r}"


def render_matrix(m: Union[PartialMatrix, DenseMatrix]) -> str:
    field = m.field
    lines = [render_field_header(field), f"{m.rows} {m.cols}"]
    if isinstance(m, PartialMatrix):
        for r in range(m.rows):
            row = []
            for c in range(m.cols):
                v = m.get(r, c)
                row.append(UNKNOWN_TOKEN if v is None else field.format_literal(v))
            lines.append(" ".join(row))
    else:
        for r in range(m.rows):
            lines.append(" ".join(field.format_literal(m.entry(r, c)) for c in range(m.cols)))
    return "\n".join(lines) + "\n"
