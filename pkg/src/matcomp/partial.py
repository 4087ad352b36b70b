"""Partially known matrices: sparse known entries over an exact field.

A :class:`PartialMatrix` stores only its known entries; absent positions are
unknown.  Known zeros are stored explicitly because they behave differently
from unknowns: a zero is data (it participates in junk detection and in
cluster connectivity), an unknown is a degree of freedom.

Junk lines (rows/columns whose entries are all zero or unknown) can be
stripped without changing the minimum achievable rank, and reinserted as
zeros after completion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from .fields import DenseMatrix, FieldSpec

ROW = "row"
COL = "col"


class PartialMatrix:
    """Immutable rows x cols grid with a sparse map of known entries."""

    __slots__ = ("field", "rows", "cols", "_known", "_row_idx", "_col_idx")

    def __init__(self, rows: int, cols: int, field: FieldSpec,
                 known: Union[Mapping, Iterable] = ()):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimensions")
        self.field = field
        self.rows = rows
        self.cols = cols
        items = known.items() if isinstance(known, Mapping) else known
        cleaned = {}
        for key_val in items:
            if isinstance(key_val, tuple) and len(key_val) == 3:
                r, c, v = key_val
            else:
                (r, c), v = key_val
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r},{c}) out of range for {rows}x{cols}")
            cleaned[(r, c)] = field.element(v)
        self._known = {k: cleaned[k] for k in sorted(cleaned)}
        self._row_idx = None
        self._col_idx = None

    @classmethod
    def from_rows(cls, field: FieldSpec, grid: Sequence[Sequence], cols: Optional[int] = None):
        """Build from a row-of-rows template where ``None`` marks unknowns."""
        rows = len(grid)
        width = len(grid[0]) if rows else (cols or 0)
        known = {}
        for r, row in enumerate(grid):
            if len(row) != width:
                raise ValueError("ragged grid")
            for c, v in enumerate(row):
                if v is not None:
                    known[(r, c)] = v
        return cls(rows, width, field, known)

    # -- access --------------------------------------------------------------

    def get(self, r: int, c: int):
        """Known value at (r, c) or None."""
        return self._known.get((r, c))

    def is_known(self, r: int, c: int) -> bool:
        return (r, c) in self._known

    def known_items(self):
        """(row, col, value) triples in row-major order."""
        for (r, c), v in self._known.items():
            yield r, c, v

    @property
    def known_count(self) -> int:
        return len(self._known)

    @property
    def unknown_count(self) -> int:
        return self.rows * self.cols - len(self._known)

    @property
    def is_fully_known(self) -> bool:
        return self.unknown_count == 0

    def _rows_index(self) -> Dict[int, dict]:
        if self._row_idx is None:
            idx = {}
            for (r, c), v in self._known.items():
                idx.setdefault(r, {})[c] = v
            self._row_idx = idx
        return self._row_idx

    def _cols_index(self) -> Dict[int, dict]:
        if self._col_idx is None:
            idx = {}
            for (r, c), v in self._known.items():
                idx.setdefault(c, {})[r] = v
            self._col_idx = idx
        return self._col_idx

    def line_known(self, axis: str, i: int) -> dict:
        """Known entries of one line: {opposite-axis index: value}."""
        if axis == ROW:
            return dict(self._rows_index().get(i, {}))
        return dict(self._cols_index().get(i, {}))

    def line_vector(self, axis: str, i: int) -> list:
        """One line as a partial vector (None = unknown)."""
        if axis == ROW:
            return [self.get(i, c) for c in range(self.cols)]
        return [self.get(r, i) for r in range(self.rows)]

    # -- junk ------------------------------------------------------------------

    def is_junk(self, axis: str, i: int) -> bool:
        """True iff every entry of the line is unknown or a known zero."""
        if axis == ROW:
            if not 0 <= i < self.rows:
                raise IndexError(f"row {i} out of range")
        elif axis == COL:
            if not 0 <= i < self.cols:
                raise IndexError(f"col {i} out of range")
        else:
            raise ValueError(f"axis must be {ROW!r} or {COL!r}")
        fld = self.field
        return all(fld.is_zero(v) for v in self.line_known(axis, i).values())

    def strip_junk(self) -> "JunkReport":
        """Remove junk lines until none remain.

        A single pass already suffices (removing zero/unknown entries never
        changes a surviving line), but the loop re-checks to be safe.
        """
        alive_rows = [r for r in range(self.rows)]
        alive_cols = [c for c in range(self.cols)]
        # nonzero-known counts per line
        row_nz = {r: 0 for r in alive_rows}
        col_nz = {c: 0 for c in alive_cols}
        fld = self.field
        for (r, c), v in self._known.items():
            if not fld.is_zero(v):
                row_nz[r] += 1
                col_nz[c] += 1
        while True:
            junk_r = [r for r in alive_rows if row_nz[r] == 0]
            junk_c = [c for c in alive_cols if col_nz[c] == 0]
            if not junk_r and not junk_c:
                break
            alive_rows = [r for r in alive_rows if row_nz[r] != 0]
            alive_cols = [c for c in alive_cols if col_nz[c] != 0]
        row_map = tuple(alive_rows)
        col_map = tuple(alive_cols)
        junk_rows = tuple(r for r in range(self.rows) if r not in set(row_map))
        junk_cols = tuple(c for c in range(self.cols) if c not in set(col_map))
        core = self.restrict(row_map, col_map)
        return JunkReport(junk_rows=junk_rows, junk_cols=junk_cols, core=core,
                          row_map=row_map, col_map=col_map,
                          source_rows=self.rows, source_cols=self.cols)

    # -- structure ----------------------------------------------------------------

    def restrict(self, rows: Sequence[int], cols: Sequence[int]) -> "PartialMatrix":
        """Submatrix on the given index lists, reindexed to local coordinates."""
        rpos = {r: i for i, r in enumerate(rows)}
        cpos = {c: j for j, c in enumerate(cols)}
        known = {}
        if len(rpos) * len(cpos) < len(self._known):
            for r in rows:
                for c, v in self._rows_index().get(r, {}).items():
                    if c in cpos:
                        known[(rpos[r], cpos[c])] = v
        else:
            for (r, c), v in self._known.items():
                if r in rpos and c in cpos:
                    known[(rpos[r], cpos[c])] = v
        return PartialMatrix(len(rows), len(cols), self.field, known)

    def permute(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "PartialMatrix":
        """Entry (i, j) of the result is entry (row_perm[i], col_perm[j])."""
        if sorted(row_perm) != list(range(self.rows)) or sorted(col_perm) != list(range(self.cols)):
            raise ValueError("permutations must be bijections of the index ranges")
        rinv = {r: i for i, r in enumerate(row_perm)}
        cinv = {c: j for j, c in enumerate(col_perm)}
        known = {(rinv[r], cinv[c]): v for (r, c), v in self._known.items()}
        return PartialMatrix(self.rows, self.cols, self.field, known)

    def transpose(self) -> "PartialMatrix":
        known = {(c, r): v for (r, c), v in self._known.items()}
        return PartialMatrix(self.cols, self.rows, self.field, known)

    def fill(self, value=None) -> DenseMatrix:
        """Complete every unknown entry with *value* (default: zero)."""
        fill = self.field.zero if value is None else self.field.element(value)
        grid = [[fill] * self.cols for _ in range(self.rows)]
        for (r, c), v in self._known.items():
            grid[r][c] = v
        return DenseMatrix(self.field, grid, cols=self.cols)

    def to_dense(self) -> DenseMatrix:
        if not self.is_fully_known:
            raise ValueError("matrix has unknown entries")
        return self.fill()

    def agrees_with(self, dense: DenseMatrix) -> bool:
        """True iff *dense* matches every known entry (within tolerance)."""
        if dense.rows != self.rows or dense.cols != self.cols:
            return False
        fld = self.field
        return all(fld.eq(dense.entry(r, c), v) for r, c, v in self.known_items())

    def __eq__(self, other):
        if not isinstance(other, PartialMatrix):
            return NotImplemented
        return (self.field == other.field and self.rows == other.rows
                and self.cols == other.cols and self._known == other._known)

    def __hash__(self):
        return hash((self.field, self.rows, self.cols, tuple(self._known.items())))

    def __repr__(self):
        return f"PartialMatrix({self.rows}x{self.cols} over {self.field}, {len(self._known)} known)"


@dataclass(frozen=True)
class JunkReport:
    """Which lines were junk, and the junk-free core with its index maps."""

    junk_rows: Tuple[int, ...]
    junk_cols: Tuple[int, ...]
    core: PartialMatrix
    row_map: Tuple[int, ...]
    col_map: Tuple[int, ...]
    source_rows: int
    source_cols: int

    def reinsert(self, core_dense: DenseMatrix) -> DenseMatrix:
        """Embed a completed core back at original size, zeros on junk lines.

        The zero fill keeps the rank equal to the core's rank.
        """
        if core_dense.rows != self.core.rows or core_dense.cols != self.core.cols:
            raise ValueError("completed core dimensions do not match the report")
        fld = core_dense.field
        grid = [[fld.zero] * self.source_cols for _ in range(self.source_rows)]
        for i, r in enumerate(self.row_map):
            for j, c in enumerate(self.col_map):
                grid[r][c] = core_dense.entry(i, j)
        return DenseMatrix(fld, grid, cols=self.source_cols)
