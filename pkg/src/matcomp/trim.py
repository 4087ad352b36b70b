"""Trimming: remove lines whose known part is donated by other lines.

A column v trims away when its known entries are a linear combination of
donor columns (columns fully known on v's known rows); the dependency is
logged so the column can be rebuilt afterwards without raising the rank.
Column and row passes alternate until nothing trims.  When exact trims run
dry, approximate trimming blacks out a line without a certificate; at
restore time the certificate is re-tested against the completed matrix, and
only a failed re-test costs (at most) one rank of deviation.

Restoration replays the log in reverse.  Junk lines are a degenerate trim
(empty donor list, zero combination), so they need no special casing.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .fields import DenseMatrix, PRIME_FIELD, solve_membership
from .partial import COL, ROW, PartialMatrix

_NUMPY_EDGE_THRESHOLD = 2048      # knowns; above this, split checks go through scipy
_NUMPY_RESTORE_CELLS = 1 << 16    # grid cells; above this, GF(2) restore uses numpy


@dataclass(frozen=True)
class TrimRecord:
    """One blackout: which line went, its donors and coefficients.

    Every record carries the line's known entries: restoration writes them
    last, so original data always wins (a no-op over exact fields, a
    float-drift guard over tolerance reals).  Approximate records have no
    coefficients; their knowns also feed the restore-time re-test of the
    trim condition against the completed matrix.
    """

    axis: str
    index: int
    donors: Tuple[int, ...]
    coefficients: Optional[Tuple]
    approximate: bool
    known: Tuple[Tuple[int, object], ...] = ()


@dataclass(frozen=True)
class TrimLog:
    rows: int
    cols: int
    records: Tuple[TrimRecord, ...]

    def alive_maps(self) -> Tuple[List[int], List[int]]:
        """Surviving row/col indices after replaying every record."""
        dead_r = {rec.index for rec in self.records if rec.axis == ROW}
        dead_c = {rec.index for rec in self.records if rec.axis == COL}
        return ([r for r in range(self.rows) if r not in dead_r],
                [c for c in range(self.cols) if c not in dead_c])


@dataclass(frozen=True)
class TrimOutcome:
    core: PartialMatrix
    log: TrimLog
    approximate_count: int
    split: bool = False


@dataclass(frozen=True)
class RestoreResult:
    matrix: DenseMatrix
    deviations: int


class _Trimmer:
    """Mutable trimming state over one partial matrix.

    Lines are re-tested only when a removal could have turned them trimmable
    (they lost a known entry), which keeps large sparse instances cheap while
    producing exactly the records a full rescan would.
    """

    def __init__(self, M: PartialMatrix):
        self.M = M
        self.field = M.field
        self.alive_rows: Set[int] = set(range(M.rows))
        self.alive_cols: Set[int] = set(range(M.cols))
        self.row_known: Dict[int, Set[int]] = {r: set() for r in range(M.rows)}
        self.col_known: Dict[int, Set[int]] = {c: set() for c in range(M.cols)}
        for r, c, _ in M.known_items():
            self.row_known[r].add(c)
            self.col_known[c].add(r)
        self.known_alive = M.known_count
        self.dirty_rows: Set[int] = set(range(M.rows))
        self.dirty_cols: Set[int] = set(range(M.cols))
        self.records: List[TrimRecord] = []
        self.approx_count = 0
        if M.known_count > _NUMPY_EDGE_THRESHOLD:
            self._edge_r = np.fromiter((r for r, _, _ in M.known_items()), dtype=np.int64,
                                       count=M.known_count)
            self._edge_c = np.fromiter((c for _, c, _ in M.known_items()), dtype=np.int64,
                                       count=M.known_count)
            self._row_alive = np.ones(M.rows, dtype=bool)
            self._col_alive = np.ones(M.cols, dtype=bool)
        else:
            self._edge_r = None

    # -- structure -------------------------------------------------------------

    def unknown_total(self) -> int:
        return len(self.alive_rows) * len(self.alive_cols) - self.known_alive

    def remove_line(self, axis: str, idx: int):
        if axis == COL:
            self.alive_cols.discard(idx)
            self.dirty_cols.discard(idx)
            touched = self.col_known.pop(idx)
            self.known_alive -= len(touched)
            for r in touched:
                self.row_known[r].discard(idx)
                self.dirty_rows.add(r)
            if self._edge_r is not None:
                self._col_alive[idx] = False
        else:
            self.alive_rows.discard(idx)
            self.dirty_rows.discard(idx)
            touched = self.row_known.pop(idx)
            self.known_alive -= len(touched)
            for c in touched:
                self.col_known[c].discard(idx)
                self.dirty_cols.add(c)
            if self._edge_r is not None:
                self._row_alive[idx] = False

    def _donors_of(self, axis: str, idx: int) -> List[int]:
        """Parallel lines whose known positions cover this line's."""
        if axis == COL:
            mine, par_known, inv = self.col_known[idx], self.alive_cols, self.row_known
        else:
            mine, par_known, inv = self.row_known[idx], self.alive_rows, self.col_known
        if not mine:
            return sorted(j for j in par_known if j != idx)
        order = sorted(mine, key=lambda j: len(inv[j]))
        cand = set(inv[order[0]])
        for j in order[1:]:
            cand &= inv[j]
            if len(cand) <= 1:
                break
        cand.discard(idx)
        return sorted(cand)

    def line_test(self, axis: str, idx: int) -> Optional[Tuple[Tuple[int, ...], Tuple]]:
        """Theorem-4 test: (donors, coefficients) when the line may trim."""
        fld = self.field
        if axis == COL:
            K = sorted(self.col_known[idx])
            vals = [self.M.get(r, idx) for r in K]
        else:
            K = sorted(self.row_known[idx])
            vals = [self.M.get(idx, c) for c in K]
        if all(fld.is_zero(v) for v in vals):
            return (), ()
        donors = self._donors_of(axis, idx)
        if not donors:
            return None
        if axis == COL:
            D = DenseMatrix(fld, [[self.M.get(r, d) for d in donors] for r in K],
                            cols=len(donors))
        else:
            D = DenseMatrix(fld, [[self.M.get(d, c) for d in donors] for c in K],
                            cols=len(donors))
        coeffs = solve_membership(D, vals)
        if coeffs is None:
            return None
        return tuple(donors), tuple(coeffs)

    # -- exact passes -------------------------------------------------------------

    def _line_known_entries(self, axis: str, idx: int) -> Tuple:
        if axis == COL:
            return tuple((r, self.M.get(r, idx)) for r in sorted(self.col_known[idx]))
        return tuple((c, self.M.get(idx, c)) for c in sorted(self.row_known[idx]))

    def _pass(self, axis: str) -> bool:
        dirty = self.dirty_cols if axis == COL else self.dirty_rows
        alive = self.alive_cols if axis == COL else self.alive_rows
        queue = sorted(dirty & alive)
        dirty.clear()
        trimmed = False
        for idx in queue:
            if idx not in alive:
                continue
            res = self.line_test(axis, idx)
            if res is None:
                continue
            donors, coeffs = res
            self.records.append(TrimRecord(axis=axis, index=idx, donors=donors,
                                           coefficients=coeffs, approximate=False,
                                           known=self._line_known_entries(axis, idx)))
            self.remove_line(axis, idx)
            trimmed = True
        return trimmed

    def fixpoint(self):
        while True:
            changed = self._pass(COL)
            changed = self._pass(ROW) or changed
            if not changed:
                break

    # -- approximate blackout ---------------------------------------------------------

    def select_approx(self) -> Tuple[str, int]:
        """Next line to black out: donor-free preferred, then most unknowns,
        columns before rows, lowest index."""
        keys = []
        nrows, ncols = len(self.alive_rows), len(self.alive_cols)
        for c in self.alive_cols:
            keys.append((-(nrows - len(self.col_known[c])), 0, c))
        for r in self.alive_rows:
            keys.append((-(ncols - len(self.row_known[r])), 1, r))
        heapq.heapify(keys)
        fallback = None
        while keys:
            _, axcode, idx = heapq.heappop(keys)
            axis = COL if axcode == 0 else ROW
            if fallback is None:
                fallback = (axis, idx)
            if not self._donors_of(axis, idx):
                return axis, idx
        return fallback

    def approx_blackout(self):
        axis, idx = self.select_approx()
        self.records.append(TrimRecord(axis=axis, index=idx, donors=(), coefficients=None,
                                       approximate=True,
                                       known=self._line_known_entries(axis, idx)))
        self.approx_count += 1
        self.remove_line(axis, idx)

    # -- split detection ---------------------------------------------------------------

    def piece_count(self) -> int:
        """Connected pieces among the live lines (post-fixpoint: no junk)."""
        if self._edge_r is not None:
            mask = self._row_alive[self._edge_r] & self._col_alive[self._edge_c]
            er = self._edge_r[mask]
            ec = self._edge_c[mask] + self.M.rows
            n = self.M.rows + self.M.cols
            graph = sparse.coo_matrix((np.ones(len(er), dtype=np.int8), (er, ec)),
                                      shape=(n, n))
            _, labels = csgraph.connected_components(graph, directed=False)
            alive = np.concatenate([np.flatnonzero(self._row_alive),
                                    self.M.rows + np.flatnonzero(self._col_alive)])
            if len(alive) == 0:
                return 0
            return len(np.unique(labels[alive]))
        seen_r: Set[int] = set()
        seen_c: Set[int] = set()
        count = 0
        for r0 in sorted(self.alive_rows):
            if r0 in seen_r:
                continue
            count += 1
            seen_r.add(r0)
            frontier = [r0]
            while frontier:
                new_c = []
                for r in frontier:
                    for c in self.row_known[r]:
                        if c not in seen_c:
                            seen_c.add(c)
                            new_c.append(c)
                frontier = []
                for c in new_c:
                    for r in self.col_known[c]:
                        if r not in seen_r:
                            seen_r.add(r)
                            frontier.append(r)
        count += sum(1 for c in self.alive_cols if c not in seen_c)
        return count

    # -- results -----------------------------------------------------------------------

    def core(self) -> PartialMatrix:
        return self.M.restrict(sorted(self.alive_rows), sorted(self.alive_cols))

    def log(self) -> TrimLog:
        return TrimLog(rows=self.M.rows, cols=self.M.cols, records=tuple(self.records))

    def outcome(self, split: bool = False) -> TrimOutcome:
        return TrimOutcome(core=self.core(), log=self.log(),
                           approximate_count=self.approx_count, split=split)


def find_trimmable_column(M: PartialMatrix) -> Optional[Tuple[int, Tuple[int, ...], Tuple]]:
    """First column (left to right) whose known part lies in its donors' span."""
    t = _Trimmer(M)
    for c in range(M.cols):
        res = t.line_test(COL, c)
        if res is not None:
            return c, res[0], res[1]
    return None


def trim_to_fixpoint(M: PartialMatrix) -> TrimOutcome:
    """Alternate column and row trimming passes until neither removes a line."""
    t = _Trimmer(M)
    t.fixpoint()
    return t.outcome()


def trim_with_approximation(M: PartialMatrix, stop_on_split: bool = False) -> TrimOutcome:
    """Trim exactly, then black out uncertified lines until no unknowns remain.

    With ``stop_on_split`` the loop instead returns as soon as the live part
    falls apart into two or more pieces, so the caller can decompose and
    complete them independently (each piece is strictly smaller and the rank
    bound can only improve).
    """
    t = _Trimmer(M)
    while True:
        t.fixpoint()
        if t.unknown_total() == 0:
            return t.outcome()
        if stop_on_split and t.piece_count() >= 2:
            return t.outcome(split=True)
        t.approx_blackout()


# -- restoration --------------------------------------------------------------------


def restore(core: DenseMatrix, log: TrimLog) -> RestoreResult:
    """Rebuild the trimmed lines around a completed core, in reverse order.

    Certified records rebuild their line as the logged combination of donor
    lines, which cannot change the rank.  Approximate records re-test the
    trim condition against the already-restored matrix: on success the line
    is a combination of current lines (rank preserved), otherwise its knowns
    are kept, the rest is filled with zeros, and one realized deviation is
    counted.
    """
    row_map, col_map = log.alive_maps()
    if core.rows != len(row_map) or core.cols != len(col_map):
        raise ValueError("core dimensions do not match the log's surviving lines")
    fld = core.field
    if (fld.kind == PRIME_FIELD and fld.modulus == 2
            and log.rows * log.cols >= _NUMPY_RESTORE_CELLS):
        return _restore_gf2(core, log, row_map, col_map)
    grid = [[None] * log.cols for _ in range(log.rows)]
    for i, r in enumerate(row_map):
        for j, c in enumerate(col_map):
            grid[r][c] = core.entry(i, j)
    alive_r = set(row_map)
    alive_c = set(col_map)
    deviations = 0
    zero = fld.zero
    for rec in reversed(log.records):
        if rec.axis == COL:
            rows_here = sorted(alive_r)
            if not rec.approximate:
                nz = [(d, coef) for d, coef in zip(rec.donors, rec.coefficients)
                      if not fld.is_zero(coef)]
                for r in rows_here:
                    acc = zero
                    for d, coef in nz:
                        acc = fld.add(acc, fld.mul(coef, grid[r][d]))
                    grid[r][rec.index] = acc
            else:
                known = dict(rec.known)
                K = sorted(known)
                acols = sorted(alive_c)
                D = DenseMatrix(fld, [[grid[r][c] for c in acols] for r in K],
                                cols=len(acols))
                coeffs = solve_membership(D, [known[r] for r in K])
                if coeffs is not None:
                    nz = [(c, coef) for c, coef in zip(acols, coeffs)
                          if not fld.is_zero(coef)]
                    for r in rows_here:
                        acc = zero
                        for c, coef in nz:
                            acc = fld.add(acc, fld.mul(coef, grid[r][c]))
                        grid[r][rec.index] = acc
                else:
                    for r in rows_here:
                        grid[r][rec.index] = zero
                    deviations += 1
            for r, v in rec.known:
                grid[r][rec.index] = v
            alive_c.add(rec.index)
        else:
            cols_here = sorted(alive_c)
            if not rec.approximate:
                nz = [(d, coef) for d, coef in zip(rec.donors, rec.coefficients)
                      if not fld.is_zero(coef)]
                for c in cols_here:
                    acc = zero
                    for d, coef in nz:
                        acc = fld.add(acc, fld.mul(coef, grid[d][c]))
                    grid[rec.index][c] = acc
            else:
                known = dict(rec.known)
                K = sorted(known)
                arows = sorted(alive_r)
                D = DenseMatrix(fld, [[grid[r][c] for r in arows] for c in K],
                                cols=len(arows))
                coeffs = solve_membership(D, [known[c] for c in K])
                if coeffs is not None:
                    nz = [(r, coef) for r, coef in zip(arows, coeffs)
                          if not fld.is_zero(coef)]
                    for c in cols_here:
                        acc = zero
                        for r, coef in nz:
                            acc = fld.add(acc, fld.mul(coef, grid[r][c]))
                        grid[rec.index][c] = acc
                else:
                    for c in cols_here:
                        grid[rec.index][c] = zero
                    deviations += 1
            for c, v in rec.known:
                grid[rec.index][c] = v
            alive_r.add(rec.index)
    return RestoreResult(DenseMatrix(fld, grid, cols=log.cols), deviations)


def _pack_np_rows(arr: np.ndarray) -> List[int]:
    """uint8 0/1 matrix -> list of bit-row ints (bit j = column j)."""
    packed = np.packbits(arr, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _gf2_solve_np(D: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    """Leftmost-pivot membership solve over GF(2) on a packed numpy system."""
    from .fields import _rref_gf2
    m, n = D.shape
    aug = np.concatenate([D, rhs.reshape(-1, 1)], axis=1).astype(np.uint8)
    bits = _pack_np_rows(aug)
    piv, rref = _rref_gf2(bits)
    if n in piv:
        return None
    sol = np.zeros(n, dtype=np.uint8)
    for k, c in enumerate(piv):
        sol[c] = (rref[k] >> n) & 1
    return sol


def _restore_gf2(core: DenseMatrix, log: TrimLog, row_map, col_map) -> RestoreResult:
    """numpy-backed restore for large GF(2) instances (same outputs)."""
    grid = np.zeros((log.rows, log.cols), dtype=np.uint8)
    if core.rows and core.cols:
        grid[np.ix_(row_map, col_map)] = np.array(core.to_rows(), dtype=np.uint8)
    alive_r = sorted(row_map)
    alive_c = sorted(col_map)
    deviations = 0
    for rec in reversed(log.records):
        if rec.axis == COL:
            ar = np.array(alive_r, dtype=np.intp) if alive_r else np.zeros(0, dtype=np.intp)
            if not rec.approximate:
                nzd = [d for d, coef in zip(rec.donors, rec.coefficients) if coef]
                if nzd and len(ar):
                    colv = grid[np.ix_(ar, nzd)].sum(axis=1, dtype=np.int64) & 1
                    grid[ar, rec.index] = colv.astype(np.uint8)
            else:
                known = dict(rec.known)
                K = np.array(sorted(known), dtype=np.intp)
                ac = np.array(alive_c, dtype=np.intp)
                D = grid[np.ix_(K, ac)]
                rhs = np.array([known[int(r)] for r in K], dtype=np.uint8)
                sol = _gf2_solve_np(D, rhs) if len(ac) else (None if rhs.any() else np.zeros(0, dtype=np.uint8))
                if sol is not None:
                    nz = ac[np.flatnonzero(sol)]
                    if len(nz) and len(ar):
                        colv = grid[np.ix_(ar, nz)].sum(axis=1, dtype=np.int64) & 1
                        grid[ar, rec.index] = colv.astype(np.uint8)
                else:
                    deviations += 1
            for r, v in rec.known:
                grid[r, rec.index] = v
            alive_c.append(rec.index)
            alive_c.sort()
        else:
            ac = np.array(alive_c, dtype=np.intp) if alive_c else np.zeros(0, dtype=np.intp)
            if not rec.approximate:
                nzd = [d for d, coef in zip(rec.donors, rec.coefficients) if coef]
                if nzd and len(ac):
                    rowv = grid[np.ix_(nzd, ac)].sum(axis=0, dtype=np.int64) & 1
                    grid[rec.index, ac] = rowv.astype(np.uint8)
            else:
                known = dict(rec.known)
                K = np.array(sorted(known), dtype=np.intp)
                ar = np.array(alive_r, dtype=np.intp)
                D = grid[np.ix_(ar, K)].T
                rhs = np.array([known[int(c)] for c in K], dtype=np.uint8)
                sol = _gf2_solve_np(D, rhs) if len(ar) else (None if rhs.any() else np.zeros(0, dtype=np.uint8))
                if sol is not None:
                    nz = ar[np.flatnonzero(sol)]
                    if len(nz) and len(ac):
                        rowv = grid[np.ix_(nz, ac)].sum(axis=0, dtype=np.int64) & 1
                        grid[rec.index, ac] = rowv.astype(np.uint8)
                else:
                    deviations += 1
            for c, v in rec.known:
                grid[rec.index, c] = v
            alive_r.append(rec.index)
            alive_r.sort()
    dense = DenseMatrix(core.field, grid.tolist(), cols=log.cols)
    return RestoreResult(dense, deviations)


def complete_comparable(M: PartialMatrix) -> Optional[DenseMatrix]:
    """Minimum-rank completion when every column pair is comparable.

    One round of column trimming, an arbitrary (zero) completion of what is
    left, and the usual restoration then land exactly on the minimum rank.
    Returns None when some column pair is incomparable.
    """
    unknown_sets = []
    for c in range(M.cols):
        unknown_sets.append(frozenset(r for r in range(M.rows) if not M.is_known(r, c)))
    for i in range(M.cols):
        for j in range(i + 1, M.cols):
            a, b = unknown_sets[i], unknown_sets[j]
            if not (a <= b or b <= a):
                return None
    t = _Trimmer(M)
    t._pass(COL)
    core_dense = t.core().fill()
    return restore(core_dense, t.log()).matrix
