"""Sub-u-diagonalization: splitting a cluster along one conjoined line.

A cluster that refuses to split may become splittable after deleting a single
row or column (the conjoined line).  Candidate lines are exactly those with
no donor among their parallels (a donor of v is a line whose unknown
positions all lie inside v's unknown positions).  After the split, each piece
carries its slice of the conjoined line; zero(u, A) decides whether a piece's
slice is forced to zero in every minimum-rank completion, which adds one to
that piece's effective rank at merge time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import oracle
from .fields import PRIME_FIELD, DenseMatrix, FieldSpec, column_basis
from .oracle import DEFAULT_BUDGET, OracleBudget
from .partial import COL, ROW, PartialMatrix

ZERO_EXACT = "exact-oracle"
ZERO_HEURISTIC = "junk-heuristic"

_ART_THRESHOLD = 64  # lines; above this, prefilter split candidates by articulation


def is_donor(v: Sequence, w: Sequence) -> bool:
    """v is a donor for w iff every unknown position of v is unknown in w."""
    if len(v) != len(w):
        raise ValueError("donor check needs vectors of equal length")
    return all(wx is None for vx, wx in zip(v, w) if vx is None)


def _line_sets(M: PartialMatrix, axis: str) -> Tuple[List[Set[int]], List[Set[int]]]:
    """Known-position sets per line of *axis*, plus the inverted index."""
    count = M.rows if axis == ROW else M.cols
    other = M.cols if axis == ROW else M.rows
    known: List[Set[int]] = [set() for _ in range(count)]
    inverted: List[Set[int]] = [set() for _ in range(other)]
    for r, c, _ in M.known_items():
        i, j = (r, c) if axis == ROW else (c, r)
        known[i].add(j)
        inverted[j].add(i)
    return known, inverted


def _donor_free(known: List[Set[int]], inverted: List[Set[int]], i: int, count: int) -> bool:
    """True iff line i has no donor among the other parallel lines.

    A donor of line i is a line whose known positions cover line i's; the
    candidates are found by intersecting the inverted index over i's known
    positions, which is fast when known entries are sparse.
    """
    ki = known[i]
    if not ki:
        return count <= 1  # fully unknown line: every other line donates
    it = iter(sorted(ki))
    cand = set(inverted[next(it)])
    for j in it:
        cand &= inverted[j]
        if len(cand) <= 1:
            break
    cand.discard(i)
    return not cand


def conjoined_candidates(M: PartialMatrix) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Rows and columns with no donor; every conjoined line is among them."""
    rk, rinv = _line_sets(M, ROW)
    ck, cinv = _line_sets(M, COL)
    rows = tuple(r for r in range(M.rows) if _donor_free(rk, rinv, r, M.rows))
    cols = tuple(c for c in range(M.cols) if _donor_free(ck, cinv, c, M.cols))
    return rows, cols


@dataclass(frozen=True)
class SubPiece:
    """One sub-cluster plus its slice of the conjoined line.

    The slice is indexed by ``rows`` when the conjoined line is a column and
    by ``cols`` when it is a row; ``None`` marks unknown slice entries.
    """

    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    slice: Tuple


@dataclass(frozen=True)
class SubDecomposition:
    axis: str
    conjoined_index: int
    pieces: Tuple[SubPiece, ...]
    rows: int
    cols: int

    def transposed(self) -> "SubDecomposition":
        axis = COL if self.axis == ROW else ROW
        pieces = tuple(SubPiece(rows=p.cols, cols=p.rows, slice=p.slice) for p in self.pieces)
        return SubDecomposition(axis=axis, conjoined_index=self.conjoined_index,
                                pieces=pieces, rows=self.cols, cols=self.rows)


def _bipartite_adjacency(M: PartialMatrix) -> List[List[int]]:
    """Vertices: rows 0..R-1, then columns R..R+C-1; one edge per known entry."""
    R = M.rows
    adj: List[List[int]] = [[] for _ in range(R + M.cols)]
    for r, c, _ in M.known_items():
        adj[r].append(R + c)
        adj[R + c].append(r)
    return adj


def _articulation_vertices(adj: List[List[int]]) -> Set[int]:
    """Iterative Tarjan cut-vertex search; no parallel edges assumed."""
    n = len(adj)
    disc = [-1] * n
    low = [0] * n
    art: Set[int] = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        parent = {root: -1}
        stack = [(root, iter(adj[root]))]
        while stack:
            v, it = stack[-1]
            child = None
            for w in it:
                if disc[w] == -1:
                    child = w
                    break
                if w != parent[v] and disc[w] < low[v]:
                    low[v] = disc[w]
            if child is not None:
                parent[child] = v
                disc[child] = low[child] = timer
                timer += 1
                if v == root:
                    root_children += 1
                stack.append((child, iter(adj[child])))
            else:
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if u != root and low[v] >= disc[u]:
                        art.add(u)
        if root_children >= 2:
            art.add(root)
    return art


def _split_on(M: PartialMatrix, axis: str, idx: int) -> Optional[List[SubPiece]]:
    """Black out one line and decompose the remainder.

    Lines that lose their last known entry become junk in the remainder; they
    are not pieces of their own (they carry no block data) and are attached
    to the first piece so the conjoined line's entries stay covered.
    Returns None unless at least two pieces emerge.
    """
    if axis == ROW:
        keep_rows = [r for r in range(M.rows) if r != idx]
        col_known: Dict[int, List[int]] = {c: [] for c in range(M.cols)}
        row_known: Dict[int, List[int]] = {r: [] for r in keep_rows}
        for r, c, _ in M.known_items():
            if r != idx:
                col_known[c].append(r)
                row_known[r].append(c)
        junk_lines = [c for c in range(M.cols) if not col_known[c]]
        comps = _components(row_known, col_known, keep_rows)
        if len(comps) < 2:
            return None
        pieces = []
        for rows, cols in comps:
            pieces.append((sorted(rows), sorted(cols)))
        pieces.sort(key=lambda rc: rc[0][0])
        first_rows, first_cols = pieces[0]
        pieces[0] = (first_rows, sorted(first_cols + junk_lines))
        return [SubPiece(rows=tuple(rs), cols=tuple(cs),
                         slice=tuple(M.get(idx, c) for c in cs))
                for rs, cs in pieces]
    # conjoined column: same search with the roles of rows and columns swapped
    keep_cols = [c for c in range(M.cols) if c != idx]
    row_known2: Dict[int, List[int]] = {r: [] for r in range(M.rows)}
    col_known2: Dict[int, List[int]] = {c: [] for c in keep_cols}
    for r, c, _ in M.known_items():
        if c != idx:
            row_known2[r].append(c)
            col_known2[c].append(r)
    junk_lines = [r for r in range(M.rows) if not row_known2[r]]
    comps = _components(col_known2, row_known2, keep_cols)
    if len(comps) < 2:
        return None
    pieces = []
    for cols, rows in comps:
        pieces.append((sorted(rows), sorted(cols)))
    pieces.sort(key=lambda rc: rc[0][0])
    first_rows, first_cols = pieces[0]
    pieces[0] = (sorted(first_rows + junk_lines), first_cols)
    return [SubPiece(rows=tuple(rs), cols=tuple(cs),
                     slice=tuple(M.get(r, idx) for r in rs))
            for rs, cs in pieces]


def _components(a_adj: Dict[int, List[int]], b_adj: Dict[int, List[int]], a_order):
    """Connected components of a bipartite structure; b-side junk excluded."""
    seen_a: Set[int] = set()
    seen_b: Set[int] = set()
    comps = []
    for a0 in a_order:
        if a0 in seen_a:
            continue
        seen_a.add(a0)
        aset, bset = [a0], []
        frontier = [a0]
        while frontier:
            nxt_b = []
            for a in frontier:
                for b in a_adj[a]:
                    if b not in seen_b:
                        seen_b.add(b)
                        nxt_b.append(b)
            bset.extend(nxt_b)
            frontier = []
            for b in nxt_b:
                for a in b_adj[b]:
                    if a not in seen_a:
                        seen_a.add(a)
                        frontier.append(a)
            aset.extend(frontier)
        comps.append((aset, bset))
    return comps


def sub_decompose(M: PartialMatrix, candidates=None) -> Optional[SubDecomposition]:
    """Find the first conjoined line that splits M into sub-clusters.

    Candidates are the donor-free lines (rows first, ascending, then
    columns); the first one whose deletion yields at least two pieces wins.
    Expects a single junk-free cluster.
    """
    if candidates is None:
        candidates = conjoined_candidates(M)
    row_cand, col_cand = candidates
    if M.rows + M.cols > _ART_THRESHOLD:
        R = M.rows
        art = _articulation_vertices(_bipartite_adjacency(M))
        row_cand = tuple(r for r in row_cand if r in art)
        col_cand = tuple(c for c in col_cand if R + c in art)
    for r in row_cand:
        pieces = _split_on(M, ROW, r)
        if pieces:
            return SubDecomposition(axis=ROW, conjoined_index=r, pieces=tuple(pieces),
                                    rows=M.rows, cols=M.cols)
    for c in col_cand:
        pieces = _split_on(M, COL, c)
        if pieces:
            return SubDecomposition(axis=COL, conjoined_index=c, pieces=tuple(pieces),
                                    rows=M.rows, cols=M.cols)
    return None


@dataclass(frozen=True)
class ZeroVerdict:
    """Outcome of the zero(u, A) test.

    ``method`` records whether the verdict is provably exact (non-junk
    short-circuit or full enumeration) or the conservative fallback used over
    infinite fields / beyond the enumeration budget, which always answers 0
    and is charged against the completion's deviation bound.  In exact mode
    the witness is a minimum-rank completion of [u | A], with a nonzero u
    column whenever one exists.
    """

    value: int
    method: str
    witness: Optional[DenseMatrix] = None


def zero_predicate(u: Sequence, A: PartialMatrix,
                   budget: OracleBudget = DEFAULT_BUDGET) -> ZeroVerdict:
    """zero(u, A): can u avoid completing to the zero vector at minimum rank?

    A non-junk u settles it immediately (its nonzero known entry survives in
    every completion).  Junk u over a finite field within budget is decided
    exactly by enumeration; otherwise the verdict falls back to 0.
    """
    if len(u) != A.rows:
        raise ValueError("u length must equal the row count of A")
    fld = A.field
    if any(v is not None and not fld.is_zero(v) for v in u):
        return ZeroVerdict(0, ZERO_EXACT)
    unknowns = sum(1 for v in u if v is None) + A.unknown_count
    if fld.kind == PRIME_FIELD and budget.fits(fld, unknowns):
        value, witness = oracle.zero_scan(u, A, budget)
        return ZeroVerdict(value, ZERO_EXACT, witness=witness)
    return ZeroVerdict(0, ZERO_HEURISTIC)


# -- Theorem-5 merge -------------------------------------------------------------


class _Side:
    __slots__ = ("rows", "cols", "pending")

    def __init__(self, rows, cols, pending):
        self.rows = rows        # sorted row indices covered so far
        self.cols = cols        # sorted block col indices (conjoined excluded)
        self.pending = pending  # unrealized +1 from a zero-forced slice


def _gather(field: FieldSpec, grid, rows, cols) -> DenseMatrix:
    return DenseMatrix(field, [[grid[r][c] for c in cols] for r in rows], cols=len(cols))


def _side_basis(field, grid, c0, side):
    """Basis data of [conjoined | block] on this side's rows."""
    gathered = _gather(field, grid, side.rows, [c0] + side.cols)
    bas, exp = column_basis(gathered)
    conj_in_basis = bool(bas) and bas[0] == 0
    block_basis = [side.cols[i - 1] for i in bas if i >= 1]
    return bas, exp, conj_in_basis, block_basis


def _merge2(field, grid, c0, X: _Side, Y: _Side) -> _Side:
    basX, expX, conjX, PX = _side_basis(field, grid, c0, X)
    basY, expY, conjY, QY = _side_basis(field, grid, c0, Y)
    alphaX = len(basX) + X.pending
    alphaY = len(basY) + Y.pending
    if alphaY > alphaX:
        X, Y = Y, X
        basX, expX, conjX, PX, basY, expY, conjY, QY = basY, expY, conjY, QY, basX, expX, conjX, PX
        alphaX, alphaY = alphaY, alphaX
    target = alphaX
    c = 1 if (conjX or conjY) else 0
    if c == 0:
        # conjoined column still all-zero: no lambda available yet, so pair
        # block bases maximally and keep any rank bump pending for a later
        # piece whose slice is nonzero
        k = min(len(PX), len(QY))
    else:
        k = min(len(PX), len(QY), max(0, c + len(PX) + len(QY) - target))

    zero = field.zero
    for i in range(k):
        p, q = PX[i], QY[i]
        for r in Y.rows:
            grid[r][p] = grid[r][q]
        for r in X.rows:
            grid[r][q] = grid[r][p]
    for i in range(k, len(PX)):
        p = PX[i]
        for r in Y.rows:
            grid[r][p] = zero
    for i in range(k, len(QY)):
        q = QY[i]
        for r in X.rows:
            grid[r][q] = zero

    def fill_nonbasis(side, bas, exp, other_rows):
        colof = [c0 if pos == 0 else side.cols[pos - 1] for pos in bas]
        for j, coeffs in exp.items():
            if j == 0:
                continue  # the conjoined column is fixed data
            tgt = side.cols[j - 1]
            for r in other_rows:
                acc = zero
                for src, coef in zip(colof, coeffs):
                    if not field.is_zero(coef):
                        acc = field.add(acc, field.mul(coef, grid[r][src]))
                grid[r][tgt] = acc

    fill_nonbasis(X, basX, expX, Y.rows)
    fill_nonbasis(Y, basY, expY, X.rows)

    achieved = c + len(PX) + len(QY) - k
    return _Side(rows=sorted(X.rows + Y.rows), cols=sorted(X.cols + Y.cols),
                 pending=max(0, target - achieved))


def merge_subdiag(subdec: SubDecomposition,
                  completions: Sequence[Tuple[Sequence, DenseMatrix]],
                  flags: Sequence[int]) -> DenseMatrix:
    """Reassemble completed pieces around their conjoined line.

    ``completions[i]`` is (completed slice values, completed block) for piece
    i; ``flags[i]`` is its zero(u, A) verdict.  Pieces fold pairwise in
    descending effective rank; a flagged piece's extra basis direction is
    realized by the nonzero entry the conjoined line carries in another
    piece.  The conjoined line's entries are written first and never
    overwritten; overlapping pieces are an error.
    """
    if len(completions) != len(subdec.pieces) or len(flags) != len(subdec.pieces):
        raise ValueError("one completion and one flag per piece required")
    if subdec.axis == ROW:
        t = subdec.transposed()
        tcompl = [(sl, block.transpose()) for sl, block in completions]
        return _merge_col(t, tcompl, flags).transpose()
    return _merge_col(subdec, completions, flags)


def _merge_col(subdec: SubDecomposition, completions, flags) -> DenseMatrix:
    field = completions[0][1].field
    R, C, c0 = subdec.rows, subdec.cols, subdec.conjoined_index
    grid = [[None] * C for _ in range(R)]

    sides = []
    for piece, (slice_vals, block), flag in zip(subdec.pieces, completions, flags):
        if len(slice_vals) != len(piece.rows):
            raise ValueError("slice length does not match piece rows")
        if block.rows != len(piece.rows) or block.cols != len(piece.cols):
            raise ValueError("block dimensions do not match piece")
        slice_zero = True
        for i, r in enumerate(piece.rows):
            v = field.element(slice_vals[i])
            if grid[r][c0] is not None:
                raise ValueError("inconsistent conjoined-line slices: overlapping pieces")
            grid[r][c0] = v
            if not field.is_zero(v):
                slice_zero = False
        for i, r in enumerate(piece.rows):
            for j, c in enumerate(piece.cols):
                if c == c0 or grid[r][c] is not None:
                    raise ValueError("overlapping piece blocks")
                grid[r][c] = block.entry(i, j)
        sides.append(_Side(rows=sorted(piece.rows), cols=sorted(piece.cols),
                           pending=flag if slice_zero else 0))

    for r in range(R):
        if grid[r][c0] is None:
            raise ValueError("pieces do not cover every conjoined-line entry")

    if len(sides) == 1:
        acc = sides[0]
    else:
        order = []
        for side in sides:
            gathered = _gather(field, grid, side.rows, [c0] + side.cols)
            bas, _ = column_basis(gathered)
            order.append((-(len(bas) + side.pending), side.rows[0], side))
        order.sort(key=lambda t: (t[0], t[1]))
        acc = order[0][2]
        for _, _, nxt in order[1:]:
            acc = _merge2(field, grid, c0, acc, nxt)

    for r in range(R):
        for c in range(C):
            if grid[r][c] is None:
                raise ValueError("pieces do not cover the full matrix")
    return DenseMatrix(field, grid, cols=C)
