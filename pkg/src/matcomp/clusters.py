"""Cluster discovery and recombination.

A junk-free partial matrix splits into clusters: connected components of the
bipartite graph with one vertex per row and column and one edge per known
entry (known zeros included -- they are data and force additivity if treated
as blocks, so they must stay connected).  Off-cluster positions are entirely
unknown, which is exactly the u-diagonal block form; completed clusters can
then be recombined without raising the rank above the largest cluster rank.

Also hosts the cluster-count Monte Carlo: sprinkle k known entries uniformly
over an n x n grid, strip junk, and count clusters.
"""

from __future__ import annotations

import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fields import GF2, DenseMatrix, FieldSpec, column_basis
from .partial import COL, ROW, PartialMatrix


@dataclass(frozen=True)
class Cluster:
    """One connected block: source row/col indices plus the local restriction."""

    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    matrix: PartialMatrix


@dataclass(frozen=True)
class ClusterDecomposition:
    rows: int
    cols: int
    clusters: Tuple[Cluster, ...]


def decompose(M: PartialMatrix) -> ClusterDecomposition:
    """Split a junk-free matrix into clusters by alternating set growth.

    Starting from an unvisited row, the row set and column set take turns
    absorbing the lines reachable through known entries, each processed line
    being blacked out, until neither set grows.  Clusters come out sorted by
    their smallest row index.
    """
    for r in range(M.rows):
        if M.is_junk(ROW, r):
            raise ValueError(f"input contains a junk row ({r}); strip junk first")
    for c in range(M.cols):
        if M.is_junk(COL, c):
            raise ValueError(f"input contains a junk column ({c}); strip junk first")

    row_adj: Dict[int, list] = {r: [] for r in range(M.rows)}
    col_adj: Dict[int, list] = {c: [] for c in range(M.cols)}
    for r, c, _ in M.known_items():
        row_adj[r].append(c)
        col_adj[c].append(r)

    seen_r = [False] * M.rows
    seen_c = [False] * M.cols
    clusters = []
    for r0 in range(M.rows):
        if seen_r[r0]:
            continue
        seen_r[r0] = True
        row_set = [r0]
        col_set: List[int] = []
        new_rows = [r0]
        while new_rows:
            new_cols = []
            for r in new_rows:
                for c in row_adj[r]:
                    if not seen_c[c]:
                        seen_c[c] = True
                        new_cols.append(c)
            col_set.extend(new_cols)
            new_rows = []
            for c in new_cols:
                for r in col_adj[c]:
                    if not seen_r[r]:
                        seen_r[r] = True
                        new_rows.append(r)
            row_set.extend(new_rows)
        rows = tuple(sorted(row_set))
        cols = tuple(sorted(col_set))
        clusters.append(Cluster(rows=rows, cols=cols, matrix=M.restrict(rows, cols)))
    clusters.sort(key=lambda cl: cl.rows[0])
    return ClusterDecomposition(rows=M.rows, cols=M.cols, clusters=tuple(clusters))


# -- Theorem-2 recombination ---------------------------------------------------


class _FoldState:
    """Accumulated side of the u-diagonal fold: a completed block whose basis
    columns and non-basis expansions are carried forward so no elimination is
    ever redone on the joined matrix."""

    __slots__ = ("rows", "cols", "basis", "expans", "rank")

    def __init__(self, rows, cols, basis, expans):
        self.rows = rows          # sorted source row indices
        self.cols = cols          # sorted source col indices
        self.basis = basis        # source col indices of basis columns, in order
        self.expans = expans      # source col -> coeff list over self.basis
        self.rank = len(basis)


def _part_state(part_rows, part_cols, dense) -> _FoldState:
    basis_local, expans_local = column_basis(dense)
    basis = [part_cols[j] for j in basis_local]
    expans = {part_cols[j]: coeffs for j, coeffs in expans_local.items()}
    return _FoldState(sorted(part_rows), sorted(part_cols), basis, expans)


def _fold_pair(field: FieldSpec, grid, big: _FoldState, small: _FoldState) -> _FoldState:
    """Fill the two off-diagonal unknown blocks of u-diag(big, small).

    Basis columns pair up; the surplus basis columns of the larger side extend
    with zeros; every non-basis column extends by its own expansion
    coefficients applied to the already-extended basis columns.
    """
    if small.rank > big.rank:
        big, small = small, big
    a, b = big.rank, small.rank
    zero = field.zero
    for i in range(b):
        p, q = big.basis[i], small.basis[i]
        for r in small.rows:
            grid[r][p] = grid[r][q]
        for r in big.rows:
            grid[r][q] = grid[r][p]
    for i in range(b, a):
        p = big.basis[i]
        for r in small.rows:
            grid[r][p] = zero
    for j, coeffs in big.expans.items():
        for r in small.rows:
            acc = zero
            for k, coef in enumerate(coeffs):
                if not field.is_zero(coef):
                    acc = field.add(acc, field.mul(coef, grid[r][big.basis[k]]))
            grid[r][j] = acc
    for j, coeffs in small.expans.items():
        for r in big.rows:
            acc = zero
            for k, coef in enumerate(coeffs):
                if not field.is_zero(coef):
                    acc = field.add(acc, field.mul(coef, grid[r][small.basis[k]]))
            grid[r][j] = acc

    merged_expans = dict(big.expans)
    pad = [zero] * (a - b)
    for j, coeffs in small.expans.items():
        merged_expans[j] = list(coeffs) + pad
    one = field.one
    for i in range(b):
        q = small.basis[i]
        coeffs = [zero] * a
        coeffs[i] = one
        merged_expans[q] = coeffs
    return _FoldState(sorted(big.rows + small.rows), sorted(big.cols + small.cols),
                      big.basis, merged_expans)


def merge_udiag(parts: Sequence[Tuple[Sequence[int], Sequence[int], DenseMatrix]]) -> DenseMatrix:
    """Recombine completed u-diagonal blocks into one completed matrix.

    ``parts`` is an ordered list of (row indices, col indices, completed
    block).  Row sets must be pairwise disjoint and jointly cover
    0..R-1; likewise columns.  The result has rank equal to the largest
    block rank.
    """
    if not parts:
        raise ValueError("merge_udiag needs at least one part")
    field = parts[0][2].field
    all_rows: List[int] = []
    all_cols: List[int] = []
    for rows, cols, dense in parts:
        if dense.field != field:
            raise ValueError("parts must share one field")
        if len(rows) != dense.rows or len(cols) != dense.cols:
            raise ValueError("part index sets do not match its block dimensions")
        all_rows.extend(rows)
        all_cols.extend(cols)
    R, C = len(all_rows), len(all_cols)
    if sorted(all_rows) != list(range(R)) or sorted(all_cols) != list(range(C)):
        raise ValueError("row/col index sets must be disjoint and cover the full range")

    if len(parts) == 1:
        rows, cols, dense = parts[0]
        grid = [[None] * C for _ in range(R)]
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                grid[r][c] = dense.entry(i, j)
        return DenseMatrix(field, grid, cols=C)

    grid = [[None] * C for _ in range(R)]
    states = []
    for rows, cols, dense in parts:
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                grid[r][c] = dense.entry(i, j)
        states.append(_part_state(list(rows), list(cols), dense))
    states.sort(key=lambda s: (-s.rank, s.rows[0]))
    acc = states[0]
    for nxt in states[1:]:
        acc = _fold_pair(field, grid, acc, nxt)
    return DenseMatrix(field, grid, cols=C)


# -- cluster-count Monte Carlo ---------------------------------------------------


@dataclass(frozen=True)
class ClusterCountRecord:
    n: int
    k: int
    trial: int
    clusters: int


def _count_clusters_trial(n: int, k: int, seed: int, trial: int) -> int:
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, k, trial]))
    if k:
        cells = rng.choice(n * n, size=k, replace=False)
        known = {(int(c) // n, int(c) % n): 1 for c in cells}
    else:
        known = {}
    M = PartialMatrix(n, n, GF2, known)
    report = M.strip_junk()
    if report.core.rows == 0 and report.core.cols == 0:
        return 0
    return len(decompose(report.core).clusters)


def simulate_cluster_counts(n: int, k_values: Sequence[int], trials: int, seed: int,
                            threads: Optional[int] = None) -> List[ClusterCountRecord]:
    """Monte Carlo cluster counts: k known entries placed uniformly at random.

    Entry values are the nonzero element of GF(2) (cluster count depends only
    on which positions are occupied; nonzero values avoid accidental junk).
    Each trial draws from its own RNG stream keyed by (seed, n, k, trial), so
    results are reproducible regardless of scheduling.
    """
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    for k in k_values:
        if not 0 <= k <= n * n:
            raise ValueError(f"k={k} outside [0, n^2]")
    jobs = [(n, k, seed, t) for k in k_values for t in range(trials)]
    if threads is not None and threads == 0:
        threads = os.cpu_count() or 1
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(lambda j: _count_clusters_trial(*j), jobs))
    else:
        counts = [_count_clusters_trial(*j) for j in jobs]
    return [ClusterCountRecord(n=j[0], k=j[1], trial=j[3], clusters=c)
            for j, c in zip(jobs, counts)]


def aggregate_records(records: Sequence[ClusterCountRecord]):
    """Collapse per-trial records to (n, k, mean, population stddev) rows."""
    groups: Dict[Tuple[int, int], List[int]] = {}
    order = []
    for rec in records:
        key = (rec.n, rec.k)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec.clusters)
    rows = []
    for (n, k) in order:
        vals = groups[(n, k)]
        mean = statistics.fmean(vals)
        std = statistics.pstdev(vals)
        rows.append((n, k, mean, std))
    return rows


def render_raw_csv(records: Sequence[ClusterCountRecord]) -> str:
    lines = ["n,k,trial,clusters"]
    lines.extend(f"{r.n},{r.k},{r.trial},{r.clusters}" for r in records)
    return "\n".join(lines) + "\n"


def render_aggregate_csv(rows) -> str:
    lines = ["n,k,mean_clusters,stddev"]
    lines.extend(f"{n},{k},{mean:.6f},{std:.6f}" for n, k, mean, std in rows)
    return "\n".join(lines) + "\n"


def geometric_k_grid(n: int, steps: int) -> List[int]:
    """k grid: 0 plus a geometric ladder from 1 to n^2 inclusive."""
    if steps < 2:
        raise ValueError("need at least 2 steps")
    top = n * n
    ks = {0, 1, top}
    for i in range(steps):
        ks.add(int(round(math.exp(math.log(top) * i / (steps - 1)))))
    return sorted(ks)
