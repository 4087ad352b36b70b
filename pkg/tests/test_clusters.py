import random

import pytest

from matcomp import (DenseMatrix, GF2, PartialMatrix, aggregate_records, brute_min_rank,
                     decompose, geometric_k_grid, merge_udiag, render_aggregate_csv,
                     render_raw_csv, simulate_cluster_counts)
from matcomp.fields import rank

from conftest import GF3, Q, random_partial


def test_decompose_examples():
    d = decompose(PartialMatrix.from_rows(GF2, [[1, None], [None, 1]]))
    assert [(c.rows, c.cols) for c in d.clusters] == [((0,), (0,)), ((1,), (1,))]

    d2 = decompose(PartialMatrix.from_rows(GF2, [[1, 1], [None, 1]]))
    assert [(c.rows, c.cols) for c in d2.clusters] == [((0, 1), (0, 1))]

    # the known zero at (1,1) glues rows 1 and 2 through column 1
    d3 = decompose(PartialMatrix.from_rows(GF2, [[1, None, None],
                                                 [None, 0, 1],
                                                 [None, 1, None]]))
    assert [(c.rows, c.cols) for c in d3.clusters] == [((0,), (0,)), ((1, 2), (1, 2))]


def test_decompose_rejects_junk():
    with pytest.raises(ValueError):
        decompose(PartialMatrix.from_rows(GF2, [[1, None], [None, None]]))
    with pytest.raises(ValueError):
        decompose(PartialMatrix.from_rows(GF2, [[1, 0], [None, 0]]))


def test_decompose_partitions_knowns():
    rng = random.Random(31)
    for _ in range(40):
        M = random_partial(rng, rng.randint(1, 6), rng.randint(1, 6), known_prob=0.4)
        rep = M.strip_junk()
        if rep.core.rows == 0 or rep.core.cols == 0:
            continue
        core = rep.core
        d = decompose(core)
        seen_rows = [r for cl in d.clusters for r in cl.rows]
        seen_cols = [c for cl in d.clusters for c in cl.cols]
        assert sorted(seen_rows) == list(range(core.rows))
        assert sorted(seen_cols) == list(range(core.cols))
        rebuilt = {}
        for cl in d.clusters:
            for i, j, v in cl.matrix.known_items():
                rebuilt[(cl.rows[i], cl.cols[j])] = v
        assert rebuilt == {(r, c): v for r, c, v in core.known_items()}


def test_decompose_permutation_equivariant():
    rng = random.Random(32)
    for _ in range(25):
        M = random_partial(rng, rng.randint(1, 5), rng.randint(1, 5), known_prob=0.6)
        try:
            d = decompose(M)
        except ValueError:
            continue
        rp = list(range(M.rows))
        cp = list(range(M.cols))
        rng.shuffle(rp)
        rng.shuffle(cp)
        dp = decompose(M.permute(rp, cp))
        # blocks must map to blocks under the permutation, as unordered sets
        orig = {(frozenset(cl.rows), frozenset(cl.cols)) for cl in d.clusters}
        rinv = {orig_idx: new for new, orig_idx in enumerate(rp)}
        cinv = {orig_idx: new for new, orig_idx in enumerate(cp)}
        mapped = {(frozenset(rinv[r] for r in rows), frozenset(cinv[c] for c in cols))
                  for rows, cols in orig}
        perm = {(frozenset(cl.rows), frozenset(cl.cols)) for cl in dp.clusters}
        assert mapped == perm


def test_merge_udiag_examples():
    m1 = merge_udiag([((0,), (0,), DenseMatrix(GF2, [[1]])),
                      ((1,), (1,), DenseMatrix(GF2, [[1]]))])
    assert m1.to_rows() == [[1, 1], [1, 1]]
    assert rank(m1) == 1

    m2 = merge_udiag([((0, 1), (0, 1), DenseMatrix(GF2, [[1, 0], [0, 1]])),
                      ((2,), (2,), DenseMatrix(GF2, [[1]]))])
    assert m2.to_rows() == [[1, 0, 1], [0, 1, 0], [1, 0, 1]]
    assert rank(m2) == 2

    single = DenseMatrix(Q, [[2, 3], [4, 5]])
    m3 = merge_udiag([((0, 1), (0, 1), single)])
    assert m3 == single


def test_merge_udiag_validation():
    with pytest.raises(ValueError):
        merge_udiag([])
    with pytest.raises(ValueError):
        merge_udiag([((0,), (0,), DenseMatrix(GF2, [[1]])),
                     ((0,), (1,), DenseMatrix(GF2, [[1]]))])
    with pytest.raises(ValueError):
        merge_udiag([((0,), (0,), DenseMatrix(GF2, [[1]])),
                     ((2,), (1,), DenseMatrix(GF2, [[1]]))])


@pytest.mark.parametrize("field", [GF2, GF3, Q])
def test_merge_udiag_rank_law(field):
    rng = random.Random(33)
    for _ in range(30):
        nparts = rng.randint(1, 3)
        parts = []
        row_at = col_at = 0
        for _ in range(nparts):
            r, c = rng.randint(1, 3), rng.randint(1, 3)
            dense = DenseMatrix(field, [[field.random_element(rng) for _ in range(c)]
                                        for _ in range(r)], cols=c)
            parts.append((tuple(range(row_at, row_at + r)),
                          tuple(range(col_at, col_at + c)), dense))
            row_at += r
            col_at += c
        merged = merge_udiag(parts)
        assert rank(merged) == max(rank(p[2]) for p in parts)
        # the merged matrix preserves each block verbatim
        for rows, cols, dense in parts:
            for i, r in enumerate(rows):
                for j, c in enumerate(cols):
                    assert merged.entry(r, c) == dense.entry(i, j)


def test_thm2_udiag_mr_is_max_of_block_mrs():
    rng = random.Random(34)
    checked = 0
    while checked < 30:
        nparts = rng.randint(2, 3)
        blocks = []
        for _ in range(nparts):
            while True:
                B = random_partial(rng, rng.randint(1, 2), rng.randint(1, 2),
                                   known_prob=0.7)
                if any(v != 0 for _, _, v in B.known_items()):
                    break
            blocks.append(B)
        known = {}
        row_at = col_at = 0
        placed = []
        for B in blocks:
            for r, c, v in B.known_items():
                known[(row_at + r, col_at + c)] = v
            placed.append((row_at, col_at, B))
            row_at += B.rows
            col_at += B.cols
        M = PartialMatrix(row_at, col_at, GF2, known)
        if M.unknown_count > 14:
            continue
        checked += 1
        mr, _ = brute_min_rank(M)
        assert mr == max(brute_min_rank(B)[0] for B in blocks)
        # the construction achieves it from per-block minimum witnesses
        parts = []
        for (r0, c0, B) in placed:
            _, w = brute_min_rank(B)
            parts.append((tuple(range(r0, r0 + B.rows)),
                          tuple(range(c0, c0 + B.cols)), w))
        assert rank(merge_udiag(parts)) == mr


def test_remark_2_1_small_blocks_filled_arbitrarily():
    rng = random.Random(35)
    for _ in range(20):
        A = DenseMatrix(GF2, [[1, 0, 1], [0, 1, 0], [1, 1, 0]])
        a = rank(A)
        r, c = rng.randint(1, 3), rng.randint(1, 3)
        if min(r, c) > a:
            continue
        B = DenseMatrix(GF2, [[rng.randrange(2) for _ in range(c)] for _ in range(r)],
                        cols=c)
        merged = merge_udiag([(tuple(range(3)), tuple(range(3)), A),
                              (tuple(range(3, 3 + r)), tuple(range(3, 3 + c)), B)])
        assert rank(merged) == a


def test_simulation_endpoints_and_determinism():
    recs = simulate_cluster_counts(8, [0, 1, 64], trials=5, seed=9)
    by_k = {}
    for r in recs:
        by_k.setdefault(r.k, []).append(r.clusters)
        assert 0 <= r.clusters <= min(r.n, r.k) if r.k else r.clusters == 0
    assert by_k[0] == [0] * 5
    assert by_k[1] == [1] * 5
    assert by_k[64] == [1] * 5

    again = simulate_cluster_counts(8, [0, 1, 64], trials=5, seed=9)
    assert render_raw_csv(again) == render_raw_csv(recs)
    threaded = simulate_cluster_counts(8, [0, 1, 64], trials=5, seed=9, threads=3)
    assert render_raw_csv(threaded) == render_raw_csv(recs)


def test_csv_schemas():
    recs = simulate_cluster_counts(4, [0, 16], trials=3, seed=1)
    raw = render_raw_csv(recs)
    assert raw.splitlines()[0] == "n,k,trial,clusters"
    agg = render_aggregate_csv(aggregate_records(recs))
    lines = agg.splitlines()
    assert lines[0] == "n,k,mean_clusters,stddev"
    assert lines[1] == "4,0,0.000000,0.000000"
    assert lines[2] == "4,16,1.000000,0.000000"


def test_simulation_validation():
    with pytest.raises(ValueError):
        simulate_cluster_counts(4, [17], trials=1, seed=0)
    with pytest.raises(ValueError):
        simulate_cluster_counts(4, [1], trials=1, seed=-1)


def test_geometric_k_grid():
    grid = geometric_k_grid(8, 10)
    assert grid[0] == 0 and grid[1] == 1 and grid[-1] == 64
    assert grid == sorted(set(grid))
