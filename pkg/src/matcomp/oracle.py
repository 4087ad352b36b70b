"""Brute-force ground truth for small finite-field instances.

Enumerates every completion of a partial matrix to compute the exact minimum
rank, a witness completion achieving it, and the zero(u, A) indicator used by
sub-decomposition.  All property tests and acceptance checks lean on this
module; it deliberately refuses infinite fields, where enumeration is not
ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

from .fields import PRIME_FIELD, DenseMatrix, FieldSpec, _count
from .partial import PartialMatrix


class OracleError(Exception):
    pass


class UnsupportedField(OracleError):
    """The oracle requires a finite field."""


class BudgetExceeded(OracleError):
    """Enumeration size exceeds the configured budget."""


@dataclass(frozen=True)
class OracleBudget:
    """Caps on the p**unknowns enumeration.

    ``max_unknowns`` defaults to 16 over GF(2) and 10 over larger primes;
    ``max_elements`` bounds the number of enumerated completions outright.
    """

    max_unknowns: Optional[int] = None
    max_elements: int = 1 << 16

    def resolved_max_unknowns(self, field: FieldSpec) -> int:
        if self.max_unknowns is not None:
            return self.max_unknowns
        return 16 if field.modulus == 2 else 10

    def fits(self, field: FieldSpec, unknowns: int) -> bool:
        if field.kind != PRIME_FIELD:
            return False
        if unknowns > self.resolved_max_unknowns(field):
            return False
        return field.modulus ** unknowns <= self.max_elements

    def check(self, field: FieldSpec, unknowns: int):
        if field.kind != PRIME_FIELD:
            raise UnsupportedField("oracle requires a finite field")
        if not self.fits(field, unknowns):
            raise BudgetExceeded(
                f"{unknowns} unknowns over GF({field.modulus}) exceeds the oracle budget")


DEFAULT_BUDGET = OracleBudget()


def _rank_modp(rows, ncols: int, p: int, cap: Optional[int] = None) -> int:
    """Forward elimination rank mod p; aborts once the pivot count passes cap."""
    m = len(rows)
    pr = 0
    for c in range(ncols):
        if pr >= m:
            break
        sel = -1
        for i in range(pr, m):
            if rows[i][c]:
                sel = i
                break
        if sel < 0:
            continue
        if sel != pr:
            rows[pr], rows[sel] = rows[sel], rows[pr]
        inv = pow(rows[pr][c], p - 2, p)
        prow = [x * inv % p for x in rows[pr]]
        rows[pr] = prow
        for i in range(pr + 1, m):
            f = rows[i][c]
            if f:
                rows[i] = [(x - f * px) % p for x, px in zip(rows[i], prow)]
        pr += 1
        if cap is not None and pr > cap:
            return pr
    return pr


def _enumerate(M: PartialMatrix, budget: OracleBudget, visit):
    """Drive *visit(grid, index)* over every completion of M, in a fixed order.

    Unknown positions are sorted row-major and assignment digits are
    little-endian in p, so the enumeration (and hence every witness picked
    from it) is deterministic.
    """
    field = M.field
    positions = sorted((r, c) for r in range(M.rows) for c in range(M.cols)
                       if not M.is_known(r, c))
    budget.check(field, len(positions))
    p = field.modulus
    grid = [[0] * M.cols for _ in range(M.rows)]
    for r, c, v in M.known_items():
        grid[r][c] = v
    total = p ** len(positions)
    _count(M.rows * total, M.cols)
    for idx in range(total):
        n = idx
        for (r, c) in positions:
            grid[r][c] = n % p
            n //= p
        if visit(grid, idx) is False:
            break


def brute_min_rank(M: PartialMatrix, budget: OracleBudget = DEFAULT_BUDGET) -> Tuple[int, DenseMatrix]:
    """Exact minimum rank over all completions, with the first witness."""
    field = M.field
    if field.kind != PRIME_FIELD:
        raise UnsupportedField("oracle requires a finite field")
    p = field.modulus
    state = {"best": None, "witness": None}

    def visit(grid, idx):
        best = state["best"]
        cap = None if best is None else best - 1
        r = _rank_modp([list(row) for row in grid], M.cols, p, cap)
        if best is None or r < best:
            state["best"] = r
            state["witness"] = [list(row) for row in grid]
            if r == 0:
                return False
        return None

    _enumerate(M, budget, visit)
    witness = DenseMatrix(field, state["witness"], cols=M.cols)
    return state["best"], witness


def _column_zero(grid, col: int) -> bool:
    return all(row[col] == 0 for row in grid)


def zero_scan(u: Sequence, A: PartialMatrix, budget: OracleBudget = DEFAULT_BUDGET):
    """Exact zero(u, A) with a witness completion of [u | A].

    Returns ``(value, witness)``: value is 1 iff every minimum-rank completion
    forces the u column to zero.  When value is 0 the witness is a minimum-rank
    completion whose u column is nonzero (the completion Theorem 5's merge
    construction wants); when value is 1 it is a minimum-rank completion.
    """
    if len(u) != A.rows:
        raise ValueError("u length must equal the row count of A")
    field = A.field
    known = {(i, 0): v for i, v in enumerate(u) if v is not None}
    for r, c, v in A.known_items():
        known[(r, c + 1)] = v
    uA = PartialMatrix(A.rows, A.cols + 1, field, known)
    p = field.modulus if field.kind == PRIME_FIELD else None
    state = {"best": None, "all_zero": True, "nz_witness": None, "first": None}

    def visit(grid, idx):
        best = state["best"]
        cap = None if best is None else best
        r = _rank_modp([list(row) for row in grid], uA.cols, p, cap)
        if best is None or r < best:
            state["best"] = r
            uz = _column_zero(grid, 0)
            state["all_zero"] = uz
            state["first"] = [list(row) for row in grid]
            state["nz_witness"] = None if uz else state["first"]
        elif r == best and state["all_zero"]:
            if not _column_zero(grid, 0):
                state["all_zero"] = False
                state["nz_witness"] = [list(row) for row in grid]
        return None

    _enumerate(uA, budget, visit)
    if state["all_zero"]:
        return 1, DenseMatrix(field, state["first"], cols=uA.cols)
    return 0, DenseMatrix(field, state["nz_witness"], cols=uA.cols)


def brute_zero(u: Sequence, A: PartialMatrix, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """zero(u, A): 1 iff the u column is zero in every minimum-rank completion."""
    value, _ = zero_scan(u, A, budget)
    return value


@dataclass
class PropertyResult:
    passes: int = 0
    failures: int = 0
    counterexample: Optional[str] = None

    def record(self, ok: bool, detail: str):
        if ok:
            self.passes += 1
        else:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = detail


@dataclass
class PropertyReport:
    results: dict

    @property
    def all_passed(self) -> bool:
        return all(r.failures == 0 for r in self.results.values())

    def summary(self) -> str:
        lines = []
        for name in sorted(self.results):
            r = self.results[name]
            status = "ok" if r.failures == 0 else f"FAIL ({r.counterexample})"
            lines.append(f"{name}: {r.passes} passed, {r.failures} failed {status}")
        return "\n".join(lines)


def _first_fill_half(M: PartialMatrix) -> PartialMatrix:
    """Partially complete M: fill the first half of its unknowns with zero."""
    unknown = sorted((r, c) for r in range(M.rows) for c in range(M.cols)
                     if not M.is_known(r, c))
    take = (len(unknown) + 1) // 2
    known = {(r, c): v for r, c, v in M.known_items()}
    for (r, c) in unknown[:take]:
        known[(r, c)] = 0
    return PartialMatrix(M.rows, M.cols, M.field, known)


def check_mr_properties(samples: Iterable[PartialMatrix],
                        budget: OracleBudget = DEFAULT_BUDGET) -> PropertyReport:
    """Verify the basic minimum-rank identities on each sample instance.

    Covers: mr below any completion's rank, monotonicity under partial
    completion, column-concatenation subadditivity, transpose invariance,
    the submatrix lower bound, and invariance under row/column interchange.
    """
    from .fields import rank as dense_rank

    names = ["mr-le-completion-rank", "partial-completion-monotone",
             "column-subadditive", "transpose-invariant",
             "submatrix-lower-bound", "permutation-invariant"]
    results = {n: PropertyResult() for n in names}
    for M in samples:
        mr, _ = brute_min_rank(M, budget)
        detail = repr(M)

        zero_rank = dense_rank(M.fill())
        one_rank = dense_rank(M.fill(1))
        results["mr-le-completion-rank"].record(mr <= zero_rank and mr <= one_rank, detail)

        pm, _ = brute_min_rank(_first_fill_half(M), budget)
        results["partial-completion-monotone"].record(mr <= pm, detail)

        if M.cols >= 2:
            cut = M.cols // 2
            left, _ = brute_min_rank(M.restrict(range(M.rows), range(cut)), budget)
            right, _ = brute_min_rank(M.restrict(range(M.rows), range(cut, M.cols)), budget)
            results["column-subadditive"].record(mr <= left + right, detail)

        tmr, _ = brute_min_rank(M.transpose(), budget)
        results["transpose-invariant"].record(tmr == mr, detail)

        if M.rows > 1 or M.cols > 1:
            sub = M.restrict(range(max(1, M.rows - 1)), range(max(1, M.cols - 1)))
            smr, _ = brute_min_rank(sub, budget)
            results["submatrix-lower-bound"].record(mr >= smr, detail)

        perm = M.permute(list(reversed(range(M.rows))), list(reversed(range(M.cols))))
        pmr, _ = brute_min_rank(perm, budget)
        results["permutation-invariant"].record(pmr == mr, detail)
    return PropertyReport(results)
