"""Exact scalar arithmetic and the dense linear-algebra kernel.

Three scalar domains are supported: prime fields GF(p), arbitrary-precision
rationals, and floating-point reals with an explicit zero tolerance.  Values
are stored in canonical form (residues in [0, p), reduced ``Fraction``
instances, plain floats), so plain ``==`` works on exact fields and the
tolerance only enters through :meth:`FieldSpec.is_zero` / :meth:`FieldSpec.eq`.

The kernel routines (:func:`rank`, :func:`solve_membership`,
:func:`column_basis`) all run deterministic Gaussian elimination: pivots are
chosen leftmost-column / topmost-row, except over the reals where the largest
magnitude in the column wins and the tolerance decides zero-ness.  GF(2)
matrices take a bit-packed fast path that produces the same reduced echelon
form as the generic route.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

PRIME_FIELD = "prime-field"
RATIONAL = "rational"
REAL = "real"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A scalar domain: GF(p), exact rationals, or tolerance reals."""

    kind: str
    modulus: int = 0
    tolerance: float = 0.0

    def __post_init__(self):
        if self.kind == PRIME_FIELD:
            if not _is_prime(self.modulus):
                raise ValueError(f"modulus {self.modulus} is not prime")
            if self.tolerance:
                raise ValueError("tolerance must be 0 for exact fields")
        elif self.kind == RATIONAL:
            if self.modulus or self.tolerance:
                raise ValueError("rational field takes no modulus/tolerance")
        elif self.kind == REAL:
            if self.modulus:
                raise ValueError("real field takes no modulus")
            if self.tolerance < 0:
                raise ValueError("tolerance must be nonnegative")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @staticmethod
    def gf(p: int) -> "FieldSpec":
        return FieldSpec(PRIME_FIELD, modulus=p)

    @staticmethod
    def rational() -> "FieldSpec":
        return FieldSpec(RATIONAL)

    @staticmethod
    def real(tolerance: float = 1e-9) -> "FieldSpec":
        return FieldSpec(REAL, tolerance=tolerance)

    # -- canonical values -------------------------------------------------

    @property
    def zero(self):
        if self.kind == PRIME_FIELD:
            return 0
        if self.kind == RATIONAL:
            return Fraction(0)
        return 0.0

    @property
    def one(self):
        if self.kind == PRIME_FIELD:
            return 1
        if self.kind == RATIONAL:
            return Fraction(1)
        return 1.0

    def element(self, x):
        """Canonicalize *x* into this field."""
        if self.kind == PRIME_FIELD:
            return int(x) % self.modulus
        if self.kind == RATIONAL:
            return Fraction(x)
        return float(x)

    def parse_literal(self, token: str):
        """Parse a text literal (``3``, ``-2``, ``3/4``, ``0.25``)."""
        if self.kind == PRIME_FIELD:
            return int(token, 10) % self.modulus
        if self.kind == RATIONAL:
            return Fraction(token)
        return float(token)

    def format_literal(self, value) -> str:
        if self.kind == REAL:
            return repr(float(value))
        return str(value)

    # -- arithmetic --------------------------------------------------------

    def add(self, a, b):
        if self.kind == PRIME_FIELD:
            return (a + b) % self.modulus
        return a + b

    def sub(self, a, b):
        if self.kind == PRIME_FIELD:
            return (a - b) % self.modulus
        return a - b

    def mul(self, a, b):
        if self.kind == PRIME_FIELD:
            return (a * b) % self.modulus
        return a * b

    def neg(self, a):
        if self.kind == PRIME_FIELD:
            return (-a) % self.modulus
        return -a

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError("field inverse of zero")
        if self.kind == PRIME_FIELD:
            return pow(a, self.modulus - 2, self.modulus)
        if self.kind == RATIONAL:
            return 1 / a
        return 1.0 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        if self.kind == REAL:
            return abs(a) <= self.tolerance
        return a == self.zero

    def eq(self, a, b) -> bool:
        if self.kind == REAL:
            return abs(a - b) <= self.tolerance
        return a == b

    # -- sampling (tests, simulation) ---------------------------------------

    def random_element(self, rng):
        if self.kind == PRIME_FIELD:
            return rng.randrange(self.modulus)
        if self.kind == RATIONAL:
            return Fraction(rng.randint(-6, 6), rng.randint(1, 6))
        return rng.uniform(-4.0, 4.0)

    def random_nonzero(self, rng):
        while True:
            x = self.random_element(rng)
            if not self.is_zero(x):
                return x

    def __str__(self):
        if self.kind == PRIME_FIELD:
            return f"GF({self.modulus})"
        if self.kind == RATIONAL:
            return "Q"
        return f"R(tol={self.tolerance})"


GF2 = FieldSpec.gf(2)


class DenseMatrix:
    """Immutable dense grid of canonical field values."""

    __slots__ = ("field", "rows", "cols", "_data")

    def __init__(self, field: FieldSpec, data: Sequence[Sequence], cols: Optional[int] = None):
        rows = [list(r) for r in data]
        if rows:
            width = len(rows[0])
            for r in rows:
                if len(r) != width:
                    raise ValueError("ragged matrix data")
        else:
            width = cols or 0
        self.field = field
        self.rows = len(rows)
        self.cols = width
        self._data = [[field.element(x) for x in r] for r in rows]

    @staticmethod
    def zeros(field: FieldSpec, rows: int, cols: int) -> "DenseMatrix":
        z = field.zero
        return DenseMatrix(field, [[z] * cols for _ in range(rows)], cols=cols)

    def entry(self, r: int, c: int):
        return self._data[r][c]

    def row(self, r: int) -> list:
        return list(self._data[r])

    def column(self, c: int) -> list:
        return [row[c] for row in self._data]

    def to_rows(self) -> list:
        return [list(r) for r in self._data]

    def transpose(self) -> "DenseMatrix":
        t = [[self._data[r][c] for r in range(self.rows)] for c in range(self.cols)]
        return DenseMatrix(self.field, t, cols=self.rows)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "DenseMatrix":
        data = [[self._data[r][c] for c in cols] for r in rows]
        return DenseMatrix(self.field, data, cols=len(cols))

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (self.field == other.field and self.rows == other.rows
                and self.cols == other.cols and self._data == other._data)

    def __hash__(self):
        return hash((self.field, self.rows, self.cols, tuple(tuple(r) for r in self._data)))

    def __repr__(self):
        return f"DenseMatrix({self.field}, {self._data})"


def matvec(A: DenseMatrix, x: Sequence) -> list:
    """A @ x over A's field."""
    if len(x) != A.cols:
        raise ValueError("dimension mismatch")
    fld = A.field
    out = []
    for r in range(A.rows):
        acc = fld.zero
        row = A._data[r]
        for c, xc in enumerate(x):
            if not fld.is_zero(xc):
                acc = fld.add(acc, fld.mul(row[c], xc))
        out.append(acc)
    return out


# -- elimination instrumentation -------------------------------------------
#
# The completion pipeline tags kernel calls with a scope label so that tests
# can verify the divide-and-conquer claim: elimination only ever runs on
# per-cluster matrices, never across clusters.

_ACTIVE_SCOPE: contextvars.ContextVar = contextvars.ContextVar("matcomp_kernel_scope", default=None)


class KernelCounters:
    """Per-scope tallies of elimination-kernel invocations."""

    def __init__(self):
        self.calls: dict = {}
        self.cells: dict = {}

    def record(self, label: str, cells: int):
        self.calls[label] = self.calls.get(label, 0) + 1
        self.cells[label] = self.cells.get(label, 0) + cells

    def labels(self):
        return sorted(self.calls)

    def total_calls(self, prefix: str = "") -> int:
        return sum(n for lbl, n in self.calls.items() if lbl.startswith(prefix))

    def snapshot(self) -> dict:
        return {lbl: (self.calls[lbl], self.cells[lbl]) for lbl in self.labels()}


@contextlib.contextmanager
def kernel_scope(counters: Optional[KernelCounters], label: str):
    """Attribute kernel work to *label* for the duration of the block."""
    token = _ACTIVE_SCOPE.set((counters, label) if counters is not None else None)
    try:
        yield
    finally:
        _ACTIVE_SCOPE.reset(token)


def _count(nrows: int, ncols: int):
    active = _ACTIVE_SCOPE.get()
    if active is not None:
        counters, label = active
        counters.record(label, nrows * ncols)


def current_scope_label() -> Optional[str]:
    active = _ACTIVE_SCOPE.get()
    return active[1] if active else None


# -- generic reduced row echelon form ---------------------------------------


def _rref_generic(fld: FieldSpec, rows_in: Iterable[Sequence], ncols: int):
    """Return (pivot_cols, rref_rows) of the given row list."""
    rows = [list(r) for r in rows_in]
    m = len(rows)
    piv_cols = []
    pr = 0
    for c in range(ncols):
        if pr >= m:
            break
        sel = -1
        if fld.kind == REAL:
            best = fld.tolerance
            for i in range(pr, m):
                mag = abs(rows[i][c])
                if mag > best:
                    best = mag
                    sel = i
        else:
            for i in range(pr, m):
                if not fld.is_zero(rows[i][c]):
                    sel = i
                    break
        if sel < 0:
            continue
        rows[pr], rows[sel] = rows[sel], rows[pr]
        inv = fld.inv(rows[pr][c])
        rows[pr] = [fld.mul(inv, x) for x in rows[pr]]
        prow = rows[pr]
        for i in range(m):
            if i == pr:
                continue
            f = rows[i][c]
            if fld.is_zero(f):
                continue
            rows[i] = [fld.sub(x, fld.mul(f, px)) for x, px in zip(rows[i], prow)]
        piv_cols.append(c)
        pr += 1
    return piv_cols, rows


# -- GF(2) bit-packed path ---------------------------------------------------


def pack_gf2_rows(rows: Iterable[Sequence[int]]) -> list:
    """Pack 0/1 rows into ints, bit j = column j."""
    packed = []
    for row in rows:
        bits = "".join("1" if v else "0" for v in row)
        packed.append(int(bits[::-1], 2) if bits else 0)
    return packed


def _rank_gf2(bit_rows: Iterable[int], cap: Optional[int] = None) -> int:
    """GF(2) rank by online insertion; stops early once > cap pivots found."""
    pivots = {}
    for row in bit_rows:
        while row:
            c = (row & -row).bit_length() - 1
            p = pivots.get(c)
            if p is None:
                pivots[c] = row
                break
            row ^= p
        if cap is not None and len(pivots) > cap:
            return len(pivots)
    return len(pivots)


def _rref_gf2(bit_rows: Iterable[int]):
    """Reduced echelon form over GF(2). Returns (pivot_cols, rref_row_ints).

    Matches the generic route: the RREF is unique, so pivot columns and
    expansion coefficients agree with field-generic elimination.
    """
    pivots = {}
    for row in bit_rows:
        while row:
            c = (row & -row).bit_length() - 1
            p = pivots.get(c)
            if p is None:
                pivots[c] = row
                break
            row ^= p
    cols_sorted = sorted(pivots)
    for idx in range(len(cols_sorted) - 1, -1, -1):
        c = cols_sorted[idx]
        r = pivots[c]
        for c2 in cols_sorted[idx + 1:]:
            if (r >> c2) & 1:
                r ^= pivots[c2]
        pivots[c] = r
    return cols_sorted, [pivots[c] for c in cols_sorted]


def _is_gf2(fld: FieldSpec) -> bool:
    return fld.kind == PRIME_FIELD and fld.modulus == 2


# -- kernel operations --------------------------------------------------------


def rank(A: DenseMatrix) -> int:
    """Column-space dimension by exact Gaussian elimination."""
    _count(A.rows, A.cols)
    if _is_gf2(A.field):
        return _rank_gf2(pack_gf2_rows(A.to_rows()))
    piv, _ = _rref_generic(A.field, A.to_rows(), A.cols)
    return len(piv)


def solve_membership(D: DenseMatrix, r: Sequence) -> Optional[list]:
    """Solve D a = r; None when r is outside Col(D).

    Free variables are set to zero under leftmost-pivot elimination, so the
    returned coefficient vector is unique and deterministic.
    """
    if len(r) != D.rows:
        raise ValueError("right-hand side length must equal row count")
    fld = D.field
    rhs = [fld.element(x) for x in r]
    _count(D.rows, D.cols + 1)
    n = D.cols
    if _is_gf2(fld):
        bits = pack_gf2_rows(D.to_rows())
        aug = [b | (v << n) for b, v in zip(bits, rhs)]
        piv, rref = _rref_gf2(aug)
        if n in piv:
            return None
        sol = [0] * n
        for k, c in enumerate(piv):
            sol[c] = (rref[k] >> n) & 1
        return sol
    rows = [D.row(i) + [rhs[i]] for i in range(D.rows)]
    piv, rref = _rref_generic(fld, rows, n + 1)
    if n in piv:
        return None
    sol = [fld.zero] * n
    for k, c in enumerate(piv):
        sol[c] = rref[k][n]
    return sol


def column_basis(A: DenseMatrix):
    """Leftmost maximal independent column set plus expansion coefficients.

    Returns ``(basis_cols, expansions)`` where ``expansions[j]`` lists, for
    every non-basis column j, the coefficients over ``basis_cols`` that
    reproduce column j exactly.
    """
    _count(A.rows, A.cols)
    fld = A.field
    if _is_gf2(fld):
        piv, rref = _rref_gf2(pack_gf2_rows(A.to_rows()))
        expans = {}
        pivset = set(piv)
        for j in range(A.cols):
            if j not in pivset:
                expans[j] = [(rref[k] >> j) & 1 for k in range(len(piv))]
        return piv, expans
    piv, rref = _rref_generic(fld, A.to_rows(), A.cols)
    pivset = set(piv)
    expans = {}
    for j in range(A.cols):
        if j not in pivset:
            expans[j] = [rref[k][j] for k in range(len(piv))]
    return piv, expans
