"""Mixed-Echelon-Hermite transformation, batch and incremental.

``batch_mehnf`` rebuilds the normal form from scratch: it column-reduces
the rational block, finds the row order that puts the rank-determining
rows on top, clears the coupling block, and brings the residual integer
block into Hermite normal form.

``MehState`` maintains the same normal form one inequality at a time.  An
extension transforms the incoming row by the current matrix V and then
either fills the next rational gap (``extend_rat``: swap, scale, full
elimination), fills the next integer gap (``extend_int``: Euclidean
``reduce_left_int`` then modular ``reduce_right_int``), or is appended
unchanged.  All column operations act only on columns that are zero in
every previously inserted row, so earlier inequalities survive verbatim
and backtracking is a plain row removal that leaves V untouched.

Coefficient blow-up in V is bounded by a bit-size valve: when any entry
exceeds the configured limit, the state is rebuilt via ``batch_mehnf``
from the surviving rows.  Rows inserted before a rebuild lose their
cheap-removal property, so backtracking over them rebuilds as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .linalg import Matrix, TransformMatrix, column_reduce, frac, hermite_normal_form, is_mctm, is_mehnf
from .model import DimensionMismatchError

_ZERO = Fraction(0)


class GapPreconditionError(ValueError):
    """An extension helper was called on a column that is not a gap."""


def rpiv(k: int, h: Matrix, n1: int) -> int:
    """Largest 1-based rational column with a non-zero entry in rows 1..k.

    Returns 0 when all rational columns are zero there.
    """
    for j in range(min(n1, h.n), 0, -1):
        if any(h.rows[i][j - 1] for i in range(min(k, h.m))):
            return j
    return 0


def ipiv(k: int, h: Matrix, n1: int) -> int:
    """Largest 1-based integer column with a non-zero entry in rows 1..k.

    Returns n1 when all integer columns are zero there.
    """
    for j in range(h.n, n1, -1):
        if any(h.rows[i][j - 1] for i in range(min(k, h.m))):
            return j
    return n1


def abstract_to_int(h: Matrix, v: Matrix, p_row: int, p_col: int, n1: int):
    """Sign-normalize columns right of the pivot and scale to integers.

    Negates every column i >= p_col whose entry in the pivot row is
    negative (in both h and v), computes the lcm c of the denominators of
    the pivot row's integer-block entries, and returns (c, s) where s maps
    column index to the positive integer image entry * c.
    """
    row = h.rows[p_row]
    for j in range(p_col, h.n):
        if row[j] < 0:
            h.col_negate(j)
            v.col_negate(j)
    c = math.lcm(*(row[j].denominator for j in range(n1, h.n))) if h.n > n1 else 1
    s = {j: int(row[j] * c) for j in range(p_col, h.n) if row[j] > 0}
    return c, s


def reduce_left_int(h: Matrix, v: Matrix, p_row: int, p_col: int, n1: int) -> None:
    """Euclidean column reduction of the pivot row right of p_col.

    Runs gcd elimination over the scaled entries until a single non-zero
    entry remains, then swaps that gcd column into position p_col.  Only
    columns >= p_col are touched.
    """
    _, s = abstract_to_int(h, v, p_row, p_col, n1)
    if not s:
        raise GapPreconditionError("no non-zero entries right of the pivot position")
    while len(s) > 1:
        i0 = min(s, key=lambda j: (s[j], j))
        base = s[i0]
        for j in sorted(s):
            if j == i0:
                continue
            q = s[j] // base
            if q:
                h.col_addmul(j, i0, Fraction(-q))
                v.col_addmul(j, i0, Fraction(-q))
            s[j] -= q * base
            if not s[j]:
                del s[j]
    gcd_col = next(iter(s))
    h.col_swap(p_col, gcd_col)
    v.col_swap(p_col, gcd_col)


def reduce_right_int(h: Matrix, v: Matrix, p_row: int, p_col: int, n1: int) -> None:
    """Reduce the pivot row's earlier integer entries into [0, pivot).

    Subtracts floor(entry / pivot) times the pivot column from each
    integer column left of it, working on the lcm-scaled integer images
    exactly as the incremental algorithm specifies.
    """
    row = h.rows[p_row]
    pivot = row[p_col]
    if pivot <= 0:
        raise GapPreconditionError("pivot must be positive before right reduction")
    c = math.lcm(*(row[j].denominator for j in range(n1, h.n)))
    spp = pivot * c
    for j in range(n1, p_col):
        q = (row[j] * c) // spp
        if q:
            h.col_addmul(j, p_col, Fraction(-q))
            v.col_addmul(j, p_col, Fraction(-q))


@dataclass(frozen=True)
class ExtensionRecord:
    kind: str        # "rat", "int" or "append"
    position: int    # row index the inequality landed on
    columns: tuple[int, ...]  # pivot columns the step touched


class MehState:
    """Incrementally maintained MEHNF of a growing inequality stack."""

    def __init__(self, n1: int, n2: int, bit_limit: int = 4096, validate: bool = False):
        self.n1 = n1
        self.n2 = n2
        self.h = Matrix.zeros(0, n1 + n2)
        self.u: list[Fraction] = []
        self.v = Matrix.identity(n1 + n2)
        self.inserted: list[tuple[tuple[Fraction, ...], Fraction]] = []
        self.row_order: list[int] = []
        self.history: list[ExtensionRecord] = []
        self.bit_limit = bit_limit
        self.validate = validate
        self._rebuilt_at = 0

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def rank_rational(self) -> int:
        return rpiv(self.h.m, self.h, self.n1)

    @property
    def rank_integer(self) -> int:
        return ipiv(self.h.m, self.h, self.n1) - self.n1

    def transform(self) -> TransformMatrix:
        return TransformMatrix(self.v.copy(), self.n1, self.n2)

    # -- extension ---------------------------------------------------------

    def extend(self, a: Sequence, b) -> "MehState":
        """Add the inequality a . x <= b and restore the normal form."""
        a = tuple(frac(x) for x in a)
        b = frac(b)
        if len(a) != self.n:
            raise DimensionMismatchError("row width does not match the state")
        hrow = [
            sum((a[k] * self.v.rows[k][j] for k in range(self.n) if a[k]), _ZERO)
            for j in range(self.n)
        ]
        r = self.rank_rational
        q = self.rank_integer
        hvec = Matrix([hrow])
        j_rat = rpiv(1, hvec, self.n1)
        if j_rat > r:
            record = self._extend_rat(hrow, b, j_rat)
        else:
            j_int = ipiv(1, hvec, self.n1)
            if j_int > self.n1 + q:
                record = self._extend_int(hrow, b)
            else:
                pos = self.h.m
                self.h.insert_row(pos, hrow)
                self.u.insert(pos, b)
                self.row_order.insert(pos, len(self.inserted))
                record = ExtensionRecord("append", pos, ())
        self.inserted.append((a, b))
        self.history.append(record)
        if self._oversized():
            self._rebuild()
        if self.validate:
            self.check_invariants()
        return self

    def _extend_rat(self, hrow, b, j_rat: int) -> ExtensionRecord:
        r = self.rank_rational
        pos = r
        self.h.insert_row(pos, hrow)
        self.u.insert(pos, b)
        self.row_order.insert(pos, len(self.inserted))
        p = r  # 0-based pivot column for the new identity row
        if j_rat - 1 != p:
            self.h.col_swap(p, j_rat - 1)
            self.v.col_swap(p, j_rat - 1)
        row = self.h.rows[pos]
        pivot = row[p]
        if pivot != 1:
            inv = 1 / pivot
            self.h.col_scale(p, inv)
            self.v.col_scale(p, inv)
        for j in range(self.n):
            if j != p and row[j]:
                f = -row[j]
                self.h.col_addmul(j, p, f)
                self.v.col_addmul(j, p, f)
        return ExtensionRecord("rat", pos, (p,))

    def _extend_int(self, hrow, b) -> ExtensionRecord:
        r = self.rank_rational
        q = self.rank_integer
        p_col = self.n1 + q
        # The new pivot row must sit below every current pivot row.
        pos = r
        for col in range(self.n1, self.n1 + q):
            for i in range(self.h.m):
                if self.h.rows[i][col]:
                    pos = max(pos, i + 1)
                    break
        self.h.insert_row(pos, hrow)
        self.u.insert(pos, b)
        self.row_order.insert(pos, len(self.inserted))
        reduce_left_int(self.h, self.v, pos, p_col, self.n1)
        reduce_right_int(self.h, self.v, pos, p_col, self.n1)
        return ExtensionRecord("int", pos, (p_col,))

    # -- backtracking --------------------------------------------------------

    def backtrack(self) -> "MehState":
        """Remove the most recently inserted inequality.

        Rows added since the last rebuild can be removed in place without
        touching V; older rows were reordered by the rebuild, so removing
        one triggers another rebuild from the surviving stack.
        """
        if not self.history:
            raise IndexError("backtrack on an empty extension history")
        idx = len(self.inserted) - 1
        self.history.pop()
        self.inserted.pop()
        if idx >= self._rebuilt_at:
            pos = self.row_order.index(idx)
            self.h.remove_row(pos)
            self.u.pop(pos)
            self.row_order.pop(pos)
        else:
            self._rebuild()
        if self.validate:
            self.check_invariants()
        return self

    # -- maintenance -----------------------------------------------------------

    def _oversized(self) -> bool:
        limit = self.bit_limit
        for row in self.v.rows:
            for x in row:
                if x.numerator.bit_length() > limit or x.denominator.bit_length() > limit:
                    return True
        return False

    def _rebuild(self) -> None:
        d = Matrix([list(a) for a, _ in self.inserted]) if self.inserted \
            else Matrix.zeros(0, self.n)
        h, v, perm = batch_mehnf(d, self.n1)
        self.h = h
        self.v = v.matrix
        self.row_order = list(perm)
        self.u = [self.inserted[i][1] for i in perm]
        self._rebuilt_at = len(self.inserted)

    def check_invariants(self) -> None:
        """Assert the quiescent-state invariants (used by tests)."""
        assert is_mehnf(self.h, self.n1, self.rank_rational), "H lost the MEHNF shape"
        assert is_mctm(self.v, self.n1, self.n2), "V lost the MCTM shape"
        stacked = Matrix([list(self.inserted[i][0]) for i in self.row_order]) \
            if self.row_order else Matrix.zeros(0, self.n)
        assert stacked * self.v == self.h, "H != C V replay check failed"
        assert [self.inserted[i][1] for i in self.row_order] == self.u, \
            "bounds out of sync with rows"


def extend_meh(state: MehState, a: Sequence, b) -> MehState:
    return state.extend(a, b)


def extend_rat(state: MehState, h: Sequence, b, j: int) -> MehState:
    """Insert a transformed row that fills the rational gap column j (1-based).

    ``h`` is the row already multiplied by the state's V; the matching
    untransformed row is recorded so the replay invariant H = C V stays
    checkable.
    """
    h = [frac(x) for x in h]
    if not (1 <= j <= state.n1) or not h[j - 1]:
        raise GapPreconditionError("extend_rat needs a non-zero rational entry at j")
    if any(state.h.rows[i][j - 1] for i in range(state.h.m)):
        raise GapPreconditionError(f"column {j} is not a gap")
    original = tuple(_untransform(state, h))
    record = state._extend_rat(h, frac(b), j)
    state.inserted.append((original, frac(b)))
    state.history.append(record)
    if state.validate:
        state.check_invariants()
    return state


def extend_int(state: MehState, h: Sequence, b, j: int) -> MehState:
    """Insert a transformed row that fills the integer gap column j (1-based)."""
    h = [frac(x) for x in h]
    if not (state.n1 < j <= state.n) or not h[j - 1]:
        raise GapPreconditionError("extend_int needs a non-zero integer entry at j")
    if any(state.h.rows[i][j - 1] for i in range(state.h.m)):
        raise GapPreconditionError(f"column {j} is not a gap")
    if rpiv(1, Matrix([h]), state.n1) > state.rank_rational:
        raise GapPreconditionError("row fills a rational gap; extend_rat applies first")
    original = tuple(_untransform(state, h))
    record = state._extend_int(h, frac(b))
    state.inserted.append((original, frac(b)))
    state.history.append(record)
    if state.validate:
        state.check_invariants()
    return state


def _untransform(state: MehState, h: Sequence) -> list:
    vinv = state.v.invert()
    return [
        sum((h[k] * vinv.rows[k][j] for k in range(state.n) if h[k]), Fraction(0))
        for j in range(state.n)
    ]


def backtrack(state: MehState) -> MehState:
    return state.backtrack()


def batch_mehnf(d: Matrix, n1: int) -> tuple[Matrix, TransformMatrix, tuple[int, ...]]:
    """Construct the MEHNF of d after a suitable row permutation.

    Returns (h, v, row_perm) with h = P d V where P reorders the rows so
    that the rows spanning the rational block's row space come first
    (row_perm[i] is the input row at output position i), h satisfies
    is_mehnf, and v is a mixed column transformation matrix.
    """
    m, n = d.m, d.n
    n2 = n - n1
    if m == 0:
        return Matrix.zeros(0, n), TransformMatrix(Matrix.identity(n), n1, n2), ()
    left = Matrix([row[:n1] for row in d.rows])
    _, v11, pivot_rows = column_reduce(left)
    r = len(pivot_rows)
    chosen = set(pivot_rows)
    row_perm = tuple(pivot_rows + [i for i in range(m) if i not in chosen])
    dp = Matrix([d.rows[i] for i in row_perm])

    v2 = Matrix.identity(n)
    for i in range(n1):
        for j in range(n1):
            v2.rows[i][j] = v11.rows[i][j]
    h2 = dp * v2

    # Clear the coupling block: integer columns minus rational columns
    # times the top-right block of the permuted input.
    v3 = Matrix.identity(n)
    for k in range(r):
        for j in range(n2):
            v3.rows[k][n1 + j] = -dp.rows[k][n1 + j]
    h3 = h2 * v3

    residual = Matrix([h3.rows[i][n1:] for i in range(r, m)]) if m > r and n2 > 0 \
        else Matrix.zeros(m - r, n2)
    _, v22 = hermite_normal_form(residual)
    v4 = Matrix.identity(n)
    for i in range(n2):
        for j in range(n2):
            v4.rows[n1 + i][n1 + j] = v22.rows[i][j]

    v = v2 * v3 * v4
    h = h3 * v4
    if __debug__:
        assert is_mehnf(h, n1, r), "batch construction lost the MEHNF shape"
        assert h == dp * v, "batch construction H != P D V"
    return h, TransformMatrix(v, n1, n2), row_perm
