"""Exhaustive test oracle: integer grid enumeration plus rational LPs.

Independent of the branch-and-bound machinery: satisfiability over a
finite integer box is decided by trying every grid point and solving the
remaining rational-variable program exactly.  Completeness relies on the
caller passing a box that is implied by the system (for example, bounds
obtained from per-variable optimization), so it is a test oracle, not a
decision procedure.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Optional

from .linalg import Matrix
from .model import ConstraintSystem, Model
from .simplex import Feasible, check_feasible
from .solver import VarBounds

_ZERO = Fraction(0)


class BoxTooLargeError(ValueError):
    pass


def brute_force_solve(
    sys: ConstraintSystem,
    box: VarBounds,
    limit: int = 100_000,
) -> tuple[bool, Optional[Model]]:
    """Enumerate the integer grid of ``box``; LP over the rational columns.

    Returns (True, model) on the first feasible grid point and
    (False, None) when the grid is exhausted.  Raises BoxTooLargeError
    when the box is missing a bound on some integer column or holds more
    than ``limit`` grid points.
    """
    ranges = []
    for j in sys.integer_columns():
        if j not in box.lower or j not in box.upper:
            raise BoxTooLargeError(f"integer column {j} has no finite box")
        lo = math.ceil(box.lower[j])
        hi = math.floor(box.upper[j])
        ranges.append(range(lo, hi + 1))
    total = 1
    for r in ranges:
        total *= len(r)
        if total > limit:
            raise BoxTooLargeError(f"integer box exceeds {limit} points")

    n1 = sys.n1
    int_cols = list(sys.integer_columns())
    for grid in itertools.product(*ranges):
        rhs = list(sys.bounds)
        for pos, j in enumerate(int_cols):
            if grid[pos]:
                col = sys.matrix.col(j)
                for i in range(sys.m):
                    if col[i]:
                        rhs[i] -= col[i] * grid[pos]
        if n1 == 0:
            if all(r >= 0 for r in rhs):
                return True, Model([Fraction(g) for g in grid])
            continue
        rows = []
        bounds = []
        feasible = True
        for i in range(sys.m):
            head = sys.matrix.rows[i][:n1]
            if any(head):
                rows.append(head)
                bounds.append(rhs[i])
            elif rhs[i] < 0:
                feasible = False
                break
        if not feasible:
            continue
        residual = ConstraintSystem(
            Matrix(rows) if rows else Matrix.zeros(0, n1),
            bounds,
            sys.variables[:n1],
        )
        res = check_feasible(residual)
        if isinstance(res, Feasible):
            values = list(res.point) + [Fraction(g) for g in grid]
            return True, Model(values)
    return False, None
