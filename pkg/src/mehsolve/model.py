"""Constraint systems, models, Farkas certificates and their verifiers.

The verifiers ``check_model`` and ``check_certificate`` share no code with
the simplex engine or the transformation pipeline; they are the trust
anchor every solver result is checked against before it is returned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .linalg import Matrix, TransformMatrix, frac


class DimensionMismatchError(ValueError):
    pass


class MctmViolationError(ValueError):
    pass


class VarKind(enum.Enum):
    RATIONAL = "Real"
    INTEGER = "Int"


@dataclass(frozen=True)
class VarInfo:
    name: str
    kind: VarKind


@dataclass(frozen=True)
class RowTag:
    """Provenance of a row: where it came from and how it relates to input.

    ``origin`` is the row's index in the system it was derived from (kept
    through normalization so certificates can be mapped back).  ``eq_group``
    pairs the two rows produced by expanding an equality.  ``source`` is a
    human-readable label such as a source line.
    """

    origin: Optional[int] = None
    eq_group: Optional[int] = None
    source: str = ""


class ConstraintSystem:
    """A conjunction of non-strict inequalities A x <= b over typed variables.

    Variables are kept in internal column order: all rational variables
    first, integer variables after them.  ``user_perm[k]`` is the internal
    column of the k-th variable in user declaration order, so output can be
    presented the way the input was written.
    """

    def __init__(
        self,
        matrix: Matrix,
        bounds: Sequence,
        variables: Sequence[VarInfo],
        user_perm: Optional[Sequence[int]] = None,
        row_tags: Optional[Sequence[RowTag]] = None,
    ) -> None:
        self.matrix = matrix
        self.bounds = [frac(b) for b in bounds]
        self.variables = list(variables)
        if matrix.n != len(self.variables):
            raise DimensionMismatchError("column count does not match variable count")
        if matrix.m != len(self.bounds):
            raise DimensionMismatchError("row count does not match bound count")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        seen_integer = False
        for v in self.variables:
            if v.kind is VarKind.INTEGER:
                seen_integer = True
            elif seen_integer:
                raise ValueError("variables must be ordered rationals first, then integers")
        self.user_perm = tuple(user_perm) if user_perm is not None else tuple(range(matrix.n))
        if sorted(self.user_perm) != list(range(matrix.n)):
            raise ValueError("user_perm must be a permutation of the columns")
        self.row_tags = (
            list(row_tags)
            if row_tags is not None
            else [RowTag(origin=i) for i in range(matrix.m)]
        )
        if len(self.row_tags) != matrix.m:
            raise DimensionMismatchError("row tag count does not match row count")

    @property
    def m(self) -> int:
        return self.matrix.m

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def n1(self) -> int:
        return sum(1 for v in self.variables if v.kind is VarKind.RATIONAL)

    @property
    def n2(self) -> int:
        return self.n - self.n1

    def integer_columns(self) -> range:
        return range(self.n1, self.n)

    def row(self, i: int) -> list[Fraction]:
        return self.matrix.row(i)

    def subset(self, rows: Sequence[int]) -> "ConstraintSystem":
        """System restricted to the given rows; tags keep the origin index."""
        return ConstraintSystem(
            Matrix([self.matrix.rows[i] for i in rows]) if rows else Matrix.zeros(0, self.n),
            [self.bounds[i] for i in rows],
            self.variables,
            self.user_perm,
            [RowTag(origin=i, eq_group=self.row_tags[i].eq_group,
                    source=self.row_tags[i].source) for i in rows],
        )

    def __repr__(self) -> str:
        return f"ConstraintSystem({self.m} rows, {self.n1}+{self.n2} vars)"


@dataclass
class Model:
    """An assignment to all variables, in internal column order."""

    values: list[Fraction]

    def value_of(self, sys: ConstraintSystem, name: str) -> Fraction:
        for j, v in enumerate(sys.variables):
            if v.name == name:
                return self.values[j]
        raise KeyError(name)


@dataclass
class FarkasCertificate:
    """Non-negative multipliers combining rows into a constant contradiction.

    ``y[k]`` multiplies the row ``row_map[k]`` of the system the certificate
    refers to; by default positions map to rows one to one.
    """

    y: list[Fraction]
    row_map: Optional[list[int]] = None

    def multiplier_vector(self, m: int) -> list[Fraction]:
        """Expand into a dense length-m vector over the target system."""
        if self.row_map is None:
            if len(self.y) != m:
                raise DimensionMismatchError(
                    f"certificate has {len(self.y)} multipliers for {m} rows")
            return list(self.y)
        out = [Fraction(0)] * m
        for mult, idx in zip(self.y, self.row_map):
            if not 0 <= idx < m:
                raise DimensionMismatchError(f"certificate row index {idx} out of range")
            out[idx] += mult
        return out


@dataclass
class SolveStats:
    nodes: int = 0
    lp_pivots: int = 0
    classification: Optional[str] = None
    transform_seconds: float = 0.0
    total_seconds: float = 0.0
    budget_reason: Optional[str] = None


@dataclass
class Sat:
    model: Model
    stats: SolveStats = field(default_factory=SolveStats)


@dataclass
class Unsat:
    # Either a plain Farkas certificate for the original system or, when
    # integer reasoning was required, a branch refutation tree whose leaves
    # carry Farkas certificates (see mehsolve.solver.BranchRefutation).
    certificate: object
    stats: SolveStats = field(default_factory=SolveStats)


@dataclass
class Budget:
    stats: SolveStats = field(default_factory=SolveStats)


SolveResult = Sat | Unsat | Budget


@dataclass
class TriviallyUnsat:
    certificate: FarkasCertificate


def normalize(sys: ConstraintSystem) -> ConstraintSystem | TriviallyUnsat:
    """Drop constant rows, detecting trivially unsatisfiable ones.

    A row 0 <= b_i with b_i >= 0 is a tautology and is removed.  A row
    0 <= b_i with b_i < 0 yields TriviallyUnsat with the unit certificate
    on that row.  Kept rows remember their original index in their tag.
    """
    keep = []
    for i in range(sys.m):
        if any(sys.matrix.rows[i]):
            keep.append(i)
        elif sys.bounds[i] < 0:
            y = [Fraction(0)] * sys.m
            y[i] = Fraction(1)
            return TriviallyUnsat(FarkasCertificate(y))
    if len(keep) == sys.m:
        return sys
    return sys.subset(keep)


def check_model(sys: ConstraintSystem, model: Model) -> bool:
    """Exact check: A s <= b componentwise and integer columns integral."""
    if len(model.values) != sys.n:
        raise DimensionMismatchError(
            f"model has {len(model.values)} values for {sys.n} variables")
    for j in sys.integer_columns():
        if model.values[j].denominator != 1:
            return False
    lhs = sys.matrix.mul_vec(model.values)
    return all(v <= b for v, b in zip(lhs, sys.bounds))


def check_certificate(sys: ConstraintSystem, cert: FarkasCertificate) -> bool:
    """Exact check: y >= 0, y^T A = 0 and y^T b < 0."""
    y = cert.multiplier_vector(sys.m)
    if any(v < 0 for v in y):
        return False
    combo = [Fraction(0)] * sys.n
    rhs = Fraction(0)
    for mult, row, b in zip(y, sys.matrix.rows, sys.bounds):
        if mult:
            rhs += mult * b
            for j, a in enumerate(row):
                if a:
                    combo[j] += mult * a
    return not any(combo) and rhs < 0


def apply_column_transform(sys: ConstraintSystem, v: TransformMatrix) -> ConstraintSystem:
    """Return the system (A V) y <= b over fresh variables of the same types."""
    if v.n1 != sys.n1 or v.n2 != sys.n2:
        raise MctmViolationError(
            f"transform split {v.n1}+{v.n2} does not match system {sys.n1}+{sys.n2}")
    fresh = [VarInfo(f"y{j}", var.kind) for j, var in enumerate(sys.variables)]
    return ConstraintSystem(
        sys.matrix * v.matrix,
        list(sys.bounds),
        fresh,
        None,
        list(sys.row_tags),
    )


def convert_model(v: TransformMatrix, t: Model) -> Model:
    """Map a model of the transformed system back through x = V y."""
    if len(t.values) != v.n:
        raise DimensionMismatchError("model length does not match transform size")
    return Model(v.apply(t.values))


def format_model(sys: ConstraintSystem, model: Model) -> str:
    """One line per variable, ``name = value``, in declaration order."""
    lines = []
    for col in sys.user_perm:
        var = sys.variables[col]
        val = model.values[col]
        txt = str(val.numerator) if val.denominator == 1 else f"{val.numerator}/{val.denominator}"
        lines.append(f"{var.name} = {txt}")
    return "\n".join(lines) + "\n"


def format_certificate(sys: ConstraintSystem, cert: FarkasCertificate) -> str:
    """One line ``row_index multiplier`` per row with a non-zero multiplier."""
    y = cert.multiplier_vector(sys.m)
    lines = []
    for i, mult in enumerate(y):
        if mult:
            txt = str(mult.numerator) if mult.denominator == 1 else f"{mult.numerator}/{mult.denominator}"
            lines.append(f"{i} {txt}")
    return "\n".join(lines) + "\n"
