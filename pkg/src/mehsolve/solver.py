"""Branch-and-bound pipeline over the boundedness-driven transformations.

``solve`` normalizes, checks rational feasibility, classifies, and then
dispatches: bounded systems go straight to branch-and-bound, absolutely
unbounded systems to the unit cube test, and partially unbounded systems
through the split / Mixed-Echelon-Hermite route, whose results are mapped
back to the original system (``mixed_extension`` for models,
``convert_certificate`` for refutations).

Unsatisfiability of a mixed system that is rationally feasible cannot be
witnessed by a single Farkas certificate; branch-and-bound therefore
returns a *branch refutation*: a binary tree of integer-valid cuts whose
leaves carry Farkas certificates over the system plus the cuts on the
path.  ``check_refutation`` verifies such trees independently.  Every Sat
result is re-checked with ``check_model`` and every Unsat result with
``check_certificate``/``check_refutation`` against the original system
before it is returned, in all build modes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .analysis import SplitSystem, Verdict, classify, split
from .linalg import Matrix, TransformMatrix, is_lower_triangular_with_gaps, piv
from .mehnf import batch_mehnf
from .model import (
    Budget,
    ConstraintSystem,
    FarkasCertificate,
    Model,
    RowTag,
    Sat,
    SolveResult,
    SolveStats,
    TriviallyUnsat,
    Unsat,
    VarInfo,
    check_certificate,
    check_model,
    normalize,
)
from .simplex import Infeasible, check_feasible, instance_for

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)


class InternalSoundnessError(RuntimeError):
    """A result failed the final re-verification; indicates a solver bug."""


class StructureViolationError(ValueError):
    pass


@dataclass
class SolveOptions:
    transforms_enabled: bool = True
    branch_limit: int = 10**6
    depth_limit: int = 10**5
    time_budget: float = 60.0
    branch_rule: str = "most-fractional"  # or "first-fractional"

    def __post_init__(self):
        if self.branch_limit <= 0 or self.depth_limit <= 0 or self.time_budget <= 0:
            raise ValueError("limits must be positive")
        if self.branch_rule not in ("most-fractional", "first-fractional"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")


@dataclass
class VarBounds:
    """Optional per-column rational bounds, keyed by internal column."""

    lower: dict[int, Fraction] = field(default_factory=dict)
    upper: dict[int, Fraction] = field(default_factory=dict)

    def consistent(self) -> bool:
        return all(
            self.lower[j] <= self.upper[j]
            for j in self.lower
            if j in self.upper
        )

    def box_size(self) -> Optional[int]:
        """Number of integer grid points of the box, None when infinite."""
        size = 1
        for j in set(self.lower) | set(self.upper):
            if j not in self.lower or j not in self.upper:
                return None
            width = math.floor(self.upper[j]) - math.ceil(self.lower[j]) + 1
            size *= max(width, 0)
        return size


# -- branch refutations ----------------------------------------------------


@dataclass(frozen=True)
class Cut:
    """An integer-valid split: coeffs . x <= value or coeffs . x >= value+1.

    The coefficient vector must vanish on rational columns and be integral
    on integer columns, so its value is an integer at every mixed point.
    """

    coeffs: tuple[Fraction, ...]
    value: int


@dataclass
class RefutationLeaf:
    """Farkas multipliers over the system's rows and the cuts on the path."""

    row_mults: dict[int, Fraction]
    cut_mults: dict[int, Fraction]  # path depth -> multiplier on the active side


@dataclass
class RefutationNode:
    cut: Cut
    low: "RefutationNode | RefutationLeaf"
    high: "RefutationNode | RefutationLeaf"


BranchRefutation = RefutationNode


def _valid_cut(sys: ConstraintSystem, cut: Cut) -> bool:
    if len(cut.coeffs) != sys.n or not any(cut.coeffs):
        return False
    if any(cut.coeffs[j] for j in range(sys.n1)):
        return False
    return all(cut.coeffs[j].denominator == 1 for j in range(sys.n1, sys.n))


def check_refutation(sys: ConstraintSystem, refutation) -> bool:
    """Verify a branch refutation tree against the system.

    Each inner node must carry an integer-valid cut and each leaf a Farkas
    certificate of the system extended by the active sides of the cuts on
    its path.  A valid tree proves the system has no mixed solution.
    """
    if isinstance(refutation, RefutationLeaf):
        return not refutation.cut_mults and _check_leaf(sys, refutation, [])
    work = [("visit", refutation)]
    path: list[tuple[Cut, str]] = []
    while work:
        action, payload = work.pop()
        if action == "leave":
            path.pop()
        elif action == "switch":
            path[-1] = (payload, "high")
        else:
            node = payload
            if isinstance(node, RefutationLeaf):
                if not _check_leaf(sys, node, path):
                    return False
                continue
            if not _valid_cut(sys, node.cut):
                return False
            path.append((node.cut, "low"))
            work.append(("leave", None))
            work.append(("visit", node.high))
            work.append(("switch", node.cut))
            work.append(("visit", node.low))
    return True


def _map_tree(root, leaf_fn, cut_fn):
    """Rebuild a refutation tree bottom-up without recursion."""
    if isinstance(root, RefutationLeaf):
        return leaf_fn(root)
    done: list = []
    work = [(root, False)]
    while work:
        node, expanded = work.pop()
        if isinstance(node, RefutationLeaf):
            done.append(leaf_fn(node))
        elif not expanded:
            work.append((node, True))
            work.append((node.high, False))
            work.append((node.low, False))
        else:
            high = done.pop()
            low = done.pop()
            done.append(RefutationNode(cut_fn(node.cut), low, high))
    return done[0]


def _check_leaf(sys: ConstraintSystem, leaf: RefutationLeaf,
                path: list[tuple]) -> bool:
    if any(d not in range(len(path)) for d in leaf.cut_mults):
        return False
    rows = [list(r) for r in sys.matrix.rows]
    bounds = list(sys.bounds)
    for cut, side in path:
        if side == "low":
            rows.append(list(cut.coeffs))
            bounds.append(Fraction(cut.value))
        else:
            rows.append([-c for c in cut.coeffs])
            bounds.append(Fraction(-(cut.value + 1)))
    extended = ConstraintSystem(Matrix(rows), bounds, sys.variables, sys.user_perm)
    y = [_ZERO] * extended.m
    for i, mult in leaf.row_mults.items():
        if not 0 <= i < sys.m:
            return False
        y[i] += mult
    for d, mult in leaf.cut_mults.items():
        y[sys.m + d] += mult
    return check_certificate(extended, FarkasCertificate(y))


# -- bound propagation -------------------------------------------------------


def propagate_bounds(h: Matrix, lower: Sequence, upper: Sequence) -> VarBounds:
    """Finite bounds for every non-gap column of a double-bounded system.

    Requires h lower triangular with gaps.  Pivot rows are processed in
    pivot order; in each one the pivot variable is isolated and bounded by
    interval arithmetic over the already-bounded earlier columns.  Gap
    columns receive no bounds.
    """
    if not is_lower_triangular_with_gaps(h):
        raise StructureViolationError("matrix is not lower triangular with gaps")
    if len(lower) != h.m or len(upper) != h.m:
        raise StructureViolationError("bound vectors do not match the row count")
    lower = [Fraction(x) for x in lower]
    upper = [Fraction(x) for x in upper]
    out = VarBounds()
    columns = sorted(
        (j for j in range(1, h.n + 1) if piv(h, j) <= h.m),
        key=lambda j: piv(h, j),
    )
    for j1 in columns:
        j = j1 - 1
        p = piv(h, j1) - 1
        row = h.rows[p]
        lo_sum = hi_sum = _ZERO
        for k, c in enumerate(row):
            if k == j or not c:
                continue
            if c > 0:
                lo_sum += c * out.lower[k]
                hi_sum += c * out.upper[k]
            else:
                lo_sum += c * out.upper[k]
                hi_sum += c * out.lower[k]
        cj = row[j]
        if cj > 0:
            out.lower[j] = (lower[p] - hi_sum) / cj
            out.upper[j] = (upper[p] - lo_sum) / cj
        else:
            out.lower[j] = (upper[p] - lo_sum) / cj
            out.upper[j] = (lower[p] - hi_sum) / cj
    return out


# -- branch and bound ---------------------------------------------------------


def _pick_branch_var(sys: ConstraintSystem, beta, rule: str) -> Optional[int]:
    best = None
    best_score = None
    for j in sys.integer_columns():
        if beta[j].denominator == 1:
            continue
        if rule == "first-fractional":
            return j
        f = beta[j] - math.floor(beta[j])
        score = min(f, 1 - f)
        if best_score is None or score > best_score:
            best, best_score = j, score
    return best


def branch_and_bound(
    sys: ConstraintSystem,
    extra: Optional[VarBounds] = None,
    options: Optional[SolveOptions] = None,
    stats: Optional[SolveStats] = None,
    deadline: Optional[float] = None,
) -> SolveResult:
    """Depth-first branch-and-bound over the rows of sys.

    ``extra`` bounds are folded in as additional rows (they count as part
    of the constraint set: models must satisfy them and certificates may
    use them).  Returns Sat with a mixed model, Unsat with either a plain
    Farkas certificate or a branch refutation over the extended system, or
    Budget when a limit from ``options`` was hit.
    """
    opts = options or SolveOptions()
    stats = stats if stats is not None else SolveStats()
    if deadline is None:
        deadline = time.monotonic() + opts.time_budget
    if extra is not None:
        rows = [list(r) for r in sys.matrix.rows]
        bounds = list(sys.bounds)
        tags = list(sys.row_tags)
        for j in sorted(extra.upper):
            row = [_ZERO] * sys.n
            row[j] = _ONE
            rows.append(row)
            bounds.append(extra.upper[j])
            tags.append(RowTag(source="extra-bound"))
        for j in sorted(extra.lower):
            row = [_ZERO] * sys.n
            row[j] = -_ONE
            rows.append(row)
            bounds.append(-extra.lower[j])
            tags.append(RowTag(source="extra-bound"))
        sys = ConstraintSystem(Matrix(rows), bounds, sys.variables, sys.user_perm, tags)

    inst = instance_for(sys)
    work = [("explore", None)]
    results: list = []
    path: list[tuple[int, int]] = []
    while work:
        action, payload = work.pop()
        if action == "push-lo":
            j, f, d = payload
            inst.push_bound(j, "up", Fraction(f), "branch", d)
            continue
        if action == "push-hi":
            j, f, d = payload
            inst.push_bound(j, "lo", Fraction(f + 1), "branch", d)
            continue
        if action == "pop":
            inst.pop_row()
            continue
        if action == "combine":
            high = results.pop()
            low = results.pop()
            var, f = path.pop()
            coeffs = [_ZERO] * sys.n
            coeffs[var] = _ONE
            results.append(RefutationNode(Cut(tuple(coeffs), f), low, high))
            continue
        # explore
        stats.nodes += 1
        if stats.nodes > opts.branch_limit:
            stats.budget_reason = "branch-limit"
            stats.lp_pivots += inst.pivots
            return Budget(stats)
        if len(path) > opts.depth_limit:
            stats.budget_reason = "depth-limit"
            stats.lp_pivots += inst.pivots
            return Budget(stats)
        if time.monotonic() > deadline:
            stats.budget_reason = "time-budget"
            stats.lp_pivots += inst.pivots
            return Budget(stats)
        conflict = inst.check()
        if conflict is not None:
            row_mults: dict[int, Fraction] = {}
            cut_mults: dict[int, Fraction] = {}
            for src, mult in conflict:
                if src.kind == "row":
                    row_mults[src.index] = row_mults.get(src.index, _ZERO) + mult / src.scale
                else:
                    cut_mults[src.index] = cut_mults.get(src.index, _ZERO) + mult
            results.append(RefutationLeaf(row_mults, cut_mults))
            continue
        beta = inst.assignment()
        var = _pick_branch_var(sys, beta, opts.branch_rule)
        if var is None:
            stats.lp_pivots += inst.pivots
            model = Model(list(beta))
            if not check_model(sys, model):
                raise InternalSoundnessError("branch-and-bound model failed verification")
            return Sat(model, stats)
        f = math.floor(beta[var])
        d = len(path)
        path.append((var, f))
        work.append(("combine", None))
        work.append(("pop", None))
        work.append(("explore", None))
        work.append(("push-hi", (var, f, d)))
        work.append(("pop", None))
        work.append(("explore", None))
        work.append(("push-lo", (var, f, d)))

    stats.lp_pivots += inst.pivots
    assert len(results) == 1, "branch tree bookkeeping failed"
    refutation = results[0]
    if isinstance(refutation, RefutationLeaf) and not refutation.cut_mults:
        cert = FarkasCertificate(
            [refutation.row_mults.get(i, _ZERO) for i in range(sys.m)])
        if not check_certificate(sys, cert):
            raise InternalSoundnessError("root certificate failed verification")
        return Unsat(cert, stats)
    if not check_refutation(sys, refutation):
        raise InternalSoundnessError("branch refutation failed verification")
    return Unsat(refutation, stats)


# -- unit cube test -----------------------------------------------------------


def unit_cube_test(sys: ConstraintSystem) -> Optional[Model]:
    """Mixed solution via the half-open unit cube, or None.

    Tightens every bound by half the 1-norm of the row's integer-column
    coefficients, solves the widened rational system, and rounds the
    integer coordinates of the center to the nearest integer (ties toward
    minus infinity).  A successful round always verifies; systems in which
    every direction is unbounded always succeed.
    """
    widened_bounds = []
    for i in range(sys.m):
        slack = sum(
            (abs(sys.matrix.rows[i][j]) for j in sys.integer_columns()), _ZERO)
        widened_bounds.append(sys.bounds[i] - slack * _HALF)
    widened = ConstraintSystem(
        sys.matrix, widened_bounds, sys.variables, sys.user_perm, sys.row_tags)
    res = check_feasible(widened)
    if isinstance(res, Infeasible):
        return None
    values = list(res.point)
    for j in sys.integer_columns():
        values[j] = Fraction(math.ceil(values[j] - _HALF))
    model = Model(values)
    if not check_model(sys, model):
        return None
    return model


# -- mixed extension -----------------------------------------------------------


def mixed_extension(
    sp: SplitSystem,
    v: TransformMatrix,
    h: Matrix,
    t: Model,
) -> Model:
    """Extend a model of the transformed bounded part to the full system.

    Columns with non-zero entries in h are fixed by t; the unbounded part
    is rewritten over the remaining (gap) columns and solved with the unit
    cube test, which cannot fail there because every direction of the
    residual system is unbounded.  Returns V t' in original coordinates.
    """
    n = v.n
    fixed = [j for j in range(n) if any(row[j] for row in h.rows)]
    free = [j for j in range(n) if j not in set(fixed)]
    unb = sp.unbounded
    tprime = list(t.values)
    if unb.m and free:
        av = unb.matrix * v.matrix
        rows = []
        bounds = []
        for i in range(unb.m):
            rhs = unb.bounds[i] - sum(
                (av.rows[i][j] * t.values[j] for j in fixed), _ZERO)
            row = [av.rows[i][j] for j in free]
            if any(row):
                rows.append(row)
                bounds.append(rhs)
            elif rhs < 0:
                raise InternalSoundnessError(
                    "residual system contradicts persistence of unboundedness")
        variables = [
            VarInfo(f"u{j}", sp.bounded.variables[j].kind) for j in free]
        residual = ConstraintSystem(
            Matrix(rows) if rows else Matrix.zeros(0, len(free)),
            bounds, variables)
        sub = unit_cube_test(residual)
        if sub is None:
            raise InternalSoundnessError("residual unit cube test failed")
        for pos, j in enumerate(free):
            tprime[j] = sub.values[pos]
    elif unb.m and not free:
        # No gap columns: t already fixes everything; the unbounded rows
        # must hold by the split guarantees (verified by the caller).
        pass
    return Model(v.apply(tprime))


# -- certificate conversion -----------------------------------------------------


def convert_certificate(
    sp: SplitSystem,
    row_perm: Sequence[int],
    v: TransformMatrix,
    certificate,
    target: ConstraintSystem,
):
    """Map a refutation of the transformed double-bounded system back.

    Multipliers on upper rows map straight onto the original rows; ones on
    implied lower-bound rows are expanded through the dual multipliers
    recorded when the split computed the explicit lower bounds; branch cuts
    on transformed variables become cuts on the original variables through
    the inverse transformation.  The result is re-verified against the
    target system.
    """
    m2 = sp.bounded.m
    vinv = v.inverse()

    def convert_row_mults(row_mults: dict[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}

        def add(orig: int, mult: Fraction):
            if mult:
                out[orig] = out.get(orig, _ZERO) + mult

        for ti, mult in row_mults.items():
            if not mult:
                continue
            if ti < m2:
                add(sp.bounded_origin[row_perm[ti]], mult)
            else:
                bi = row_perm[ti - m2]
                for k, w in enumerate(sp.lower_duals[bi]):
                    if w:
                        add(sp.bounded_origin[k], mult * w)
        return out

    def convert_cut(cut: Cut) -> Cut:
        j = next(i for i, c in enumerate(cut.coeffs) if c)
        assert cut.coeffs[j] == 1 and sum(1 for c in cut.coeffs if c) == 1
        return Cut(tuple(vinv.matrix.rows[j]), cut.value)

    def convert_leaf(leaf: RefutationLeaf) -> RefutationLeaf:
        return RefutationLeaf(convert_row_mults(leaf.row_mults),
                              dict(leaf.cut_mults))

    if isinstance(certificate, FarkasCertificate):
        mults = convert_row_mults(
            {i: m for i, m in enumerate(certificate.multiplier_vector(2 * m2))})
        out = FarkasCertificate([mults.get(i, _ZERO) for i in range(target.m)])
        if not check_certificate(target, out):
            raise InternalSoundnessError("converted certificate failed verification")
        return out
    converted = _map_tree(certificate, convert_leaf, convert_cut)
    if isinstance(converted, RefutationLeaf):
        out = FarkasCertificate(
            [converted.row_mults.get(i, _ZERO) for i in range(target.m)])
        if not check_certificate(target, out):
            raise InternalSoundnessError("converted certificate failed verification")
        return out
    if not check_refutation(target, converted):
        raise InternalSoundnessError("converted refutation failed verification")
    return converted


# -- the full pipeline -------------------------------------------------------


def solve(sys: ConstraintSystem, options: Optional[SolveOptions] = None) -> SolveResult:
    """Decide mixed satisfiability of the system.

    Pipeline: normalize, rational feasibility, classification, then either
    direct branch-and-bound (bounded), the unit cube test (absolutely
    unbounded), or split + Mixed-Echelon-Hermite + branch-and-bound with
    model/certificate conversion (partially unbounded).  With transforms
    disabled, branch-and-bound runs on the raw system under the option
    limits and may return Budget.
    """
    opts = options or SolveOptions()
    stats = SolveStats()
    started = time.monotonic()
    deadline = started + opts.time_budget
    try:
        return _solve_inner(sys, opts, stats, deadline)
    finally:
        stats.total_seconds = time.monotonic() - started


def _solve_inner(sys, opts, stats, deadline) -> SolveResult:
    norm = normalize(sys)
    if isinstance(norm, TriviallyUnsat):
        return _finalize_unsat(sys, norm.certificate, None, stats)

    feas = check_feasible(norm)
    if isinstance(feas, Infeasible):
        return _finalize_unsat(sys, feas.certificate, norm, stats)

    if not opts.transforms_enabled:
        res = branch_and_bound(norm, None, opts, stats, deadline)
        return _finalize(sys, norm, res, stats)

    cls = classify(norm)
    stats.classification = cls.verdict.value

    if cls.verdict is Verdict.BOUNDED:
        res = branch_and_bound(norm, None, opts, stats, deadline)
        return _finalize(sys, norm, res, stats)

    if cls.verdict is Verdict.ABSOLUTELY_UNBOUNDED:
        model = unit_cube_test(norm)
        if model is None:
            raise InternalSoundnessError(
                "unit cube test failed on an absolutely unbounded system")
        return _finalize(sys, norm, Sat(model, stats), stats)

    # Partially unbounded: reduce to the double-bounded part and transform.
    sp = split(norm, cls)
    t0 = time.monotonic()
    h, v, row_perm = batch_mehnf(sp.bounded.matrix, norm.n1)
    upper = [sp.bounded.bounds[i] for i in row_perm]
    lower = [sp.lower[i] for i in row_perm]
    box = propagate_bounds(h, lower, upper)
    stats.transform_seconds = time.monotonic() - t0
    if __debug__:
        nonzero = {j for j in range(h.n) if any(r[j] for r in h.rows)}
        assert all(j in box.lower and j in box.upper for j in nonzero), \
            "propagation left a non-gap column unbounded"

    tsys = transformed_system(norm, h, lower, upper)
    res = branch_and_bound(tsys, None, opts, stats, deadline)
    if isinstance(res, Budget):
        return res
    if isinstance(res, Sat):
        model = mixed_extension(sp, v, h, res.model)
        return _finalize(sys, norm, Sat(model, stats), stats)
    cert = convert_certificate(sp, row_perm, v, res.certificate, norm)
    return _finalize(sys, norm, Unsat(cert, stats), stats)


def transformed_system(norm: ConstraintSystem, h: Matrix, lower, upper) -> ConstraintSystem:
    rows = [list(r) for r in h.rows]
    bounds = list(upper)
    for i, r in enumerate(h.rows):
        rows.append([-c for c in r])
        bounds.append(-lower[i])
    variables = [VarInfo(f"y{j}", var.kind) for j, var in enumerate(norm.variables)]
    return ConstraintSystem(Matrix(rows), bounds, variables)


def _remap_rows(cert, source: ConstraintSystem, target_m: int):
    """Reindex a certificate from a row-subset system to its parent."""
    origin = [tag.origin for tag in source.row_tags]
    if isinstance(cert, FarkasCertificate):
        y = [_ZERO] * target_m
        for i, mult in enumerate(cert.multiplier_vector(source.m)):
            if mult:
                y[origin[i]] += mult
        return FarkasCertificate(y)

    def remap_leaf(leaf: RefutationLeaf) -> RefutationLeaf:
        return RefutationLeaf(
            {origin[i]: mult for i, mult in leaf.row_mults.items() if mult},
            dict(leaf.cut_mults))

    return _map_tree(cert, remap_leaf, lambda cut: cut)


def _finalize(original, norm, res, stats) -> SolveResult:
    if isinstance(res, Budget):
        return res
    if isinstance(res, Sat):
        if not check_model(original, res.model):
            raise InternalSoundnessError("final model failed verification")
        return Sat(res.model, stats)
    return _finalize_unsat(original, res.certificate, norm, stats)


def _finalize_unsat(original, certificate, norm, stats) -> SolveResult:
    if norm is not None and norm is not original:
        certificate = _remap_rows(certificate, norm, original.m)
    if isinstance(certificate, FarkasCertificate):
        if not check_certificate(original, certificate):
            raise InternalSoundnessError("final certificate failed verification")
    else:
        if not check_refutation(original, certificate):
            raise InternalSoundnessError("final refutation failed verification")
    return Unsat(certificate, stats)
