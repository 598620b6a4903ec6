"""Exact rational simplex with incremental rows and certificate extraction.

The engine follows the bounds-separated design common to SMT theory
solvers: every pushed inequality either tightens a native bound on a
variable (single-variable rows) or introduces a slack variable whose
defining equation joins the tableau and whose upper bound carries the
row's constant.  Feasibility repair pivots with Bland's rule, so every
call terminates; all arithmetic is exact.

Conflicts and optimal duals are reported as lists of ``(BoundSource,
multiplier)`` atoms.  For plain constraint systems the module-level
wrappers ``check_feasible`` and ``optimize`` assemble those atoms into
Farkas certificates over the system's rows and re-verify them with the
independent checker before returning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import ConstraintSystem, FarkasCertificate, check_certificate

_ZERO = Fraction(0)
_ONE = Fraction(1)


class EmptyStackError(IndexError):
    pass


class SimplexInternalError(AssertionError):
    """A result failed its own re-verification; indicates an engine bug."""


@dataclass(frozen=True)
class BoundSource:
    """Where a bound (an atom usable in conflicts) came from.

    ``kind`` is "row" for pushed inequalities and "branch" for bounds a
    branch-and-bound driver adds.  ``scale`` is the positive factor by
    which the originating inequality exceeds the stored unit atom, so a
    multiplier mu on the atom contributes mu / scale to the source row.
    """

    kind: str
    index: int
    scale: Fraction = _ONE


Atom = tuple[BoundSource, Fraction]


@dataclass
class Feasible:
    point: list[Fraction]


@dataclass
class Infeasible:
    certificate: FarkasCertificate


@dataclass
class Optimal:
    """Optimum with an attaining point and dual multipliers.

    For sense "max" the dual y satisfies y >= 0, y^T A = h and
    y^T b = value; for "min" it satisfies y^T A = -h and y^T b = -value.
    Either way it witnesses that the objective cannot pass the optimum.
    """

    value: Fraction
    point: list[Fraction]
    dual: list[Fraction]


@dataclass
class UnboundedDirection:
    """An improving recession direction, normalized to integers with gcd 1."""

    ray: list[Fraction]


OptOutcome = Optimal | UnboundedDirection | Infeasible


class SimplexInstance:
    """Tableau over a fixed set of problem variables plus grown slacks.

    Rows are activated with ``push_row`` and deactivated in LIFO order
    with ``pop_row``; feasibility and optimization answers always reflect
    exactly the active rows.
    """

    def __init__(self, nvars: int):
        self.nvars = nvars
        self._lo: list[Optional[tuple[Fraction, BoundSource]]] = [None] * nvars
        self._up: list[Optional[tuple[Fraction, BoundSource]]] = [None] * nvars
        self._beta: list[Fraction] = [_ZERO] * nvars
        self._tab: dict[int, dict[int, Fraction]] = {}
        self._trail: list[tuple] = []
        self._dead: list[BoundSource] = []
        self.pivots = 0

    # -- stack ---------------------------------------------------------

    def push_row(self, coeffs: Sequence[Fraction], b: Fraction,
                 kind: str = "row", index: int = 0) -> None:
        """Activate the inequality coeffs . x <= b."""
        support = [(j, c) for j, c in enumerate(coeffs) if c]
        if not support:
            if b < 0:
                self._dead.append(BoundSource(kind, index))
                self._trail.append(("dead",))
            else:
                self._trail.append(("noop",))
            return
        if len(support) == 1:
            j, c = support[0]
            if c > 0:
                self._set_bound(j, "up", b / c, BoundSource(kind, index, c))
            else:
                self._set_bound(j, "lo", b / c, BoundSource(kind, index, -c))
            return
        s = self._alloc_slack(dict(support))
        self._up[s] = (b, BoundSource(kind, index))
        self._trail.append(("slack", s))

    def push_bound(self, var: int, side: str, value: Fraction,
                   kind: str, index: int) -> None:
        """Activate var <= value (side "up") or var >= value (side "lo")."""
        self._set_bound(var, side, value, BoundSource(kind, index))

    def pop_row(self) -> None:
        if not self._trail:
            raise EmptyStackError("pop on an empty assertion stack")
        rec = self._trail.pop()
        if rec[0] == "noop":
            return
        if rec[0] == "dead":
            self._dead.pop()
            return
        if rec[0] == "slack":
            # The slack's defining equation stays in the tableau as a free
            # variable; only its bound is retracted.
            self._up[rec[1]] = None
            return
        _, var, side, old = rec
        if side == "up":
            self._up[var] = old
        else:
            self._lo[var] = old

    @property
    def depth(self) -> int:
        return len(self._trail)

    # -- internals -------------------------------------------------------

    def _set_bound(self, var, side, value, src):
        store = self._up if side == "up" else self._lo
        old = store[var]
        self._trail.append(("bound", var, side, old))
        better = old is None or (value < old[0] if side == "up" else value > old[0])
        if better:
            store[var] = (value, src)

    def _alloc_slack(self, coeffs: dict[int, Fraction]) -> int:
        s = len(self._beta)
        self._lo.append(None)
        self._up.append(None)
        expr: dict[int, Fraction] = {}
        val = _ZERO
        for j, a in coeffs.items():
            val += a * self._beta[j]
            if j in self._tab:
                for k, c in self._tab[j].items():
                    acc = expr.get(k, _ZERO) + a * c
                    if acc:
                        expr[k] = acc
                    elif k in expr:
                        del expr[k]
            else:
                acc = expr.get(j, _ZERO) + a
                if acc:
                    expr[j] = acc
                elif j in expr:
                    del expr[j]
        if not expr:
            raise SimplexInternalError("slack for a non-zero row reduced to nothing")
        self._beta.append(val)
        self._tab[s] = expr
        return s

    def _update(self, var: int, value: Fraction) -> None:
        delta = value - self._beta[var]
        if not delta:
            return
        self._beta[var] = value
        for bv, row in self._tab.items():
            c = row.get(var)
            if c:
                self._beta[bv] += c * delta

    def _pivot(self, bv: int, j: int) -> None:
        row = self._tab.pop(bv)
        c = row.pop(j)
        inv = _ONE / c
        new = {bv: inv}
        for k, v in row.items():
            new[k] = -v * inv
        for other, orow in self._tab.items():
            f = orow.pop(j, None)
            if f:
                for k, v in new.items():
                    acc = orow.get(k, _ZERO) + f * v
                    if acc:
                        orow[k] = acc
                    elif k in orow:
                        del orow[k]
        self._tab[j] = new
        self.pivots += 1

    def _pivot_and_update(self, bv: int, j: int, target: Fraction) -> None:
        c = self._tab[bv][j]
        theta = (target - self._beta[bv]) / c
        self._beta[bv] = target
        self._beta[j] += theta
        if theta:
            for other, orow in self._tab.items():
                if other != bv:
                    f = orow.get(j)
                    if f:
                        self._beta[other] += f * theta
        self._pivot(bv, j)

    def _can_increase(self, j: int) -> bool:
        up = self._up[j]
        return up is None or self._beta[j] < up[0]

    def _can_decrease(self, j: int) -> bool:
        lo = self._lo[j]
        return lo is None or self._beta[j] > lo[0]

    # -- feasibility -----------------------------------------------------

    def check(self) -> Optional[list[Atom]]:
        """Repair the assignment; None when feasible, else conflict atoms.

        The conflict is a list of (source, multiplier) pairs whose
        inequality combination is constant and violated.  Bland's rule
        (smallest variable index everywhere) guarantees termination.
        """
        if self._dead:
            return [(self._dead[-1], _ONE)]
        for var in range(len(self._beta)):
            lo, up = self._lo[var], self._up[var]
            if lo is not None and up is not None and lo[0] > up[0]:
                return [(lo[1], _ONE), (up[1], _ONE)]
        # Clamp non-basic variables back into their bounds; pops and bound
        # tightenings may have left them outside.
        for var in range(len(self._beta)):
            if var in self._tab:
                continue
            lo, up = self._lo[var], self._up[var]
            if lo is not None and self._beta[var] < lo[0]:
                self._update(var, lo[0])
            elif up is not None and self._beta[var] > up[0]:
                self._update(var, up[0])
        while True:
            viol = None
            for bv in sorted(self._tab):
                lo, up = self._lo[bv], self._up[bv]
                if lo is not None and self._beta[bv] < lo[0]:
                    viol = (bv, "lo")
                    break
                if up is not None and self._beta[bv] > up[0]:
                    viol = (bv, "up")
                    break
            if viol is None:
                return None
            bv, side = viol
            row = self._tab[bv]
            if side == "lo":
                enter = min(
                    (j for j, c in row.items()
                     if (c > 0 and self._can_increase(j))
                     or (c < 0 and self._can_decrease(j))),
                    default=None)
                if enter is None:
                    atoms = [(self._lo[bv][1], _ONE)]
                    for j, c in row.items():
                        if c > 0:
                            atoms.append((self._up[j][1], c))
                        else:
                            atoms.append((self._lo[j][1], -c))
                    return atoms
                self._pivot_and_update(bv, enter, self._lo[bv][0])
            else:
                enter = min(
                    (j for j, c in row.items()
                     if (c < 0 and self._can_increase(j))
                     or (c > 0 and self._can_decrease(j))),
                    default=None)
                if enter is None:
                    atoms = [(self._up[bv][1], _ONE)]
                    for j, c in row.items():
                        if c > 0:
                            atoms.append((self._lo[j][1], c))
                        else:
                            atoms.append((self._up[j][1], -c))
                    return atoms
                self._pivot_and_update(bv, enter, self._up[bv][0])

    def assignment(self) -> list[Fraction]:
        return self._beta[: self.nvars]

    # -- optimization ------------------------------------------------------

    def optimize_max(self, h: dict[int, Fraction]):
        """Maximize sum(h[j] * x_j) over the active rows.

        Returns ("infeasible", atoms), ("unbounded", ray_over_all_vars) or
        ("optimal", value, dual_atoms).  Must be re-run after stack changes.
        """
        conflict = self.check()
        if conflict is not None:
            return ("infeasible", conflict)
        while True:
            d: dict[int, Fraction] = {}
            for p, hp in h.items():
                if not hp:
                    continue
                if p in self._tab:
                    for k, c in self._tab[p].items():
                        acc = d.get(k, _ZERO) + hp * c
                        if acc:
                            d[k] = acc
                        elif k in d:
                            del d[k]
                else:
                    acc = d.get(p, _ZERO) + hp
                    if acc:
                        d[p] = acc
                    elif p in d:
                        del d[p]
            enter = None
            for j in sorted(d):
                if d[j] > 0 and self._can_increase(j):
                    enter = (j, 1)
                    break
                if d[j] < 0 and self._can_decrease(j):
                    enter = (j, -1)
                    break
            if enter is None:
                value = sum((hp * self._beta[p] for p, hp in h.items()), _ZERO)
                atoms: list[Atom] = []
                for j, dj in d.items():
                    if dj > 0:
                        atoms.append((self._up[j][1], dj))
                    else:
                        atoms.append((self._lo[j][1], -dj))
                return ("optimal", value, atoms)
            j, sgn = enter
            own = None
            if sgn > 0 and self._up[j] is not None:
                own = self._up[j][0] - self._beta[j]
            elif sgn < 0 and self._lo[j] is not None:
                own = self._beta[j] - self._lo[j][0]
            best_t = best_bv = best_target = None
            for bv in sorted(self._tab):
                c = self._tab[bv].get(j)
                if not c:
                    continue
                eff = c * sgn
                if eff > 0 and self._up[bv] is not None:
                    t = (self._up[bv][0] - self._beta[bv]) / eff
                    tgt = self._up[bv][0]
                elif eff < 0 and self._lo[bv] is not None:
                    t = (self._lo[bv][0] - self._beta[bv]) / eff
                    tgt = self._lo[bv][0]
                else:
                    continue
                if best_t is None or t < best_t:
                    best_t, best_bv, best_target = t, bv, tgt
            if own is None and best_t is None:
                ray = {j: Fraction(sgn)}
                for bv, row in self._tab.items():
                    c = row.get(j)
                    if c:
                        ray[bv] = c * sgn
                return ("unbounded", ray)
            if best_t is None or (own is not None and own <= best_t):
                self._update(j, self._beta[j] + sgn * own)
            else:
                self._pivot_and_update(best_bv, j, best_target)


# -- system-level wrappers ------------------------------------------------


def instance_for(sys: ConstraintSystem) -> SimplexInstance:
    inst = SimplexInstance(sys.n)
    for i in range(sys.m):
        inst.push_row(sys.matrix.rows[i], sys.bounds[i], "row", i)
    return inst


def atoms_to_certificate(atoms: list[Atom], m: int) -> FarkasCertificate:
    """Assemble row-sourced conflict atoms into a certificate over m rows."""
    y = [_ZERO] * m
    for src, mult in atoms:
        if src.kind != "row":
            raise SimplexInternalError(f"unexpected atom source {src.kind!r}")
        y[src.index] += mult / src.scale
    return FarkasCertificate(y)


def check_feasible(sys: ConstraintSystem) -> Feasible | Infeasible:
    """Exact rational feasibility of all rows of the system."""
    inst = instance_for(sys)
    conflict = inst.check()
    if conflict is None:
        point = inst.assignment()
        if __debug__:
            assert all(
                lhs <= b for lhs, b in zip(sys.matrix.mul_vec(point), sys.bounds)
            ), "simplex returned an infeasible point"
        return Feasible(point)
    cert = atoms_to_certificate(conflict, sys.m)
    if not check_certificate(sys, cert):
        raise SimplexInternalError("simplex produced an invalid Farkas certificate")
    return Infeasible(cert)


def optimize(sys: ConstraintSystem, h: Sequence[Fraction], sense: str) -> OptOutcome:
    """Optimize h . x over the system; sense is "min" or "max"."""
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    hvec = [Fraction(x) for x in h]
    if len(hvec) != sys.n:
        raise ValueError("objective length does not match variable count")
    if not any(hvec):
        raise ValueError("objective must be non-zero")
    goal = hvec if sense == "max" else [-x for x in hvec]
    inst = instance_for(sys)
    res = inst.optimize_max({j: c for j, c in enumerate(goal) if c})
    if res[0] == "infeasible":
        cert = atoms_to_certificate(res[1], sys.m)
        if not check_certificate(sys, cert):
            raise SimplexInternalError("simplex produced an invalid Farkas certificate")
        return Infeasible(cert)
    if res[0] == "unbounded":
        ray = [_ZERO] * sys.n
        for j, v in res[1].items():
            if j < sys.n:
                ray[j] = v
        ray = _normalize_ray(ray)
        if __debug__:
            moved = sys.matrix.mul_vec(ray)
            assert all(v <= 0 for v in moved), "unbounded ray leaves the recession cone"
            gain = sum(a * b for a, b in zip(goal, ray))
            assert gain > 0, "unbounded ray does not improve the objective"
        return UnboundedDirection(ray)
    _, maxvalue, atoms = res
    value = maxvalue if sense == "max" else -maxvalue
    dual = atoms_to_certificate(atoms, sys.m).multiplier_vector(sys.m)
    point = inst.assignment()
    _verify_dual(sys, goal, maxvalue, dual)
    return Optimal(value, point, dual)


def _verify_dual(sys: ConstraintSystem, goal, maxvalue, dual) -> None:
    combo = [_ZERO] * sys.n
    rhs = _ZERO
    for mult, row, b in zip(dual, sys.matrix.rows, sys.bounds):
        if mult < 0:
            raise SimplexInternalError("negative dual multiplier")
        if mult:
            rhs += mult * b
            for j, a in enumerate(row):
                if a:
                    combo[j] += mult * a
    if combo != goal or rhs != maxvalue:
        raise SimplexInternalError("optimal dual failed re-verification")


def _normalize_ray(ray: list[Fraction]) -> list[Fraction]:
    scale = math.lcm(*(x.denominator for x in ray))
    ints = [int(x * scale) for x in ray]
    g = math.gcd(*(abs(v) for v in ints))
    if g == 0:
        raise SimplexInternalError("zero ray")
    return [Fraction(v, g) for v in ints]
