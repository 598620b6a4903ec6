from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mehsolve.analysis import (
    Classification,
    InfeasibleSystemError,
    Verdict,
    classify,
    is_direction_bounded,
    split,
)
from mehsolve.simplex import Feasible, check_feasible

from helpers import mk_system, systems

BAND = [[3, -3], [-3, 3]]  # 1 <= 3x1 - 3x2 <= 2 when paired with bounds [2, -1]


def band_system(extra_rows=(), extra_bounds=()):
    rows = BAND + list(extra_rows)
    bounds = [2, -1] + list(extra_bounds)
    return mk_system(rows, bounds, "qq")


class TestIsDirectionBounded:
    def test_band_normal_is_bounded(self):
        assert is_direction_bounded(band_system(), [3, -3])

    def test_band_axis_is_unbounded(self):
        assert not is_direction_bounded(band_system(), [1, 0])

    def test_only_normal_directions_bounded(self):
        # Two parallel half-planes with normal (-1, 1) plus one open row:
        # exactly the normal and its negation are bounded.
        sys = mk_system([[-1, 1], [1, -1], [1, 1]], [2, 1, 10], "qq")
        assert is_direction_bounded(sys, [-1, 1])
        assert is_direction_bounded(sys, [1, -1])
        assert not is_direction_bounded(sys, [1, 1])
        assert not is_direction_bounded(sys, [1, 0])

    def test_zero_direction_rejected(self):
        with pytest.raises(ValueError):
            is_direction_bounded(band_system(), [0, 0])

    def test_infeasible_system_rejected(self):
        sys = mk_system([[1], [-1]], [0, -1], "q")
        with pytest.raises(InfeasibleSystemError):
            is_direction_bounded(sys, [1])


class TestClassify:
    def test_unit_box(self):
        sys = mk_system([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 0, 1, 0], "qq")
        cls = classify(sys)
        assert cls.verdict is Verdict.BOUNDED
        assert cls.bounded_rows == frozenset(range(4))
        assert cls.bounded_vars == frozenset(range(2))

    def test_halfplane(self):
        cls = classify(mk_system([[1, 1]], [0], "qq"))
        assert cls.verdict is Verdict.ABSOLUTELY_UNBOUNDED
        assert cls.bounded_rows == frozenset()

    def test_band_plus_free_row(self):
        cls = classify(band_system([[1, 1]], [10]))
        assert cls.verdict is Verdict.PARTIALLY_UNBOUNDED
        assert cls.bounded_rows == frozenset({0, 1})

    @given(systems(max_m=4, max_n=3), st.permutations(range(4)))
    def test_invariant_under_row_permutation(self, sys, perm):
        if not isinstance(check_feasible(sys), Feasible):
            return
        order = [i for i in perm if i < sys.m]
        permuted = sys.subset(order)
        a, b = classify(sys), classify(permuted)
        assert a.verdict == b.verdict
        assert a.bounded_vars == b.bounded_vars
        assert {order[i] for i in b.bounded_rows} == a.bounded_rows

    @given(systems(max_m=4, max_n=3), st.integers(1, 7))
    def test_invariant_under_positive_scaling(self, sys, num):
        if not isinstance(check_feasible(sys), Feasible):
            return
        factor = Fraction(num, 3)
        scaled = mk_system(
            [[factor * a for a in sys.matrix.rows[0]]] + sys.matrix.rows[1:],
            [factor * sys.bounds[0]] + sys.bounds[1:],
            "q" * sys.n1 + "z" * sys.n2,
        )
        a, b = classify(sys), classify(scaled)
        assert a.verdict == b.verdict
        assert a.bounded_rows == b.bounded_rows
        assert a.bounded_vars == b.bounded_vars

    @given(systems(max_m=4, max_n=3), st.lists(st.integers(-4, 4), min_size=3, max_size=3),
           st.integers(-5, 5))
    def test_monotone_under_added_rows(self, sys, row, bound):
        row = row[: sys.n]
        if not any(row):
            return
        extended = mk_system(
            sys.matrix.rows + [row],
            sys.bounds + [bound],
            "q" * sys.n1 + "z" * sys.n2,
        )
        if not isinstance(check_feasible(extended), Feasible):
            return
        before = classify(sys)
        after = classify(extended)
        assert before.bounded_rows <= after.bounded_rows


class TestSplit:
    def test_band_plus_free_row(self):
        sys = band_system([[1, 1]], [10])
        cls = classify(sys)
        out = split(sys, cls)
        assert out.bounded_origin == (0, 1)
        assert out.unbounded_origin == (2,)
        assert out.bounded.matrix.rows == [[3, -3], [-3, 3]]
        assert out.lower == [1, -2]
        assert out.unbounded.matrix.rows == [[1, 1]]

    def test_single_free_row_goes_to_unbounded_part(self):
        sys = mk_system([[1, 0], [-1, 0], [1, 1]], [1, 0, 5], "qq")
        cls = classify(sys)
        out = split(sys, cls)
        assert out.unbounded_origin == (2,)
        assert out.bounded_origin == (0, 1)

    @given(systems(max_m=5, max_n=3))
    def test_lower_bounds_and_duals(self, sys):
        if not isinstance(check_feasible(sys), Feasible):
            return
        cls = classify(sys)
        if cls.verdict is not Verdict.PARTIALLY_UNBOUNDED:
            return
        out = split(sys, cls)
        assert set(out.bounded_origin) | set(out.unbounded_origin) == set(range(sys.m))
        for i in range(out.bounded.m):
            d = out.bounded.matrix.rows[i]
            dual = out.lower_duals[i]
            assert all(mult >= 0 for mult in dual)
            combo = [Fraction(0)] * sys.n
            rhs = Fraction(0)
            for mult, row, u in zip(dual, out.bounded.matrix.rows, out.bounded.bounds):
                for j, a in enumerate(row):
                    combo[j] += mult * a
                rhs += mult * u
            assert combo == [-a for a in d]
            assert rhs == -out.lower[i]
