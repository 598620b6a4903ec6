from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mehsolve.analysis import Verdict, classify
from mehsolve.generators import (
    GenParams,
    GenerationError,
    gen_flip,
    gen_random_unbounded,
    gen_slack,
    slack_model,
)
from mehsolve.model import Sat, Unsat, VarKind, check_model
from mehsolve.smtlib import emit
from mehsolve.solver import solve

from helpers import mk_system, systems


class TestGenSlack:
    def test_single_row(self):
        out = gen_slack(mk_system([[1]], [1], "q"))
        assert out.matrix.rows == [[1, -1], [-1, 0], [0, -1]]
        assert out.bounds == [1, 0, 0]
        assert [v.name for v in out.variables] == ["x0_pos", "x0_neg"]

    def test_types_inherited(self):
        out = gen_slack(mk_system([[1, 1]], [1], "qz"))
        assert [v.kind for v in out.variables] == [
            VarKind.RATIONAL, VarKind.RATIONAL, VarKind.INTEGER, VarKind.INTEGER]

    def test_unsat_band_stays_unsat(self):
        band = mk_system([[3, -3], [-3, 3]], [2, -1], "zz")
        slacked = gen_slack(band)
        assert isinstance(solve(band), Unsat)
        assert isinstance(solve(slacked), Unsat)

    def test_slacked_unsat_is_partially_unbounded(self):
        band = mk_system([[3, -3], [-3, 3]], [2, -1], "zz")
        cls = classify(gen_slack(band))
        assert cls.verdict is Verdict.PARTIALLY_UNBOUNDED

    @given(systems(max_m=4, max_n=3))
    @settings(max_examples=30)
    def test_verdict_preserved(self, sys):
        ours = solve(sys)
        slacked = solve(gen_slack(sys))
        assert type(ours) is type(slacked)
        if isinstance(ours, Sat):
            lifted = slack_model(gen_slack(sys), ours.model)
            assert check_model(gen_slack(sys), lifted)


class TestGenFlip:
    def test_p_zero_is_identity(self):
        sys = mk_system([[1, 2]], [3], "zz")
        out = gen_flip(sys, Fraction(0), seed=1)
        assert out.matrix == sys.matrix
        assert [v.kind for v in out.variables] == [v.kind for v in sys.variables]

    def test_p_one_flips_everything(self):
        sys = mk_system([[1, 2]], [3], "zz")
        out = gen_flip(sys, Fraction(1), seed=1)
        assert all(v.kind is VarKind.RATIONAL for v in out.variables)

    def test_deterministic(self):
        sys = mk_system([[1, 2, 3], [4, 5, 6]], [3, 4], "zzz")
        a = gen_flip(sys, Fraction(1, 2), seed=99)
        b = gen_flip(sys, Fraction(1, 2), seed=99)
        assert emit(a) == emit(b)

    def test_columns_follow_their_variables(self):
        sys = mk_system([[1, 2]], [3], "zz", names=["a", "b"])
        out = gen_flip(sys, Fraction(1, 2), seed=3)
        for k, col in enumerate(out.user_perm):
            name = sys.variables[sys.user_perm[k]].name
            assert out.variables[col].name == name
            assert out.matrix.rows[0][col] == sys.matrix.rows[0][sys.user_perm[k]]

    @given(systems(max_m=3, max_n=3), st.integers(0, 100))
    @settings(max_examples=30)
    def test_flip_keeps_integer_sat(self, sys, seed):
        # Relaxing variable types only grows the solution set.
        res = solve(sys)
        if not isinstance(res, Sat):
            return
        flipped = gen_flip(sys, Fraction(1, 5), seed)
        assert isinstance(solve(flipped), Sat)


class TestGenRandomUnbounded:
    def test_verified_instance(self):
        params = GenParams(seed=7, n_vars=3, n_bounded=1, n_unbounded=1)
        sys = gen_random_unbounded(params)
        assert classify(sys).verdict is Verdict.PARTIALLY_UNBOUNDED
        assert isinstance(solve(sys), Sat)

    def test_deterministic(self):
        params = GenParams(seed=11, n_vars=3, n_bounded=2, n_unbounded=1)
        assert emit(gen_random_unbounded(params)) == emit(gen_random_unbounded(params))

    def test_zero_bounded_rejected(self):
        with pytest.raises(ValueError):
            GenParams(seed=1, n_vars=3, n_bounded=0)

    def test_bounded_must_stay_below_var_count(self):
        with pytest.raises(ValueError):
            GenParams(seed=1, n_vars=3, n_bounded=3)

    @given(st.integers(0, 40))
    @settings(max_examples=12)
    def test_random_seeds(self, seed):
        params = GenParams(seed=seed, n_vars=3, n_bounded=1, n_unbounded=1,
                           coeff_bound=5)
        sys = gen_random_unbounded(params)
        assert classify(sys).verdict is Verdict.PARTIALLY_UNBOUNDED


def test_generation_retry_exhaustion():
    # With two variables and one bounded direction, a single out-of-span
    # row already fills the space, so asking for many independent
    # unbounded rows can never succeed.
    params = GenParams(seed=0, n_vars=2, n_bounded=1, n_unbounded=10)
    with pytest.raises(GenerationError):
        gen_random_unbounded(params)
