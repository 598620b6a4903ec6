from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mehsolve.linalg import Matrix, TransformMatrix
from mehsolve.model import (
    ConstraintSystem,
    DimensionMismatchError,
    FarkasCertificate,
    MctmViolationError,
    Model,
    TriviallyUnsat,
    VarInfo,
    VarKind,
    apply_column_transform,
    check_certificate,
    check_model,
    convert_model,
    format_certificate,
    format_model,
    normalize,
)
from mehsolve.simplex import Feasible, check_feasible

from helpers import mctms, mk_system, small_fractions, systems


def sec3_system(kinds="zz"):
    # 1 <= 3 x1 - 3 x2 <= 2 stored as two <= rows.
    return mk_system([[3, -3], [-3, 3]], [2, -1], kinds)


class TestConstraintSystem:
    def test_rejects_interleaved_types(self):
        with pytest.raises(ValueError):
            ConstraintSystem(
                Matrix([[1, 1]]),
                [1],
                [VarInfo("a", VarKind.INTEGER), VarInfo("b", VarKind.RATIONAL)],
            )

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError):
            mk_system([[1, 1]], [1], "qq", names=["a", "a"])

    def test_counts(self):
        sys = mk_system([[1, 2, 3]], [1], "qzz")
        assert (sys.m, sys.n, sys.n1, sys.n2) == (1, 3, 1, 2)


class TestNormalize:
    def test_keeps_plain_system(self):
        sys = mk_system([[1]], [1], "q")
        assert normalize(sys) is sys

    def test_constant_contradiction(self):
        sys = mk_system([[0]], [-1], "q")
        out = normalize(sys)
        assert isinstance(out, TriviallyUnsat)
        assert out.certificate.y == [1]
        assert check_certificate(sys, out.certificate)

    def test_drops_tautology(self):
        sys = mk_system([[0], [1]], [5, 1], "q")
        out = normalize(sys)
        assert out.m == 1
        assert out.matrix.rows == [[1]]
        assert out.row_tags[0].origin == 1

    @given(systems(), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
    def test_never_changes_solutions(self, sys, vals):
        out = normalize(sys)
        if isinstance(out, TriviallyUnsat):
            assert check_certificate(sys, out.certificate)
            return
        model = Model([Fraction(v) for v in vals[: sys.n]])
        assert check_model(sys, model) == check_model(out, model)


class TestCheckModel:
    def test_integer_point(self):
        sys = mk_system([[1], [-1]], [1, 0], "z")
        assert check_model(sys, Model([Fraction(0)]))

    def test_fractional_integer_rejected(self):
        sys = mk_system([[1], [-1]], [1, 0], "z")
        assert not check_model(sys, Model([Fraction(1, 2)]))

    def test_violated_row(self):
        assert not check_model(sec3_system(), Model([Fraction(1), Fraction(0)]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            check_model(sec3_system(), Model([Fraction(0)]))


class TestCheckCertificate:
    def test_valid_pair(self):
        sys = mk_system([[1], [-1]], [0, -1], "q")
        assert check_certificate(sys, FarkasCertificate([Fraction(1), Fraction(1)]))

    def test_unbalanced_combination(self):
        sys = mk_system([[1], [-1]], [0, -1], "q")
        assert not check_certificate(sys, FarkasCertificate([Fraction(1), Fraction(0)]))

    def test_negative_multiplier_rejected(self):
        sys = mk_system([[1], [-1]], [0, -1], "q")
        assert not check_certificate(sys, FarkasCertificate([Fraction(-1), Fraction(-1)]))

    @given(st.lists(st.integers(0, 5), min_size=2, max_size=2))
    def test_feasible_system_has_no_certificate(self, y):
        # The two-row band system is rationally feasible, so no multiplier
        # vector can certify unsatisfiability.
        sys = sec3_system()
        assert isinstance(check_feasible(sys), Feasible)
        cert = FarkasCertificate([Fraction(v) for v in y])
        assert not check_certificate(sys, cert)

    def test_row_map_expansion(self):
        sys = mk_system([[1], [-1]], [0, -1], "q")
        cert = FarkasCertificate([Fraction(1), Fraction(1)], row_map=[1, 0])
        assert check_certificate(sys, cert)


class TestColumnTransform:
    def test_identity(self):
        sys = sec3_system()
        v = TransformMatrix(Matrix.identity(2), 0, 2)
        assert apply_column_transform(sys, v).matrix == sys.matrix

    def test_band_transform(self):
        sys = sec3_system()
        v = TransformMatrix(Matrix([[1, 1], [0, 1]]), 0, 2)
        out = apply_column_transform(sys, v)
        assert out.matrix == Matrix([[3, 0], [-3, 0]])

    def test_split_mismatch(self):
        sys = sec3_system()
        with pytest.raises(MctmViolationError):
            apply_column_transform(sys, TransformMatrix(Matrix.identity(2), 2, 0))

    def test_convert_model_examples(self):
        v = TransformMatrix(Matrix([[1, 1], [0, 1]]), 0, 2)
        assert convert_model(v, Model([Fraction(0), Fraction(1)])).values == [1, 1]

    @given(systems(max_n=4), mctms(max_n1=2, max_n2=2),
           st.lists(st.integers(-4, 4), min_size=4, max_size=4))
    def test_transform_commutes_with_checking(self, sys, vnn, tvals):
        v, n1, n2 = vnn
        if n1 != sys.n1 or n2 != sys.n2:
            return
        tm = TransformMatrix(v, n1, n2)
        transformed = apply_column_transform(sys, tm)
        t = Model([Fraction(x) for x in tvals[: sys.n]])
        # Solution conversion commutes with the predicate.
        assert check_model(sys, convert_model(tm, t)) == check_model(transformed, t)
        # Certificates transfer verbatim in both directions.
        y = FarkasCertificate([Fraction(abs(x)) for x in tvals[: sys.m]]
                              + [Fraction(0)] * max(0, sys.m - len(tvals)))
        assert check_certificate(sys, y) == check_certificate(transformed, y)

    @given(mctms(), st.lists(st.integers(-6, 6), min_size=6, max_size=6))
    def test_mixed_round_trip(self, vnn, tvals):
        v, n1, n2 = vnn
        tm = TransformMatrix(v, n1, n2)
        t = Model([Fraction(x, 3) for x in tvals[:n1]]
                  + [Fraction(x) for x in tvals[n1:n1 + n2]])
        s = convert_model(tm, t)
        # Integer coordinates stay integral through the transform.
        assert all(s.values[j].denominator == 1 for j in range(n1, n1 + n2))
        back = convert_model(tm.inverse(), s)
        assert back.values == t.values


class TestFormatting:
    def test_model_lines_follow_declaration_order(self):
        sys = ConstraintSystem(
            Matrix([[1, 1]]),
            [1],
            [VarInfo("b", VarKind.RATIONAL), VarInfo("a", VarKind.INTEGER)],
            user_perm=[1, 0],
        )
        text = format_model(sys, Model([Fraction(1, 2), Fraction(3)]))
        assert text.splitlines() == ["a = 3", "b = 1/2"]

    def test_certificate_lines(self):
        sys = mk_system([[1], [-1]], [0, -1], "q")
        text = format_certificate(sys, FarkasCertificate([Fraction(1, 3), Fraction(0)]))
        assert text.splitlines() == ["0 1/3"]
