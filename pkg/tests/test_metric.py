from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fixlab.metric import (
    ZERO,
    CapacityError,
    DomainError,
    FiniteSpace,
    GridSpace,
    Point,
    apply,
    check_metric_axioms,
    distance,
    fmt,
    harmonic_space,
    l1_kannan_map,
    l1_kannan_space,
    parse_rational,
    piecewise_linear_map,
    real,
    shift_map,
    table_map,
    verify_triangle,
)

import oracles


def X(n):
    return Point("X", n)


def U(n):
    return Point("U", n)


def A(n):
    return Point("A", n)


class TestRationals:
    def test_decimal_is_exact(self):
        assert parse_rational("0.51") == Fraction(51, 100)
        assert parse_rational("0.102") == Fraction(51, 500)

    def test_p_over_q_lowest_terms(self):
        r = parse_rational("6/8")
        assert (r.numerator, r.denominator) == (3, 4)

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            parse_rational(0.5)

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_rational("one half")

    def test_render(self):
        assert fmt(Fraction(7, 2)) == "7/2"
        assert fmt(float("inf")) == "inf"

    @given(st.fractions(), st.fractions())
    def test_total_order(self, a, b):
        assert (a < b) + (a == b) + (a > b) == 1
        assert parse_rational(fmt(a)) == a


class TestDistance:
    def test_l1_u1_u2(self):
        space = l1_kannan_space(5)
        assert distance(space, U(1), U(2)) == Fraction(7, 2)

    def test_self_distance_zero(self):
        for space in (l1_kannan_space(5), harmonic_space(5), FiniteSpace(((0, 1), (1, 0)))):
            for p in space.points():
                assert distance(space, p, p) == 0

    def test_harmonic_a2_a5(self):
        space = harmonic_space(10)
        assert distance(space, A(2), A(5)) == Fraction(47, 60)
        assert oracles.harmonic_gap_sum(2, 5) == Fraction(47, 60)

    def test_unknown_point(self):
        with pytest.raises(DomainError):
            distance(l1_kannan_space(5), Point("Q", 1), ZERO)
        with pytest.raises(DomainError):
            distance(l1_kannan_space(5), X(0), ZERO)
        with pytest.raises(DomainError):
            distance(FiniteSpace(((0, 1), (1, 0))), Point("", 2), Point("", 0))

    def test_capacity(self):
        space = harmonic_space(5, capacity=5)
        with pytest.raises(CapacityError):
            distance(space, A(0), A(6))

    def test_grid_accepts_off_grid_witness(self):
        g = GridSpace.uniform(Fraction(1, 10))
        assert distance(g, real("1/2"), real("51/100")) == Fraction(1, 100)
        with pytest.raises(DomainError):
            distance(g, real(2), real(0))


class TestClosedFormsAgainstOracles:
    def test_l1_matches_vectors(self):
        space = l1_kannan_space(50)
        pts = space.points()
        for p in pts:
            for q in pts:
                assert space.distance(p, q) == oracles.l1_distance(p, q)

    def test_l1_spec_closed_forms(self):
        space = l1_kannan_space(10)
        for n in range(1, 11):
            assert space.distance(X(n), U(n)) == 2 + Fraction(3, n)
            assert space.distance(X(n), ZERO) == 3 + Fraction(4, n)
            assert space.distance(U(n), ZERO) == 1 + Fraction(1, n)
            for m in range(1, 11):
                if m != n:
                    assert space.distance(X(n), X(m)) == 6 + Fraction(4, n) + Fraction(4, m)
                    assert space.distance(U(n), U(m)) == 2 + Fraction(1, n) + Fraction(1, m)
                    assert space.distance(X(n), U(m)) == 4 + Fraction(4, n) + Fraction(1, m)

    def test_harmonic_matches_summation(self):
        space = harmonic_space(50)
        for i in range(51):
            for j in range(51):
                assert space.distance(A(i), A(j)) == oracles.harmonic_gap_sum(i, j)

    def test_harmonic_points(self):
        table = oracles.harmonic_table(20)
        assert table[3] == oracles.harmonic_value(3) == Fraction(11, 6)


class TestTriangle:
    def test_l1_cutoff_10(self):
        rep = verify_triangle(l1_kannan_space(10), 10)
        assert rep.ok
        assert rep.triples_checked == 21 * 20 * 19 // 2

    def test_two_point(self):
        assert verify_triangle(FiniteSpace(((0, 1), (1, 0))), 1).ok

    def test_violation(self):
        m = ((0, 1, 10), (1, 0, 1), (10, 1, 0))
        rep = verify_triangle(FiniteSpace(m), 1)
        assert not rep.ok
        assert [p.n for p in rep.violation] == [0, 1, 2]
        assert (rep.lhs, rep.rhs) == (10, 2)

    def test_bad_cutoff(self):
        with pytest.raises(ValueError):
            verify_triangle(l1_kannan_space(3), 0)

    def test_harmonic(self):
        assert verify_triangle(harmonic_space(12)).ok


class TestFiniteSpaceValidation:
    @pytest.mark.parametrize(
        "matrix",
        [
            ((0, 1), (2, 0)),
            ((1, 1), (1, 0)),
            ((0, 0), (0, 0)),
            ((0, 1, 1), (1, 0)),
        ],
    )
    def test_rejects(self, matrix):
        with pytest.raises(ValueError):
            FiniteSpace(matrix)


class TestApply:
    def test_l1_rules(self):
        t = l1_kannan_map()
        assert apply(t, X(3)) == U(3)
        assert apply(t, U(3)) == ZERO
        assert apply(t, ZERO) == ZERO

    def test_shift(self):
        assert apply(shift_map("A"), A(7)) == A(8)

    def test_piecewise(self):
        t = piecewise_linear_map([("1/2", "1/4"), ("1", "1/5")])
        assert apply(t, real("1/2")) == real("1/8")
        assert apply(t, real("51/100")) == real("51/500")

    def test_outside_family(self):
        with pytest.raises(DomainError):
            apply(l1_kannan_map(), A(1))
        with pytest.raises(DomainError):
            apply(shift_map("A"), X(1))
        with pytest.raises(DomainError):
            apply(table_map([0, 0]), Point("", 5))


@st.composite
def finite_metrics(draw, max_n=5):
    """Metrics from random points on a rational line plus a discrete part."""
    n = draw(st.integers(2, max_n))
    xs = draw(st.lists(st.fractions(min_value=-10, max_value=10, max_denominator=12), min_size=n, max_size=n,
                       unique=True))
    c = draw(st.fractions(min_value=0, max_value=3, max_denominator=5))
    m = tuple(tuple(Fraction(0) if i == j else abs(xs[i] - xs[j]) + c for j in range(n)) for i in range(n))
    return FiniteSpace(m)


@settings(max_examples=60, deadline=None)
@given(finite_metrics(), st.fractions(min_value=Fraction(1, 100), max_value=100))
def test_rescaling_preserves_axioms(space, c):
    assert verify_triangle(space).ok
    scaled = space.scaled(c)
    assert verify_triangle(scaled).ok
    assert check_metric_axioms(scaled) == []
    p, q = space.points()[:2]
    assert scaled.distance(p, q) == c * space.distance(p, q)


def test_axioms_on_gallery_families():
    assert check_metric_axioms(l1_kannan_space(15)) == []
    assert check_metric_axioms(harmonic_space(30)) == []


def test_relabel_roundtrip():
    s = FiniteSpace(((0, 1, 2), (1, 0, 2), (2, 2, 0)))
    r = s.relabel([2, 0, 1])
    assert r.matrix[2][0] == s.matrix[0][1]
    assert r.relabel([1, 2, 0]) == s
