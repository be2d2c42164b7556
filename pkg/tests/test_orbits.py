from fractions import Fraction

import pytest

from fixlab.metric import (
    ZERO,
    CapacityError,
    FiniteSpace,
    Point,
    harmonic_space,
    identity_map,
    l1_kannan_map,
    l1_kannan_space,
    table_map,
)
from fixlab.orbits import (
    Evidence,
    cauchy_diagnostics,
    gaps_nonincreasing_after,
    picard_orbit,
    solve_fixed_point,
)

import oracles


def A(n):
    return Point("A", n)


def X(n):
    return Point("X", n)


@pytest.fixture(scope="module")
def l1():
    return l1_kannan_space(10), l1_kannan_map()


@pytest.fixture(scope="module")
def harmonic():
    from fixlab.metric import shift_map

    return harmonic_space(6000), shift_map("A")


class TestPicard:
    def test_l1_orbit_of_x1(self, l1):
        space, t = l1
        orb = picard_orbit(space, t, X(1), 5)
        assert [p.label for p in orb.points] == ["x_1", "u_1", "0", "0"]
        assert orb.gaps == (5, 2, 0)
        assert orb.fixed_hit == 2
        assert len(orb.gaps) == len(orb.points) - 1

    def test_untruncated_orbit_stays_fixed(self, l1):
        space, t = l1
        orb = picard_orbit(space, t, X(1), 5, truncate=False)
        assert orb.gaps == (5, 2, 0, 0, 0)
        assert all(p == ZERO for p in orb.points[2:])

    def test_fixed_start(self, l1):
        space, t = l1
        orb = picard_orbit(space, t, ZERO, 4, truncate=False)
        assert orb.gaps == (0,) * 4
        assert orb.fixed_hit == 0

    def test_harmonic_first_gaps(self, harmonic):
        space, t = harmonic
        assert picard_orbit(space, t, A(0), 4).gaps == (1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))

    def test_harmonic_gaps_to_1000(self, harmonic):
        space, t = harmonic
        orb = picard_orbit(space, t, A(0), 1001)
        assert orb.gaps == tuple(Fraction(1, n + 1) for n in range(1001))
        assert orb.monotone_strict and orb.cycle is None

    def test_cycle_detection(self):
        space = FiniteSpace(((0, 1, 2), (1, 0, 1), (2, 1, 0)))
        orb = picard_orbit(space, table_map([1, 2, 1]), Point("", 0), 10)
        assert orb.cycle == (1, 2)
        assert orb.fixed_hit is None
        assert orb.strict_violation == 0

    def test_capacity_error(self):
        from fixlab.metric import shift_map

        space = harmonic_space(5, capacity=5)
        with pytest.raises(CapacityError):
            picard_orbit(space, shift_map("A"), A(0), 10)

    def test_bad_steps(self, l1):
        with pytest.raises(ValueError):
            picard_orbit(*l1, X(1), 0)

    def test_csv_dump(self, l1):
        csv = picard_orbit(*l1, X(1), 5).to_csv()
        assert csv.splitlines() == ["n,point,s_n", "0,x_1,5", "1,u_1,2", "2,0,0", "3,0,"]

    def test_alpha_upper_bounds_later_gaps(self, harmonic):
        orb = picard_orbit(*harmonic, A(0), 200)
        assert orb.monotone_strict
        assert gaps_nonincreasing_after(orb.gaps)
        assert all(g <= orb.gaps[0] for g in orb.gaps)
        assert orb.alpha_upper == min(orb.gaps)


class TestCauchy:
    def test_harmonic_discrimination(self, harmonic):
        orb = picard_orbit(*harmonic, A(0), 5000, truncate=False)
        rep = cauchy_diagnostics(orb, 10, 500, Fraction(1, 501), Fraction(2))
        assert rep.g_cauchy is Evidence.FOR
        assert rep.cauchy is Evidence.AGAINST
        for p, (m, b) in enumerate(zip(rep.window_max, rep.window_bounds), start=1):
            # the largest window distance sits at the start of the tail
            assert m == oracles.harmonic_gap_sum(500, 500 + p)
            assert m <= b == Fraction(p, 501)
        u, v = rep.spread_witness
        assert (u, v) == (A(500), A(5000))
        assert rep.spread == oracles.harmonic_gap_sum(500, 5000) > 2

    def test_constant_orbit(self, l1):
        orb = picard_orbit(*l1, ZERO, 12, truncate=False)
        rep = cauchy_diagnostics(orb, 3, 0, Fraction(1, 100), Fraction(1))
        assert rep.spread == 0
        assert rep.g_cauchy is Evidence.FOR and rep.cauchy is Evidence.FOR

    def test_l1_after_index_two(self, l1):
        orb = picard_orbit(*l1, X(1), 12, truncate=False)
        rep = cauchy_diagnostics(orb, 3, 2, Fraction(1, 100), Fraction(1))
        assert rep.g_cauchy is Evidence.FOR and rep.cauchy is Evidence.FOR

    def test_window_too_large(self, l1):
        orb = picard_orbit(*l1, ZERO, 4, truncate=False)
        with pytest.raises(ValueError):
            cauchy_diagnostics(orb, 5, 0, 1, 1)
        with pytest.raises(ValueError):
            cauchy_diagnostics(orb, 2, 3, 1, 1)

    def test_inconclusive_band(self, harmonic):
        orb = picard_orbit(*harmonic, A(0), 100, truncate=False)
        rep = cauchy_diagnostics(orb, 1, 10, Fraction(1, 11), Fraction(3))
        # spread H_100 - H_10 lies in (3/2, 3]
        assert Fraction(3, 2) < rep.spread <= 3
        assert rep.cauchy is Evidence.INCONCLUSIVE

    def test_g_against_has_witness(self, harmonic):
        orb = picard_orbit(*harmonic, A(0), 50, truncate=False)
        rep = cauchy_diagnostics(orb, 2, 0, lambda p: Fraction(1, 1000), Fraction(100))
        assert rep.g_cauchy is Evidence.AGAINST
        p, u, v, d = rep.g_witness
        assert p == 1 and (u, v) == (A(49), A(50)) and d == Fraction(1, 50)


class TestSolve:
    def test_l1_from_x3(self, l1):
        rep = solve_fixed_point(*l1, X(3), 10)
        assert rep.found and rep.point == ZERO and rep.iterations == 2
        assert rep.alpha_is_zero

    def test_harmonic_no_fixed_point(self, harmonic):
        rep = solve_fixed_point(*harmonic, A(0), 1000)
        assert not rep.found
        assert rep.alpha_upper == Fraction(1, 1001)
        assert rep.monotone_strict
        assert not rep.alpha_is_zero
        assert rep.unique is None

    def test_identity_one_point(self):
        space = FiniteSpace(((0,),))
        rep = solve_fixed_point(space, identity_map(), Point("", 0), 3)
        assert rep.found and rep.iterations == 0
        assert space.distance(rep.point, identity_map()(rep.point)) == 0

    def test_second_fixed_point_detected(self):
        space = FiniteSpace(((0, 1, 1), (1, 0, 1), (1, 1, 0)))
        rep = solve_fixed_point(space, table_map([0, 1, 0]), Point("", 2), 5)
        assert rep.found and rep.point == Point("", 0)
        assert rep.unique is False
        assert any(u.contradicts_contraction for u in rep.uniqueness)

    def test_unique_fixed_point(self, l1):
        space, t = l1
        rep = solve_fixed_point(space, t, X(2), 5, candidates=[X(1), Point("U", 4)])
        assert rep.unique is True

    def test_counter_witness_reported(self):
        space = FiniteSpace(((0, 1, 2), (1, 0, 1), (2, 1, 0)))
        rep = solve_fixed_point(space, table_map([1, 2, 1]), Point("", 0), 5)
        assert not rep.found
        assert rep.contraction_witness is not None
        u, v, after, before = rep.contraction_witness
        assert after >= before

    def test_tolerance_is_report_only(self, harmonic):
        rep = solve_fixed_point(*harmonic, A(0), 50, gap_tolerance=Fraction(1, 10))
        assert rep.below_tolerance and not rep.found
