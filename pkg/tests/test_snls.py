import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vassep.errors import VassepError
from vassep.exact_arith import IntPoly
from vassep.snls import (
    Dnflb,
    LowerBoundConstraint,
    Snls,
    SnlsSolution,
    brute_feasibility_probe,
    build_extended,
    candidate_points,
    dnflb_to_dinc,
    eliminate_quantifier,
    find_small_t,
    per_t_lp_feasible,
    scale_to_integer,
    solution_size_bound,
    solve,
    solve_for_y,
    verify_solution,
)
from vassep.suites import FORCED_T, SQRT2_TRAP, random_snls

X = IntPoly.x()
Y_GE_X = Snls.from_rows([[1]], [X])
INFEASIBLE = Snls.from_rows([[-1]], [1])
SHIFTED = Snls.from_rows([[IntPoly([-1, 1])]], [1])  # (x - 1) y >= 1


def conj(*cons):
    return Dnflb((tuple(cons),))


def test_from_json_round_trip():
    assert Snls.from_json(FORCED_T.to_json()) == FORCED_T
    empty = Snls.from_rows([], [], n=2)
    assert Snls.from_json(empty.to_json()).n == 2


def test_shape_mismatch():
    with pytest.raises(VassepError) as e:
        Snls.from_rows([[1], [2]], [1])
    assert e.value.code == "SHAPE_MISMATCH"


def test_accessors():
    S = Snls.from_rows([[X, 3], [1, IntPoly([0, 0, -2])]], [1, X])
    assert (S.row, S.col, S.deg, S.maxc) == (2, 2, 2, 3)


class TestExtended:
    def test_glue(self):
        E = build_extended(Snls.from_rows([[1]], [X]))
        assert E.D.to_rows() == [[IntPoly([1])], [IntPoly([1])]]
        assert E.c == (X, IntPoly())

    def test_identity_block(self):
        E = build_extended(Snls.from_rows([[1, 2]], [0]))
        assert E.D.rows == 3
        assert E.D.to_rows()[1:] == [[IntPoly([1]), IntPoly()], [IntPoly(), IntPoly([1])]]

    def test_no_rows(self):
        E = build_extended(Snls.from_rows([], [], n=2))
        assert E.D.rows == 2 and all(c.is_zero() for c in E.c)


class TestElimination:
    def test_always_feasible(self):
        phi = eliminate_quantifier(Y_GE_X)
        assert all(phi(t) for t in (-3, 0, 5))

    def test_never_feasible(self):
        phi = eliminate_quantifier(INFEASIBLE)
        assert not any(phi(t) for t in (0, 1, -7))

    def test_sqrt2_trap(self):
        phi = eliminate_quantifier(SQRT2_TRAP)
        for t in (0, 1, Fraction(3, 2), Fraction(7, 5), 2):
            assert not phi(t)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_agrees_with_lp(self, seed):
        rng = random.Random(seed)
        S = random_snls(rng)
        phi = eliminate_quantifier(S)
        for t in candidate_points(phi)[:6] + [Fraction(rng.randint(-30, 30), rng.randint(1, 7))]:
            assert phi(t) == per_t_lp_feasible(S, t)

    def test_subset_cap(self):
        with pytest.raises(VassepError) as e:
            eliminate_quantifier(FORCED_T, subset_cap=1)
        assert e.value.is_resource_cap


class TestIntervals:
    def test_half_line(self):
        dinc = dnflb_to_dinc(conj(LowerBoundConstraint(X)))
        assert dinc(0) and dinc(10**9) and not dinc(Fraction(-1, 10**9))

    def test_open_unit_interval(self):
        dinc = dnflb_to_dinc(conj(LowerBoundConstraint(X, True), LowerBoundConstraint(IntPoly([1, -1]), True)))
        assert len(dinc.intervals) == 1
        iv = dinc.intervals[0]
        assert iv.lo_strict and iv.hi_strict
        assert dinc(Fraction(1, 2)) and not dinc(0) and not dinc(1)

    def test_outside_sqrt2(self):
        dinc = dnflb_to_dinc(conj(LowerBoundConstraint(IntPoly([-2, 0, 1]), True)))
        assert len(dinc.intervals) == 2
        assert dinc(Fraction(-3, 2)) and dinc(Fraction(3, 2)) and not dinc(Fraction(7, 5)) and not dinc(0)

    @given(st.lists(st.tuples(st.lists(st.integers(-5, 5), min_size=1, max_size=4), st.booleans()),
                    min_size=1, max_size=3), st.fractions(max_denominator=20))
    def test_dinc_equals_dnflb(self, cons, t):
        phi = conj(*(LowerBoundConstraint(IntPoly(cs), s) for cs, s in cons))
        assert dnflb_to_dinc(phi)(t) == phi(t)


class TestCandidates:
    def test_linear(self):
        pts = candidate_points(conj(LowerBoundConstraint(IntPoly([-1, 1]))))
        assert {1, 4, -4} <= set(pts)

    def test_quadratic(self):
        pts = candidate_points(conj(LowerBoundConstraint(IntPoly([-2, 0, 1]))))
        assert {5, -5} <= set(pts)
        assert any(-Fraction(7, 5) < p < Fraction(7, 5) for p in pts)

    def test_constant(self):
        phi = conj(LowerBoundConstraint(IntPoly([1])))
        pts = candidate_points(phi)
        assert {3, -3} <= set(pts)
        assert all(phi(t) for t in pts)


class TestSolving:
    def test_small_t(self):
        t = find_small_t(SHIFTED)
        assert t is not None and t > 1 and per_t_lp_feasible(SHIFTED, t)
        assert find_small_t(INFEASIBLE) is None
        assert find_small_t(SQRT2_TRAP) is None

    def test_solve_for_y(self):
        assert solve_for_y(Y_GE_X, 3) == [3]
        assert solve_for_y(Y_GE_X, -2) == [0]
        assert solve_for_y(INFEASIBLE, 5) is None

    def test_forced(self):
        sol = solve(FORCED_T)
        assert sol.t == 2 and sol.y[0] >= 1

    def test_trap(self):
        assert solve(SQRT2_TRAP) is None

    def test_empty_system(self):
        sol = solve(Snls.from_rows([], [], n=1))
        assert sol.t == 0 and sol.y == (0,)

    def test_solution_validated_on_construction(self):
        with pytest.raises(VassepError):
            SnlsSolution(Fraction(0), (Fraction(0),), 1, INFEASIBLE)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_solutions_verify(self, seed):
        S = random_snls(random.Random(seed))
        sol = solve(S)
        if sol is not None:
            assert verify_solution(S, sol.t, sol.y)
            assert S.holds(sol.t, sol.y)
        else:
            assert not brute_feasibility_probe(S, 20, seed).found


class TestScaling:
    def test_monotone(self):
        S = Snls.from_rows([[1, 0], [0, 1], [IntPoly([-2, 1]), 0]], [0, 0, 0])
        sol = SnlsSolution(Fraction(2), (Fraction(3, 2), Fraction(1, 2)), 2, S)
        assert scale_to_integer(S, sol) == (2, [3, 1])

    def test_already_integral(self):
        S = Snls.from_rows([[1]], [1])
        assert scale_to_integer(S, SnlsSolution(Fraction(1, 2), (Fraction(1),), 1, S)) == (Fraction(1, 2), [1])

    def test_non_monotone(self, caplog):
        S = Snls.from_rows([[-2]], [-1])  # y <= 1/2
        sol = SnlsSolution(Fraction(0), (Fraction(1, 2),), 2, S)
        assert scale_to_integer(S, sol) is None
        assert "not monotone" in caplog.text


class TestBounds:
    def test_size_bound(self):
        assert solution_size_bound(Snls.from_rows([[X, 3]], [0]), C=1) == 6
        assert solution_size_bound(Snls.from_rows([[X]], [1]), C=1) == 1
        S = Snls.from_rows([[IntPoly([0, 0, 2]), 1], [1, 1]], [0, 0])
        assert solution_size_bound(S, C=1) == 8 ** 64


class TestOracle:
    def test_lp_examples(self):
        assert per_t_lp_feasible(Y_GE_X, 100)
        assert not per_t_lp_feasible(INFEASIBLE, 0)
        assert not per_t_lp_feasible(SQRT2_TRAP, Fraction(7, 5))

    def test_probe(self):
        assert not brute_feasibility_probe(SQRT2_TRAP, 100, 0).found
        rep = brute_feasibility_probe(SHIFTED, 100, 0)
        assert rep.found and all(t > 1 for t in rep.feasible)
        assert brute_feasibility_probe(Y_GE_X, 0, 0).feasible[0] == candidate_points(eliminate_quantifier(Y_GE_X))[0]

    def test_fm_cap(self):
        with pytest.raises(VassepError) as e:
            per_t_lp_feasible(random_snls(random.Random(3), 4, 3), 1, cap=0)
        assert e.value.code == "FM_BLOWUP"
