from fractions import Fraction

import pytest

from pathtsp.simplex import ExactSimplex, Infeasible, Unbounded


def build(costs):
    sx = ExactSimplex()
    cols = [sx.add_variable(c) for c in costs]
    return sx, cols


def test_equality_system_solves_exactly():
    sx, (x, y) = build([1, 2])
    sx.add_constraint({x: 1, y: 1}, "=", 3)
    sx.add_constraint({x: 1, y: -1}, "=", 1)
    sx.solve()
    assert sx.objective() == 4
    assert sx.value_of(x) == 2
    assert sx.value_of(y) == 1
    sx.assert_optimal()


def test_surplus_rows_and_strong_duality():
    sx, (x, y) = build([2, 3])
    sx.add_constraint({x: 1, y: 1}, ">=", 4)
    sx.add_constraint({x: 1}, ">=", 1)
    sx.solve()
    assert sx.objective() == 8
    y_row = sx.duals()
    assert y_row[0] * 4 + y_row[1] * 1 == sx.objective()
    assert all(v >= 0 for v in y_row)


def test_fractional_rhs_stays_exact():
    sx, (x,) = build([1])
    sx.add_constraint({x: 7}, "=", 3)
    sx.solve()
    assert sx.value_of(x) == Fraction(3, 7)
    assert isinstance(sx.objective(), Fraction)


def test_infeasible_system_raises():
    sx, (x,) = build([1])
    sx.add_constraint({x: 1}, "=", 1)
    sx.add_constraint({x: 1}, ">=", 2)
    with pytest.raises(Infeasible):
        sx.solve()


def test_unbounded_objective_raises():
    sx, (x,) = build([-1])
    sx.add_constraint({x: 1}, ">=", 1)
    with pytest.raises(Unbounded):
        sx.solve()


def test_beale_cycling_example_terminates():
    # the classic degenerate tableau that cycles under naive Dantzig
    sx, (x4, x5, x6, x7) = build([Fraction(-3, 4), 150, Fraction(-1, 50), 6])
    sx.add_constraint({x4: Fraction(-1, 4), x5: 60, x6: Fraction(1, 25),
                       x7: -9}, ">=", 0)
    sx.add_constraint({x4: Fraction(-1, 2), x5: 90, x6: Fraction(1, 50),
                       x7: -3}, ">=", 0)
    sx.add_constraint({x6: -1}, ">=", -1)
    sx.solve()
    assert sx.objective() == Fraction(-1, 20)
    sx.assert_optimal()


def test_warm_cut_rows_reprice_the_optimum():
    sx, (x, y) = build([1, 1])
    sx.add_constraint({x: 1, y: 1}, ">=", 1)
    sx.solve()
    assert sx.objective() == 1
    sx.add_cut_row({x: 1}, ">=", Fraction(3, 4))
    sx.add_cut_row({y: 1}, ">=", Fraction(1, 2))
    sx.solve()
    assert sx.objective() == Fraction(5, 4)
    assert sx.value_of(x) == Fraction(3, 4)
    assert sx.value_of(y) == Fraction(1, 2)
    sx.assert_optimal()


def test_column_generation_master_loop():
    # miniature of the decomposition master: fix a target point, price in
    # columns until the phase-1 residual hits zero
    sx = ExactSimplex()
    sx.add_constraint({}, "=", Fraction(1, 2))
    sx.add_constraint({}, "=", 1)
    gap = sx.solve_phase1()
    assert gap == Fraction(3, 2)
    a = sx.add_column(0, {0: 1, 1: 1})
    gap = sx.solve_phase1()
    assert gap == Fraction(1, 2)
    b = sx.add_column(0, {1: 1})
    gap = sx.solve_phase1()
    assert gap == 0
    assert sx.value_of(a) == Fraction(1, 2)
    assert sx.value_of(b) == Fraction(1, 2)


def test_solution_maps_only_nonzero_basics():
    sx, (x, y) = build([1, 1])
    sx.add_constraint({x: 1, y: 1}, ">=", 2)
    sx.solve()
    sol = sx.solution()
    assert sum(sol.values(), Fraction(0)) == 2
    assert all(v > 0 for v in sol.values())
