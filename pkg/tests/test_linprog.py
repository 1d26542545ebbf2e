from fractions import Fraction

import pytest

from tropmono.linprog import solve_lp


def test_feasible_with_objective():
    res = solve_lp(
        2,
        a_eq=[([1, 1], 1)],
        a_le=[([-1, 0], 0), ([0, -1], 0)],
        objective=[1, 0],
    )
    assert res.feasible and res.value == 1
    x, y = res.x
    assert x + y == 1 and x >= 0 and y >= 0


def test_infeasible_with_farkas():
    res = solve_lp(1, a_le=[([1], -1), ([-1], 0)])
    assert not res.feasible
    assert res.farkas is not None  # verified internally before returning


def test_free_variables():
    res = solve_lp(1, a_eq=[([2], -3)])
    assert res.feasible and res.x[0] == Fraction(-3, 2)


def test_degenerate_equalities():
    res = solve_lp(2, a_eq=[([1, 1], 2), ([2, 2], 4)])
    assert res.feasible
    assert res.x[0] + res.x[1] == 2


def test_unbounded_detected():
    with pytest.raises(ValueError):
        solve_lp(1, a_le=[([-1], 0)], objective=[1])


def test_fractional_data():
    res = solve_lp(
        1,
        a_le=[([Fraction(1, 3)], Fraction(1, 2))],
        objective=[1],
    )
    assert res.feasible and res.value == Fraction(3, 2)
