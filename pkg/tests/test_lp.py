import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shared.errors import ConfigError, DimensionMismatch
from solver.lp import LinearProgram, Relation, Sense, Status, solve, solve_highs, solve_simplex


def small_lp():
    # max x + y, x + 2y <= 4, 3x + y <= 6 : optimum (1.6, 1.2)
    lp = LinearProgram(sense=Sense.MAX)
    x = lp.add_variable('x', 1.0)
    y = lp.add_variable('y', 1.0)
    lp.add_constraint({x: 1.0, y: 2.0}, Relation.LE, 4.0)
    lp.add_constraint({x: 3.0, y: 1.0}, Relation.LE, 6.0)
    return lp


@pytest.mark.parametrize('backend', ['simplex', 'highs', 'auto'])
def test_small_lp(backend):
    result = solve(small_lp(), backend)
    assert result.status == Status.OPTIMAL
    assert result.value == pytest.approx(2.8)
    np.testing.assert_allclose(result.x, [1.6, 1.2], atol=1e-9)


def test_equality_and_bounds():
    lp = LinearProgram(sense=Sense.MIN)
    x = lp.add_variable('x', 2.0, upper=1.0)
    y = lp.add_variable('y', 1.0, lower=0.5)
    lp.add_constraint({x: 1.0, y: 1.0}, Relation.EQ, 3.0)
    for backend in ('simplex', 'highs'):
        result = solve(lp, backend)
        assert result.value == pytest.approx(3.0)
        assert result.x[1] == pytest.approx(3.0)


def test_infeasible_and_unbounded():
    lp = LinearProgram()
    x = lp.add_variable('x', 1.0)
    lp.add_constraint({x: 1.0}, Relation.GE, 2.0)
    lp.add_constraint({x: 1.0}, Relation.LE, 1.0)
    assert solve_simplex(lp).status == Status.INFEASIBLE
    assert solve_highs(lp).status == Status.INFEASIBLE

    lp = LinearProgram(sense=Sense.MAX)
    x = lp.add_variable('x', 1.0)
    y = lp.add_variable('y', 1.0)
    lp.add_constraint({x: 1.0, y: -1.0}, Relation.LE, 1.0)
    assert solve_simplex(lp).status == Status.UNBOUNDED
    assert solve_highs(lp).status == Status.UNBOUNDED


def test_validation_errors():
    lp = small_lp()
    lp.add_constraint({5: 1.0}, Relation.LE, 1.0)
    with pytest.raises(DimensionMismatch):
        solve(lp)
    with pytest.raises(ConfigError):
        solve(small_lp(), 'glpk')


def test_text_format_round_trip():
    lp = small_lp()
    lp.upper[0] = 1.0
    again = LinearProgram.from_text(lp.to_text())
    assert again.sense == Sense.MAX
    assert again.upper == [1.0, math.inf]
    assert solve(again, 'simplex').value == pytest.approx(solve(lp, 'simplex').value)
    with pytest.raises(DimensionMismatch):
        LinearProgram.from_text("min\n1 1\n1 2 3\nend\n")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(min_value=0, max_value=5), min_size=3, max_size=3),
                min_size=1, max_size=4),
       st.lists(st.integers(min_value=1, max_value=5), min_size=3, max_size=3))
def test_simplex_agrees_with_highs(rows, costs):
    # couverture : min c.x sous A x >= 1, toujours réalisable quand chaque ligne a un coefficient
    lp = LinearProgram()
    for c in costs:
        lp.add_variable(cost=float(c))
    for row in rows:
        if any(row):
            lp.add_constraint({j: float(v) for j, v in enumerate(row) if v}, Relation.GE, 1.0)
    ours = solve_simplex(lp)
    ref = solve_highs(lp)
    assert ours.status == ref.status == Status.OPTIMAL
    assert ours.value == pytest.approx(ref.value, abs=1e-7)
