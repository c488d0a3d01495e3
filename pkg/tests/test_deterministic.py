import pytest
from hypothesis import given, settings, strategies as st

from helpers import instances
from shared.errors import ConfigError, InfeasibleDemand
from shared.instance import Realization, build_instance
from shared.itinerary import Itinerary, Mode, cumulative_cost, validate_itinerary
from solver.deterministic import (
    alg3, alg3_delta_schedule, alg4, optimal_partition_dp, record_then_solve,
)
from solver.oracle import brute_force_opt
from solver.policies import PolicyParams, alg_s
from solver.tsp import exact_tsp


def cost(run, instance):
    return cumulative_cost(run.itinerary, instance).total


def test_alg4_trims_tours(line_instance):
    tour = exact_tsp(line_instance)
    run = alg4(line_instance, 1.0, tour=tour, initial_load=0.5)
    assert run.trace.policy == 'alg4'
    assert all(abs(t.loads[-1]) < 1e-12 for t in run.itinerary)
    assert validate_itinerary(run.itinerary, line_instance.fixed_realization()).ok


def test_partition_dp_on_line(line_instance):
    run = optimal_partition_dp(line_instance, line_instance.fixed_realization())
    # deux allers-retours : 2.6 + 5.2
    assert run.trace.notes['value'] == pytest.approx(7.8)
    assert cost(run, line_instance) == pytest.approx(7.8)
    assert len(run.itinerary) == 2
    split = optimal_partition_dp(line_instance, line_instance.fixed_realization(), splittable=True)
    assert cost(split, line_instance) <= 7.8 + 1e-9
    assert validate_itinerary(split.itinerary, line_instance.fixed_realization(), Mode.SPLITTABLE).ok


def test_partition_dp_rejects_oversized_demand():
    inst = build_instance([0.5], a=1.0, b=1.0, Q=1.0, points=[[0, 0], [1, 0]])
    fixed = inst.with_fixed_demands(Realization.of([1.5]))
    with pytest.raises(InfeasibleDemand):
        optimal_partition_dp(fixed, Realization.of([1.5]))


@settings(max_examples=40, deadline=None)
@given(instances(max_n=5, stochastic=False), st.floats(min_value=0.0, max_value=0.999))
def test_partition_dp_sits_between_opt_and_alg4(inst, fraction):
    realization = inst.fixed_realization()
    tour = exact_tsp(inst)
    dp = optimal_partition_dp(inst, realization, tour)
    assert validate_itinerary(dp.itinerary, realization).ok
    assert cost(dp, inst) == pytest.approx(dp.trace.notes['value'])
    opt = brute_force_opt(inst, realization).value
    assert opt <= cost(dp, inst) + 1e-9
    run = alg4(inst, 1.0, tour=tour, initial_load=fraction)
    assert validate_itinerary(run.itinerary, realization).ok
    assert cost(dp, inst) <= cost(run, inst) + 1e-9


@settings(max_examples=40, deadline=None)
@given(instances(max_n=5, stochastic=False), st.floats(min_value=0.0, max_value=0.999))
def test_split_partition_beats_alg_s(inst, fraction):
    realization = inst.fixed_realization()
    tour = exact_tsp(inst)
    dp = optimal_partition_dp(inst, realization, tour, splittable=True)
    assert validate_itinerary(dp.itinerary, realization, Mode.SPLITTABLE).ok
    run = alg_s(inst, realization, tour=tour, initial_load=fraction)
    assert cost(dp, inst) <= cost(run, inst) + 1e-9


@settings(max_examples=30, deadline=None)
@given(instances(min_n=2, max_n=6, stochastic=False), st.integers(min_value=0, max_value=2 ** 31),
       st.sampled_from([0.5, 1.0 / 3.0, 0.25]))
def test_alg3_is_feasible(inst, seed, delta):
    run = alg3(inst, PolicyParams(lam=1.0, delta=delta), rng=seed, tour=exact_tsp(inst))
    realization = inst.fixed_realization()
    assert validate_itinerary(run.itinerary, realization).ok
    assert run.trace.notes['lp_objective'] >= 0.0
    again = alg3(inst, PolicyParams(lam=1.0, delta=delta), rng=seed, tour=exact_tsp(inst))
    assert again.itinerary == run.itinerary


def test_alg3_needs_unit_fraction(triangle_instance):
    with pytest.raises(ConfigError):
        alg3(triangle_instance, PolicyParams(lam=1.0, delta=0.3), rng=1)


def test_delta_schedule():
    # epsilon' = 0.08 : ceil(1.08 / 0.08) = 14
    assert alg3_delta_schedule(float('inf'), 1.5, 0.2) == pytest.approx(1.0 / 14.0)
    # lambda = 0.5 impose delta <= 1/4
    assert alg3_delta_schedule(0.375, 1.5, 10.0) == pytest.approx(0.25)
    with pytest.raises(ConfigError):
        alg3_delta_schedule(1.0, 1.5, 0.0)


def test_record_then_solve(line_instance):
    realization = line_instance.fixed_realization()
    tour = exact_tsp(line_instance)
    run = record_then_solve(line_instance, realization,
                            lambda fixed: optimal_partition_dp(fixed, realization, tour), tour)
    assert run.trace.policy == 'record+partition_dp'
    assert run.itinerary.tours[0].total_delivered == 0.0
    assert cost(run, line_instance) == pytest.approx(7.8 + 4.0)
    assert validate_itinerary(run.itinerary, realization).ok
    assert isinstance(run.itinerary, Itinerary)
