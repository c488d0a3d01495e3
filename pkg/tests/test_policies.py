import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import circular_distance, instances
from shared.bounds import lower_bound
from shared.errors import ConfigError, DemandOutOfRange
from shared.instance import Realization, build_instance
from shared.itinerary import Itinerary, Mode, cumulative_cost, validate_itinerary
from solver.policies import (
    Case, PolicyParams, alg1, alg1_lambda0, alg2, alg_s, draw_initial_load, serve_large_customers,
)
from solver.tsp import TourResult, exact_tsp

LINE_TOUR = TourResult((0, 1, 2, 0), 4.0, 1.0, 1.0, 'exact')


@st.composite
def policy_params(draw):
    lam = draw(st.floats(min_value=0.3, max_value=1.0))
    delta = draw(st.floats(min_value=0.0, max_value=lam / 2.0))
    return PolicyParams(lam=lam, delta=delta)


# ============================================
# PARAMÈTRES
# ============================================

@pytest.mark.parametrize('kwargs', [
    {'lam': 0.0}, {'lam': 1.2}, {'delta': -0.1}, {'lam': 0.5, 'delta': 0.3},
    {'theta': 1.0}, {'p': 1.5},
])
def test_params_validation(kwargs):
    with pytest.raises(ConfigError):
        PolicyParams(**kwargs)


def test_unit_fraction_snaps_delta():
    assert PolicyParams(delta=0.3333).unit_fraction().delta == 1.0 / 3.0
    assert PolicyParams(delta=0.25).unit_fraction().delta == 0.25
    for delta in (0.0, 0.3):
        with pytest.raises(ConfigError):
            PolicyParams(delta=delta).unit_fraction()
    assert PolicyParams(lam=0.8, delta=0.2).gap == pytest.approx(0.6)


def test_initial_load_needs_a_seed(line_instance):
    with pytest.raises(ConfigError):
        alg1(line_instance, line_instance.fixed_realization(), tour=LINE_TOUR)
    first = draw_initial_load(7, 0.8)
    assert first == draw_initial_load(7, 0.8)
    assert 0.0 <= first < 0.8


# ============================================
# ALG.1 SUR LA DEMI-DROITE
# ============================================

def test_alg1_refill(line_instance):
    run = alg1(line_instance, line_instance.fixed_realization(), tour=LINE_TOUR, initial_load=0.5)
    assert run.trace.cases() == [Case.REFILL, Case.DELIVER]
    assert run.trace.additional_visits == 2
    assert [s.load_after for s in run.trace.steps] == pytest.approx([0.9, 0.3])
    # parcours jusqu'à 1 (3.0), aller-retour seul (2.6), puis reprise chargé de 0.9 (6.4)
    assert run.cost(line_instance) == pytest.approx(12.0)
    assert validate_itinerary(run.itinerary, line_instance.fixed_realization()).ok


def test_alg1_backup(line_instance):
    params = PolicyParams(lam=1.0, delta=0.2)
    run = alg1(line_instance, line_instance.fixed_realization(), params, tour=LINE_TOUR,
               initial_load=0.5)
    assert run.trace.cases() == [Case.BACKUP, Case.DELIVER]
    assert run.trace.additional_visits == 1
    assert run.trace.steps[0].load_after == pytest.approx(0.7)
    assert len(run.itinerary) == 2
    assert validate_itinerary(run.itinerary, line_instance.fixed_realization()).ok


def test_alg1_records_customers_above_lambda(line_instance):
    run = alg1(line_instance, line_instance.fixed_realization(), PolicyParams(lam=0.5),
               tour=LINE_TOUR, initial_load=0.2)
    assert run.trace.cases() == [Case.RECORD, Case.RECORD]
    assert run.trace.skipped == [1, 2]
    assert [t.customers for t in run.itinerary][1:] == [(1,), (2,)]
    assert validate_itinerary(run.itinerary, line_instance.fixed_realization()).ok


def test_trace_serialization(line_instance):
    run = alg1(line_instance, line_instance.fixed_realization(), tour=LINE_TOUR, rng=3)
    lines = run.trace.to_json_lines()
    assert len(lines) == 3
    assert '"policy": "alg1"' in lines[0]
    assert run.trace.to_dict()['steps'][0]['case'] in {'1', '2', '3.1'}


def test_full_capacity_demand_is_refilled():
    inst = build_instance([{'values': [0.5, 1.0], 'probs': [0.5, 0.5]}], a=1.0, b=1.0,
                          points=[[0, 0], [1, 0]])
    tour = exact_tsp(inst)
    run = alg1(inst, Realization.of([1.0]), tour=tour, initial_load=0.1)
    assert run.trace.cases() == [Case.REFILL]
    assert run.trace.steps[0].load_after == pytest.approx(0.1)
    assert validate_itinerary(run.itinerary, Realization.of([1.0])).ok
    with pytest.raises(DemandOutOfRange):
        alg1(inst, Realization.of([0.7]), tour=tour, initial_load=0.1)


@settings(max_examples=80, deadline=None)
@given(instances(), policy_params(), st.integers(min_value=0, max_value=2 ** 31), st.booleans())
def test_alg1_is_feasible_and_rotates_loads(inst, params, seed, shortcut):
    from admin.config import get_config

    get_config().policy.shortcut_case31 = shortcut
    realization = inst.sample_realization(np.random.default_rng(seed))
    tour = exact_tsp(inst)
    run = alg1(inst, realization, params, rng=seed, tour=tour)
    assert validate_itinerary(run.itinerary, realization, Mode.UNSPLITTABLE).ok
    assert 0.0 <= run.trace.initial_load < params.gap

    served = 0.0
    for step in run.trace.steps:
        assert 0.0 <= step.load_after <= params.gap + 1e-9
        if step.case in (Case.DELIVER, Case.BACKUP, Case.REFILL):
            served += step.demand
        expected = run.trace.initial_load - served
        assert circular_distance(step.load_after, expected, params.gap) < 1e-7
        assert step.case != Case.RECORD or step.demand > params.lam


@settings(max_examples=40, deadline=None)
@given(instances(a=0.0))
def test_alg1_lambda0_is_exact_without_vehicle_cost(inst):
    _, realization = next(inst.iter_realizations())
    tour = exact_tsp(inst)
    run = alg1_lambda0(inst, realization, tour)
    assert validate_itinerary(run.itinerary, realization).ok
    lb = lower_bound(inst, realization, tour.weight).lb
    assert run.cost(inst) == pytest.approx(lb)


# ============================================
# ALG.2
# ============================================

def test_alg2_small_customers_never_refill():
    inst = build_instance([0.2, 0.3, 0.6], a=1.0, b=1.0, points=[[0, 0], [1, 0], [2, 0], [3, 0]])
    run = alg2(inst, inst.fixed_realization(), PolicyParams(delta=1.0 / 3.0),
               tour=TourResult((0, 1, 2, 3, 0), 6.0, 1.0, 1.0, 'exact'), initial_load=0.1)
    assert run.trace.cases()[2] == Case.SKIP
    assert set(run.trace.cases()[:2]) <= {Case.DELIVER, Case.BACKUP}
    assert run.trace.skipped == [3]
    assert run.trace.notes['cover'] == 'T1'
    assert validate_itinerary(run.itinerary, inst.fixed_realization()).ok


def test_large_customers_grouped_when_cheaper():
    inst = build_instance([0.4, 0.4], a=1.0, b=1.0, points=[[0, 0], [10, 0], [10, 1]])
    service = serve_large_customers(inst, inst.fixed_realization(), [1, 2], 1.0 / 3.0)
    assert service.choice == 'T2'
    assert len(service.tours) == 1
    assert service.cost < service.singleton_cost
    assert service.cost == pytest.approx(cumulative_cost(Itinerary.of(service.tours), inst).total)


# ============================================
# ALG.S
# ============================================

def test_alg_s_splits(line_instance):
    run = alg_s(line_instance, line_instance.fixed_realization(), tour=LINE_TOUR, initial_load=0.5)
    assert [s.visits for s in run.trace.steps] == [1, 0]
    assert run.trace.steps[-1].load_after == pytest.approx(0.3)
    report = validate_itinerary(run.itinerary, line_instance.fixed_realization(), Mode.SPLITTABLE)
    assert report.ok
    assert not validate_itinerary(run.itinerary, line_instance.fixed_realization()).ok


@settings(max_examples=60, deadline=None)
@given(instances(), st.floats(min_value=0.2, max_value=1.0), st.integers(min_value=0, max_value=2 ** 31))
def test_alg_s_is_feasible(inst, lam, seed):
    realization = inst.sample_realization(np.random.default_rng(seed))
    run = alg_s(inst, realization, PolicyParams(lam=lam), rng=seed, tour=exact_tsp(inst))
    assert validate_itinerary(run.itinerary, realization, Mode.SPLITTABLE).ok
    assert all(s.case == Case.SPLIT for s in run.trace.steps)
    assert math.isfinite(run.cost(inst))
