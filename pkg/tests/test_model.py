import logging
import math

import pytest
from hypothesis import given, settings

from helpers import instances
from shared.bounds import DemandProfile, eta, lower_bound, profile_of
from shared.errors import (
    BothCostParamsZero, DemandOutOfRange, EtaZero, InvalidDemandSpec, LoadInconsistency,
    MetricViolation, PrematureReveal,
)
from shared.instance import (
    DemandSpec, Instance, Realization, RevealedDemands, build_instance,
)
from shared.itinerary import (
    Itinerary, Mode, Tour, ViolationKind, best_direction, cumulative_cost, tour_cost,
    validate_itinerary,
)


# ============================================
# INSTANCES
# ============================================

def test_build_instance_normalizes_capacity():
    inst = build_instance([2.0, 4.0], a=1.0, b=0.5, Q=4.0, points=[[0, 0], [1, 0], [0, 1]])
    assert inst.fixed_realization().d == (0.5, 1.0)
    assert inst.b == pytest.approx(2.0)
    assert inst.gamma == pytest.approx(0.5)
    # la forme JSON revient en unités d'origine
    again = Instance.from_dict(inst.to_dict())
    assert again.fixed_realization().d == inst.fixed_realization().d
    assert again.b == pytest.approx(inst.b)


def test_build_instance_rejects_bad_input():
    with pytest.raises(BothCostParamsZero):
        build_instance([0.5], a=0.0, b=0.0, points=[[0, 0], [1, 0]])
    with pytest.raises(DemandOutOfRange):
        build_instance([1.5], a=1.0, b=1.0, points=[[0, 0], [1, 0]])
    with pytest.raises(MetricViolation):
        build_instance([0.5, 0.5], a=1.0, b=1.0,
                       matrix=[[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(InvalidDemandSpec):
        DemandSpec((0.2, 0.4), (0.5, 0.6))


def test_zero_demand_customers_are_dropped(caplog):
    caplog.set_level(logging.WARNING, logger='cuvrp')
    inst = build_instance([0.5, 0.0, 0.3], a=1.0, b=1.0,
                          points=[[0, 0], [1, 0], [2, 0], [3, 0]])
    assert inst.n == 2
    assert inst.labels == (1, 3)
    assert 'retirés' in caplog.text


def test_gamma_is_infinite_when_b_is_zero():
    inst = build_instance([0.5], a=1.0, b=0.0, points=[[0, 0], [1, 0]])
    assert math.isinf(inst.gamma)


def test_realizations_cover_the_support():
    inst = build_instance([{'values': [0.2, 0.9], 'probs': [0.5, 0.5]}, 0.4], a=1.0, b=1.0,
                          points=[[0, 0], [1, 0], [0, 1]])
    pairs = list(inst.iter_realizations())
    assert inst.support_size() == 2
    assert math.fsum(p for p, _ in pairs) == pytest.approx(1.0)
    assert {r.d for _, r in pairs} == {(0.2, 0.4), (0.9, 0.4)}
    with pytest.raises(DemandOutOfRange):
        inst.check_realization(Realization.of([0.5, 0.4]))


def test_demands_are_hidden_until_visited():
    revealed = RevealedDemands(Realization.of([0.3, 0.7]))
    with pytest.raises(PrematureReveal):
        revealed[2]
    assert revealed.reveal(2) == 0.7
    assert revealed[2] == 0.7
    assert revealed.access_log == [2]
    assert not revealed.is_revealed(1)
    assert revealed.reveal_all().d == (0.3, 0.7)
    assert revealed.is_revealed(1)


# ============================================
# TOURNÉES ET COÛT
# ============================================

def test_singleton_cost(line_instance):
    tour = Tour.singleton(2, 0.6)
    cost = tour_cost(tour, line_instance)
    assert cost.vehicle_cost == pytest.approx(4.0)
    assert cost.cargo_cost == pytest.approx(1.2)
    assert tour.weight(line_instance) == pytest.approx(4.0)
    assert Tour.from_deliveries([1, 2], [0.3, 0.3]).weight(line_instance) == pytest.approx(4.0)


def test_load_inconsistency_is_detected(line_instance):
    bad = Tour(stops=(0, 1, 0), loads=(0.6, 0.3), delivered=(0.0, 0.6, 0.0))
    with pytest.raises(LoadInconsistency):
        tour_cost(bad, line_instance)


def test_best_direction_keeps_light_load_on_long_edges(line_instance):
    # le client proche servi en premier vide le camion avant l'arête la plus longue
    tour = Tour.from_deliveries([2, 1], [0.3, 0.1])
    best = best_direction(tour, line_instance)
    assert best.customers == (1, 2)
    assert tour_cost(best, line_instance).total < tour_cost(tour, line_instance).total
    assert tour_cost(best, line_instance).total == pytest.approx(4.0 + 0.7)


def test_cumulative_cost_sums_tours(line_instance):
    itinerary = Itinerary.of([Tour.singleton(1, 0.6), Tour.singleton(2, 0.6)])
    assert cumulative_cost(itinerary, line_instance).total == pytest.approx(7.8)


def test_validate_itinerary_reports_violations():
    realization = Realization.of([0.6, 0.6])
    split = Itinerary.of([Tour.from_deliveries([1], [0.3]),
                          Tour.from_deliveries([1, 2], [0.3, 0.6])])
    assert validate_itinerary(split, realization, Mode.UNSPLITTABLE).kinds() == \
        [ViolationKind.SPLIT_VIOLATION]
    assert validate_itinerary(split, realization, Mode.SPLITTABLE).ok

    heavy = Itinerary.of([Tour.from_deliveries([1, 2], [0.6, 0.6])])
    assert validate_itinerary(heavy, realization).kinds() == [ViolationKind.CAPACITY]

    short = Itinerary.of([Tour.singleton(1, 0.6)])
    report = validate_itinerary(short, realization)
    assert report.kinds() == [ViolationKind.UNMET_DEMAND]
    assert not report.ok
    assert report.to_dict()['violations'][0]['customer'] == 2


# ============================================
# BORNE INFÉRIEURE
# ============================================

def test_lower_bound_on_line(line_instance):
    report = lower_bound(line_instance, line_instance.fixed_realization(), tau=4.0)
    assert report.eta == pytest.approx(3.6)
    assert report.lb == pytest.approx(5.8)
    assert report.sigma == pytest.approx(4.0 / 3.6)


def test_profile_requires_positive_eta():
    inst = build_instance([{'values': [0.0, 0.5], 'probs': [0.5, 0.5]}], a=1.0, b=1.0,
                          points=[[0, 0], [1, 0]])
    zero = Realization.of([0.0])
    assert eta(inst, zero) == 0.0
    assert profile_of(inst, zero) is None
    with pytest.raises(EtaZero):
        DemandProfile.from_realization(inst, zero)


@settings(max_examples=60, deadline=None)
@given(instances(stochastic=False))
def test_profile_invariants(inst):
    profile = DemandProfile.from_realization(inst, inst.fixed_realization())
    assert profile.integral(0.0, 1.0, 1) == pytest.approx(1.0)
    assert profile.check_invariants()
    assert profile.check_invariants(0.25, 0.75)
    assert 0.0 <= profile.mu(1.0) <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        profile.integral(0.0, 1.0, 3)
