"""
Politiques à demandes connues (Cu-VRP) : ALG.3, ALG.4, relevé puis résolution,
et découpage optimal de la tournée TSP par programmation dynamique.
"""

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from shared.constants import CAPACITY, LOAD_TOLERANCE
from shared.errors import ConfigError, InfeasibleDemand
from shared.instance import Instance, Realization
from shared.itinerary import Itinerary, Tour, best_direction
from shared.log import get_logger
from shared.seeding import STREAM_ROUNDING, as_streams
from solver.policies import (
    PolicyParams, PolicyRun, PolicyTrace, Seed, alg1, draw_initial_load, resolve_tour, traverse,
)
from solver.tsp import TourResult

logger = get_logger('deterministic')


def trim_and_orient(tour: Tour, instance: Instance) -> Tour:
    """Charge au départ = total livré, puis le sens le moins coûteux."""
    return best_direction(tour.trimmed(), instance)


# ============================================
# ALG.4
# ============================================

def alg4(instance: Instance, lam: float = 1.0, rng: Seed = None,
         tour: Optional[TourResult] = None, initial_load: Optional[float] = None) -> PolicyRun:
    """ALG.1(lambda, 0) sur les demandes connues, chaque tournée rognée et orientée."""
    realization = instance.fixed_realization()
    run = alg1(instance, realization, PolicyParams(lam=lam), rng, tour, initial_load)
    tours = [trim_and_orient(t, instance) for t in run.itinerary]
    run.trace.policy = 'alg4'
    return PolicyRun(Itinerary.of(tours), run.trace)


# ============================================
# ALG.3
# ============================================

def alg3_delta_schedule(gamma: float, alpha: float, epsilon: float) -> float:
    """delta = 1 / ceil((1 + e') / (lambda e')), e' = epsilon / (1 + alpha), borné par lambda/2."""
    if epsilon <= 0:
        raise ConfigError(f"epsilon={epsilon} doit être > 0")
    eps = epsilon / (1.0 + alpha)
    lam = 1.0 if math.isinf(gamma) else min(1.0, 2.0 * gamma / alpha)
    k = math.ceil((1.0 + eps) / (lam * eps))
    k = max(k, math.ceil(2.0 / lam))
    return 1.0 / k


def alg3(instance: Instance, params: Optional[PolicyParams] = None, rng: Seed = None,
         tour: Optional[TourResult] = None, initial_load: Optional[float] = None) -> PolicyRun:
    """
    ALG.3(lambda, delta) : les gros clients (d > delta) sont couverts par arrondi
    aléatoire du PL de couverture ; les autres par ALG.1(lambda, delta).
    """
    from solver.setcover import cover_lp, enumerate_feasible_sets, large_customers, randomized_rounding

    params = (params or PolicyParams(delta=1.0 / 3.0)).unit_fraction()
    tour = resolve_tour(instance, tour)
    realization = instance.fixed_realization()

    large = large_customers(realization, params.delta)
    sets = enumerate_feasible_sets(instance, realization, params.delta)
    cover = cover_lp(large, sets)
    streams = as_streams(rng)
    rounding = randomized_rounding(cover, streams.generator(STREAM_ROUNDING))

    order = [v for v in tour.order if v not in rounding.covered]
    if initial_load is None:
        initial_load = draw_initial_load(streams, params.gap)
    builder, trace, revealed = traverse(instance, realization, order, params, initial_load, 'alg3')
    for v in trace.skipped:
        builder.add(Tour.singleton(v, revealed[v]))

    trace.notes.update({'lp_objective': cover.objective,
                        'selected_sets': len(rounding.selected),
                        'rounded': sorted(rounding.covered)})
    tours = list(rounding.tours) + [trim_and_orient(t, instance) for t in builder.tours]
    return PolicyRun(Itinerary.of(tours), trace)


# ============================================
# RELEVÉ PUIS RÉSOLUTION
# ============================================

def record_then_solve(instance: Instance, realization: Realization,
                      solver: Callable[[Instance], PolicyRun],
                      tour: Optional[TourResult] = None) -> PolicyRun:
    """Parcours à vide de T* pour relever les demandes, puis un solveur Cu-VRP sur l'instance fixée."""
    tour = resolve_tour(instance, tour)
    instance.check_realization(realization)
    fixed = instance.with_fixed_demands(realization)
    run = solver(fixed)
    survey = Itinerary.of([Tour.empty_traversal(tour.order)])
    run.trace.notes['recorded'] = True
    run.trace.policy = f"record+{run.trace.policy}"
    return PolicyRun(survey.concat(run.itinerary), run.trace)


# ============================================
# DÉCOUPAGE OPTIMAL DE LA TOURNÉE
# ============================================

def _segment_cost(instance: Instance, customers: Sequence[int], amounts: Sequence[float],
                  positions: np.ndarray) -> Tuple[float, bool]:
    """Coût d'un segment servi dans le meilleur sens ; True si le sens inverse gagne."""
    first, last = customers[0], customers[-1]
    head, tail = instance.radial(first), instance.radial(last)
    x = np.asarray(amounts, dtype=float)
    span = positions[-1] - positions[0]
    forward = math.fsum(x * (head + positions - positions[0]))
    backward = math.fsum(x * (tail + positions[-1] - positions))
    vehicle = instance.a * (head + span + tail)
    if backward < forward:
        return vehicle + instance.b * backward, True
    return vehicle + instance.b * forward, False


def _positions(instance: Instance, order: Sequence[int]) -> np.ndarray:
    steps = [instance.w(u, v) for u, v in zip(order, order[1:])]
    return np.concatenate(([0.0], np.cumsum(steps))) if order else np.zeros(0)


def _whole_partition(instance: Instance, order: List[int], demand: np.ndarray,
                     pos: np.ndarray) -> Tuple[float, List[Tuple[int, int]]]:
    m = len(order)
    radial = np.array([instance.radial(v) for v in order])
    sd = np.concatenate(([0.0], np.cumsum(demand)))
    sdp = np.concatenate(([0.0], np.cumsum(demand * pos)))

    best = np.full(m + 1, np.inf)
    cut = np.full(m + 1, -1, dtype=np.int64)
    best[0] = 0.0
    for j in range(m):
        for i in range(j, -1, -1):
            total = sd[j + 1] - sd[i]
            if total > CAPACITY + LOAD_TOLERANCE:
                break
            weighted = sdp[j + 1] - sdp[i]
            forward = total * (radial[i] - pos[i]) + weighted
            backward = total * (radial[j] + pos[j]) - weighted
            vehicle = radial[i] + pos[j] - pos[i] + radial[j]
            value = best[i] + instance.a * vehicle + instance.b * min(forward, backward)
            if value < best[j + 1]:
                best[j + 1] = value
                cut[j + 1] = i

    segments = []
    j = m
    while j > 0:
        i = int(cut[j])
        segments.append((i, j))
        j = i
    segments.reverse()
    return float(best[m]), segments


def _split_breakpoints(bounds: np.ndarray, resolution: Optional[float]) -> np.ndarray:
    """Bornes des clients décalées de capacités entières, dans [0, total]."""
    total = bounds[-1]
    span = int(math.ceil(total)) + 1
    shifts = np.arange(-span, span + 1, dtype=float)
    points = (bounds[:, None] + shifts[None, :]).ravel()
    if resolution:
        points = np.concatenate((points, np.arange(0.0, total, resolution)))
    points = points[(points >= -LOAD_TOLERANCE) & (points <= total + LOAD_TOLERANCE)]
    points = np.clip(np.sort(points), 0.0, total)
    keep = np.concatenate(([True], np.diff(points) > LOAD_TOLERANCE))
    points = points[keep]
    points[-1] = total
    return points


def _split_segment(order: List[int], bounds: np.ndarray, lo: float,
                   hi: float) -> Tuple[List[int], List[int], List[float]]:
    """Clients de recouvrement positif avec [lo, hi), et les quantités livrées."""
    index, customers, amounts = [], [], []
    for k, v in enumerate(order):
        overlap = min(hi, bounds[k + 1]) - max(lo, bounds[k])
        if overlap > LOAD_TOLERANCE:
            index.append(k)
            customers.append(v)
            amounts.append(overlap)
    return index, customers, amounts


def _split_partition(instance: Instance, order: List[int], demand: np.ndarray, pos: np.ndarray,
                     resolution: Optional[float]) -> Tuple[float, List[Tuple[float, float]]]:
    bounds = np.concatenate(([0.0], np.cumsum(demand)))
    points = _split_breakpoints(bounds, resolution)
    K = len(points)
    best = np.full(K, np.inf)
    cut = np.full(K, -1, dtype=np.int64)
    best[0] = 0.0
    for q in range(1, K):
        for p in range(q - 1, -1, -1):
            if points[q] - points[p] > CAPACITY + LOAD_TOLERANCE:
                break
            index, customers, amounts = _split_segment(order, bounds, points[p], points[q])
            if not customers:
                value = best[p]
            else:
                cost, _ = _segment_cost(instance, customers, amounts, pos[index])
                value = best[p] + cost
            if value < best[q]:
                best[q] = value
                cut[q] = p

    intervals = []
    q = K - 1
    while q > 0:
        p = int(cut[q])
        intervals.append((float(points[p]), float(points[q])))
        q = p
    intervals.reverse()
    return float(best[K - 1]), intervals


def optimal_partition_dp(instance: Instance, realization: Realization,
                         tour: Optional[TourResult] = None, splittable: bool = False,
                         resolution: Optional[float] = None) -> PolicyRun:
    """
    Découpe l'ordre de T* en segments consécutifs, chacun servi par une tournée
    chargée de son total livré, dans le meilleur sens. O(n^2) segments.

    splittable : les coupures peuvent tomber à l'intérieur d'un client
    (bornes cumulées décalées d'entiers, plus une grille de pas resolution).
    """
    tour = resolve_tour(instance, tour)
    instance.check_realization(realization)
    order = [v for v in tour.order if realization.demand(v) > 0]
    for v in order:
        if not splittable and realization.demand(v) > CAPACITY + LOAD_TOLERANCE:
            raise InfeasibleDemand(v, realization.demand(v))

    trace = PolicyTrace(policy='partition_dp', params=PolicyParams())
    trace.notes['splittable'] = splittable
    if not order:
        trace.notes['value'] = 0.0
        return PolicyRun(Itinerary(), trace)

    demand = np.array([realization.demand(v) for v in order])
    pos = _positions(instance, order)
    tours: List[Tour] = []
    if splittable:
        value, intervals = _split_partition(instance, order, demand, pos, resolution)
        bounds = np.concatenate(([0.0], np.cumsum(demand)))
        for lo, hi in intervals:
            _, customers, amounts = _split_segment(order, bounds, lo, hi)
            if customers:
                tours.append(best_direction(Tour.from_deliveries(customers, amounts), instance))
    else:
        value, segments = _whole_partition(instance, order, demand, pos)
        for i, j in segments:
            segment = order[i:j]
            tours.append(best_direction(
                Tour.from_deliveries(segment, [realization.demand(v) for v in segment]), instance))

    trace.notes['value'] = value
    logger.debug("découpage optimal: %d tournées, valeur %.6g", len(tours), value)
    return PolicyRun(Itinerary.of(tours), trace)
