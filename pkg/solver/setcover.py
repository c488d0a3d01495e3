"""
Couverture par ensembles pondérés sur les gros clients.

Un ensemble réalisable est un groupe de clients de demande totale <= 1,
servi par une seule tournée de coût cumulé minimal.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from shared.constants import COVER_TOLERANCE, LN2, LOAD_TOLERANCE
from shared.errors import (
    CoverInfeasible, ExplosionGuard, LpInfeasible, SetTooLarge, UniverseTooLarge,
)
from shared.instance import Instance, Realization
from shared.itinerary import Tour, tour_cost
from shared.log import get_logger
from solver import lp as LP

logger = get_logger('setcover')


@dataclass(frozen=True)
class FeasibleSet:
    members: Tuple[int, ...]
    total_demand: float
    tour: Optional[Tour]
    cost: float

    def contains(self, customer: int) -> bool:
        return customer in self.members


def as_sets(sets: Sequence) -> List[FeasibleSet]:
    """Accepte des FeasibleSet ou des couples (membres, poids)."""
    out = []
    for s in sets:
        if isinstance(s, FeasibleSet):
            out.append(s)
        else:
            members, weight = s
            out.append(FeasibleSet(tuple(sorted(members)), 0.0, None, float(weight)))
    return out


# ============================================
# ÉNUMÉRATION
# ============================================

def min_cost_tour(members: Sequence[int], instance: Instance, realization: Realization,
                  limit: int = 6) -> Tuple[Tour, float]:
    """Meilleur ordre de visite (les deux sens sont des permutations) ; départ chargé du total exact."""
    if len(members) > limit:
        raise SetTooLarge('min_cost_tour', len(members), limit)
    best_tour, best_cost = None, math.inf
    for order in itertools.permutations(members):
        tour = Tour.from_deliveries(order, [realization.demand(v) for v in order])
        cost = tour_cost(tour, instance).total
        if cost < best_cost:
            best_tour, best_cost = tour, cost
    return best_tour, best_cost


def large_customers(realization: Realization, delta: float) -> List[int]:
    return [v for v in range(1, len(realization) + 1) if realization.demand(v) > delta]


def enumerate_feasible_sets(instance: Instance, realization: Realization, delta: float,
                            cap: Optional[int] = None,
                            tour_limit: Optional[int] = None) -> List[FeasibleSet]:
    """Tous les sous-ensembles de V* = {d > delta} de demande totale <= 1, avec leur tournée optimale."""
    from admin.config import get_config

    settings = get_config().setcover
    cap = settings.set_cap if cap is None else cap
    tour_limit = settings.tour_size_limit if tour_limit is None else tour_limit

    universe = large_customers(realization, delta)
    groups: List[Tuple[int, ...]] = []

    def extend(start: int, current: List[int], load: float):
        for k in range(start, len(universe)):
            v = universe[k]
            total = load + realization.demand(v)
            if total > 1.0 + LOAD_TOLERANCE:
                continue
            current.append(v)
            groups.append(tuple(current))
            if len(groups) > cap:
                raise ExplosionGuard('enumerate_feasible_sets', len(groups), cap)
            extend(k + 1, current, total)
            current.pop()

    extend(0, [], 0.0)
    groups.sort(key=lambda g: (len(g), g))

    sets = []
    for g in groups:
        tour, cost = min_cost_tour(g, instance, realization, tour_limit)
        sets.append(FeasibleSet(g, math.fsum(realization.demand(v) for v in g), tour, cost))
    logger.debug("%d ensembles réalisables sur %d gros clients (delta=%.4g)",
                 len(sets), len(universe), delta)
    return sets


# ============================================
# COUVERTURES ENTIÈRES
# ============================================

@dataclass(frozen=True)
class CoverResult:
    chosen: Tuple[int, ...]
    weight: float
    # garantie : 1 pour l'optimum, H_k pour le glouton
    rho: float
    method: str


def _check_coverable(universe: Sequence[int], sets: List[FeasibleSet]):
    covered = set()
    for s in sets:
        covered.update(s.members)
    for v in universe:
        if v not in covered:
            raise CoverInfeasible(v)


def harmonic(k: int) -> float:
    return math.fsum(1.0 / i for i in range(1, k + 1))


def greedy_cover(universe: Sequence[int], sets: Sequence) -> CoverResult:
    """Glouton pondéré : coût par élément nouvellement couvert minimal, égalités vers le plus petit indice."""
    sets = as_sets(sets)
    _check_coverable(universe, sets)
    remaining = set(universe)
    chosen = []
    while remaining:
        best, best_ratio = -1, math.inf
        for i, s in enumerate(sets):
            new = len(remaining.intersection(s.members))
            if new == 0:
                continue
            ratio = s.cost / new
            if ratio < best_ratio:
                best, best_ratio = i, ratio
        chosen.append(best)
        remaining.difference_update(sets[best].members)
    k = max((len(set(s.members) & set(universe)) for s in sets), default=1)
    weight = math.fsum(sets[i].cost for i in chosen)
    return CoverResult(tuple(chosen), weight, harmonic(k), 'greedy')


def exact_cover(universe: Sequence[int], sets: Sequence, limit: int = 20,
                fallback: bool = True) -> CoverResult:
    """
    Couverture de poids minimal par programmation dynamique sur les parties de l'univers.
    Au-delà de limit éléments : glouton (fallback) ou UniverseTooLarge.
    """
    sets = as_sets(sets)
    universe = list(universe)
    _check_coverable(universe, sets)
    u = len(universe)
    if u > limit:
        if not fallback:
            raise UniverseTooLarge('exact_cover', u, limit)
        result = greedy_cover(universe, sets)
        logger.warning("univers de %d éléments > %d : couverture gloutonne (rho = H_k = %.4f)",
                       u, limit, result.rho)
        return result
    if u == 0:
        return CoverResult((), 0.0, 1.0, 'exact')

    bit = {v: 1 << k for k, v in enumerate(universe)}
    set_masks = [sum(bit[v] for v in s.members if v in bit) for s in sets]
    by_element: Dict[int, List[int]] = {k: [] for k in range(u)}
    for i, mask in enumerate(set_masks):
        for k in range(u):
            if mask >> k & 1:
                by_element[k].append(i)

    full = (1 << u) - 1
    best = np.full(1 << u, np.inf)
    choice = np.full(1 << u, -1, dtype=np.int64)
    previous = np.full(1 << u, -1, dtype=np.int64)
    best[0] = 0.0
    for mask in range(full):
        if not math.isfinite(best[mask]):
            continue
        missing = full & ~mask
        k = (missing & -missing).bit_length() - 1
        for i in by_element[k]:
            target = mask | set_masks[i]
            value = best[mask] + sets[i].cost
            if value < best[target]:
                best[target] = value
                choice[target] = i
                previous[target] = mask

    chosen = []
    mask = full
    while mask:
        chosen.append(int(choice[mask]))
        mask = int(previous[mask])
    chosen.reverse()
    return CoverResult(tuple(chosen), float(best[full]), 1.0, 'exact')


# ============================================
# RELAXATION LINÉAIRE ET ARRONDI
# ============================================

@dataclass(frozen=True, eq=False)
class FractionalCover:
    universe: Tuple[int, ...]
    sets: Tuple[FeasibleSet, ...]
    x: np.ndarray
    objective: float

    def coverage(self, v: int) -> float:
        return math.fsum(self.x[i] for i, s in enumerate(self.sets) if v in s.members)

    def is_valid(self, tol: float = COVER_TOLERANCE) -> bool:
        return all(self.coverage(v) >= 1.0 - tol for v in self.universe)


def cover_lp(universe: Sequence[int], sets: Sequence, backend: Optional[str] = None) -> FractionalCover:
    """min somme Cu(S) x_S  s.c.  somme_{S contient v} x_S >= 1, 0 <= x_S <= 1."""
    sets = as_sets(sets)
    universe = tuple(universe)
    if not sets:
        if universe:
            raise CoverInfeasible(universe[0])
        return FractionalCover((), (), np.zeros(0), 0.0)
    program = LP.LinearProgram(sense=LP.Sense.MIN)
    for i, s in enumerate(sets):
        program.add_variable(f"x{i}", cost=s.cost, lower=0.0, upper=1.0)
    for v in universe:
        program.add_constraint({i: 1.0 for i, s in enumerate(sets) if v in s.members},
                               LP.Relation.GE, 1.0, name=f"cover_{v}")

    result = LP.solve(program, backend)
    if result.status != LP.Status.OPTIMAL:
        raise LpInfeasible(f"PL de couverture: {result.status.value}")
    return FractionalCover(universe, tuple(sets), np.clip(result.x, 0.0, 1.0), result.value)


@dataclass
class RoundingResult:
    selected: List[int] = field(default_factory=list)
    covered: Set[int] = field(default_factory=set)
    # tournées raccourcies : chaque client couvert apparaît dans une seule
    tours: List[Tour] = field(default_factory=list)


def selection_probabilities(cover: FractionalCover) -> np.ndarray:
    return np.minimum(LN2 * cover.x, 1.0)


def randomized_rounding(cover: FractionalCover, rng: np.random.Generator) -> RoundingResult:
    """Chaque ensemble est retenu indépendamment avec la probabilité min(ln2 * x_S, 1)."""
    probs = selection_probabilities(cover)
    draws = rng.random(len(probs))
    result = RoundingResult()
    for i in np.nonzero(draws < probs)[0]:
        s = cover.sets[int(i)]
        fresh = [v for v in (s.tour.customers if s.tour else s.members) if v not in result.covered]
        result.selected.append(int(i))
        if not fresh:
            continue
        if s.tour is not None:
            served = s.tour.deliveries()
            result.tours.append(Tour.from_deliveries(fresh, [served[v] for v in fresh]))
        result.covered.update(fresh)
    return result


@dataclass(frozen=True)
class RoundingBounds:
    # max sur v de prod_{S contient v} (1 - min(ln2 x_S, 1))
    max_miss_probability: float
    expected_weight: float
    ln2_objective: float


def rounding_bounds(cover: FractionalCover) -> RoundingBounds:
    probs = selection_probabilities(cover)
    miss = 0.0
    for v in cover.universe:
        p = 1.0
        for i, s in enumerate(cover.sets):
            if v in s.members:
                p *= 1.0 - probs[i]
        miss = max(miss, p)
    expected = math.fsum(s.cost * probs[i] for i, s in enumerate(cover.sets))
    return RoundingBounds(miss, expected, LN2 * cover.objective)
