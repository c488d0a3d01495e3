"""
Politiques de tournée pour le Cu-VRPSD.

Les demandes sont révélées à l'arrivée chez le client (RevealedDemands).
La charge initiale L_0 est tirée dans le sous-flux 'initial_load' de la graine.
"""

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from shared.constants import CAPACITY, LOAD_TOLERANCE
from shared.errors import ConfigError, InfeasibleDemand
from shared.instance import DEPOT, Instance, Realization, RevealedDemands
from shared.itinerary import Itinerary, Tour, cumulative_cost
from shared.log import get_logger
from shared.seeding import STREAM_INITIAL_LOAD, SeedStreams, as_streams
from solver.tsp import TourResult, get_tour

logger = get_logger('policies')

Seed = Union[int, SeedStreams, None]


# ============================================
# PARAMÈTRES ET TRACES
# ============================================

class Case(str, Enum):
    DELIVER = '1'  # L >= d
    BACKUP = '2'  # L < d <= L + delta
    REFILL = '3.1'  # L + delta < d <= lambda
    RECORD = '3.2'  # d > lambda : servi plus tard seul
    SKIP = 'skip'  # ALG.2 : d > delta, servi par T'
    SPLIT = 'split'  # ALG.S


@dataclass(frozen=True)
class PolicyParams:
    lam: float = 1.0
    delta: float = 0.0
    theta: Optional[float] = None
    p: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.lam <= CAPACITY):
            raise ConfigError(f"lambda={self.lam} hors de ]0, 1]")
        if self.delta < 0.0 or self.delta > self.lam / 2.0 + LOAD_TOLERANCE:
            raise ConfigError(f"delta={self.delta} hors de [0, lambda/2] (lambda={self.lam})")
        if self.theta is not None and not (0.0 < self.theta < 1.0):
            raise ConfigError(f"theta={self.theta} hors de ]0, 1[")
        if self.p is not None and not (0.0 <= self.p <= 1.0):
            raise ConfigError(f"p={self.p} hors de [0, 1]")

    @property
    def gap(self) -> float:
        """lambda - delta : longueur de l'intervalle de L."""
        return self.lam - self.delta

    def unit_fraction(self, tol: float = 1e-3) -> 'PolicyParams':
        """Exige delta = 1/k ; une saisie approchée (0.3333) est recalée sur 1/k."""
        if self.delta <= 0.0:
            raise ConfigError("delta > 0 requis (1/delta entier)")
        k = round(1.0 / self.delta)
        if k < 1 or abs(1.0 / self.delta - k) > tol * k:
            raise ConfigError(f"1/delta doit être entier (delta={self.delta})")
        if self.delta != 1.0 / k:
            logger.debug("delta=%.6g recalé sur 1/%d", self.delta, k)
        return replace(self, delta=1.0 / k)

    def to_dict(self) -> dict:
        return {'lambda': self.lam, 'delta': self.delta, 'theta': self.theta,
                'p': self.p, 'alpha': self.alpha}


@dataclass(frozen=True)
class TraceStep:
    index: int
    customer: int
    case: Case
    demand: float
    load_before: float
    load_after: float
    # retours au dépôt supplémentaires
    visits: int = 0

    def to_dict(self) -> dict:
        return {'step': self.index, 'customer': self.customer, 'case': self.case.value,
                'demand': self.demand, 'L_before': self.load_before,
                'L_after': self.load_after, 'visits': self.visits}


@dataclass
class PolicyTrace:
    policy: str
    params: PolicyParams
    initial_load: float = 0.0
    steps: List[TraceStep] = field(default_factory=list)
    # V* : clients reportés (cas 3.2, ou d > delta pour ALG.2)
    skipped: List[int] = field(default_factory=list)
    # bras tiré par un mélange, et son ordonnancement
    arm: Optional[str] = None
    schedule: Dict[str, float] = field(default_factory=dict)
    notes: Dict[str, object] = field(default_factory=dict)

    @property
    def additional_visits(self) -> int:
        return sum(s.visits for s in self.steps)

    def cases(self) -> List[Case]:
        return [s.case for s in self.steps]

    def to_dict(self) -> dict:
        return {
            'policy': self.policy,
            'params': self.params.to_dict(),
            'initial_load': self.initial_load,
            'skipped': list(self.skipped),
            'arm': self.arm,
            'schedule': dict(self.schedule),
            'notes': {k: v for k, v in self.notes.items()},
            'additional_visits': self.additional_visits,
            'steps': [s.to_dict() for s in self.steps],
        }

    def to_json_lines(self) -> List[str]:
        """Une ligne d'en-tête puis une ligne par étape."""
        header = {k: v for k, v in self.to_dict().items() if k != 'steps'}
        return [json.dumps(header, sort_keys=True)] + [
            json.dumps(s.to_dict(), sort_keys=True) for s in self.steps
        ]


class PolicyRun(NamedTuple):
    itinerary: Itinerary
    trace: PolicyTrace

    def cost(self, instance: Instance) -> float:
        return cumulative_cost(self.itinerary, instance).total


# ============================================
# CONSTRUCTION DES TOURNÉES
# ============================================

class TourBuilder:
    """Accumule les arrêts d'une tournée ouverte ; close() la ferme au dépôt."""

    def __init__(self):
        self.tours: List[Tour] = []
        self._stops: List[int] = []
        self._loads: List[float] = []
        self._delivered: List[float] = []
        self._current = 0.0

    def start(self, load: float):
        self._stops = [DEPOT]
        self._loads = []
        self._delivered = [0.0]
        self._current = load

    def visit(self, customer: int, amount: float):
        self._loads.append(self._current)
        self._stops.append(customer)
        self._delivered.append(amount)
        self._current -= amount

    def close(self):
        self._loads.append(self._current)
        self._stops.append(DEPOT)
        self._delivered.append(0.0)
        self.tours.append(Tour(tuple(self._stops), tuple(self._loads), tuple(self._delivered)))
        self._stops = []

    def add(self, tour: Tour):
        self.tours.append(tour)


def _wrap(value: float, period: float) -> float:
    """Ramène une charge calculée dans [0, period) (erreurs d'arrondi de ceil)."""
    if value >= period:
        value -= period
    return max(value, 0.0)


def resolve_tour(instance: Instance, tour: Optional[TourResult]) -> TourResult:
    return tour if tour is not None else get_tour(instance)


def draw_initial_load(rng: Seed, width: float) -> float:
    streams = as_streams(rng)
    return float(streams.generator(STREAM_INITIAL_LOAD).random()) * width


def _check_feasible(customer: int, demand: float):
    if demand > CAPACITY + LOAD_TOLERANCE:
        raise InfeasibleDemand(customer, demand)


# ============================================
# ALG.1
# ============================================

def traverse(instance: Instance, realization: Realization, order: Sequence[int],
             params: PolicyParams, initial_load: float, policy: str,
             skip_threshold: Optional[float] = None,
             shortcut: bool = False) -> Tuple[TourBuilder, PolicyTrace, RevealedDemands]:
    """
    Parcours de la tournée TSP avec charge L + delta.
    skip_threshold : les clients de demande > seuil sont visités à vide et reportés (ALG.2).
    """
    lam, delta, gap = params.lam, params.delta, params.gap
    revealed = RevealedDemands(realization)
    trace = PolicyTrace(policy=policy, params=params, initial_load=initial_load)
    builder = TourBuilder()

    load = initial_load
    builder.start(load + delta)
    for index, v in enumerate(order):
        d = revealed.reveal(v)
        _check_feasible(v, d)
        before = load
        visits = 0

        if skip_threshold is not None and d > skip_threshold:
            case = Case.SKIP
            builder.visit(v, 0.0)
            trace.skipped.append(v)
        elif d > lam:
            case = Case.RECORD
            builder.visit(v, 0.0)
            trace.skipped.append(v)
        elif d <= load:
            case = Case.DELIVER
            builder.visit(v, d)
            load -= d
        elif d <= load + delta:
            case = Case.BACKUP
            # livre sur la réserve, rentre, repart avec L + delta
            builder.visit(v, d)
            builder.close()
            load = _wrap(load + gap - d, gap)
            builder.start(load + delta)
            builder.visit(v, 0.0)
            visits = 1
        else:
            case = Case.REFILL
            builder.visit(v, 0.0)
            builder.close()
            builder.add(Tour.singleton(v, d))
            load = _wrap(load + math.ceil((d - load) / gap) * gap - d, gap)
            builder.start(load + delta)
            if not shortcut:
                builder.visit(v, 0.0)
            visits = 2

        trace.steps.append(TraceStep(index, v, case, d, before, load, visits))
        logger.debug("%s: client %d, d=%.6g, cas %s, L %.6g -> %.6g",
                     policy, v, d, case.value, before, load)

    builder.close()
    return builder, trace, revealed


def alg1(instance: Instance, realization: Realization, params: Optional[PolicyParams] = None,
         rng: Seed = None, tour: Optional[TourResult] = None,
         initial_load: Optional[float] = None) -> PolicyRun:
    """
    ALG.1(lambda, delta) : parcours de T* en gardant delta de réserve ;
    les clients de demande > lambda sont servis à la fin par des tournées individuelles.
    """
    from admin.config import get_config

    params = params or PolicyParams()
    tour = resolve_tour(instance, tour)
    instance.check_realization(realization)
    if initial_load is None:
        initial_load = draw_initial_load(rng, params.gap)

    builder, trace, revealed = traverse(
        instance, realization, tour.order, params, initial_load, 'alg1',
        shortcut=get_config().policy.shortcut_case31,
    )
    for v in trace.skipped:
        builder.add(Tour.singleton(v, revealed[v]))
    return PolicyRun(Itinerary.of(builder.tours), trace)


def alg1_lambda0(instance: Instance, realization: Realization,
                 tour: Optional[TourResult] = None) -> PolicyRun:
    """Relevé à vide de T*, puis une tournée individuelle par client (exact quand a = 0)."""
    tour = resolve_tour(instance, tour)
    instance.check_realization(realization)
    revealed = RevealedDemands(realization)
    trace = PolicyTrace(policy='alg1_lambda0', params=PolicyParams())

    tours = [Tour.empty_traversal(tour.order)]
    for index, v in enumerate(tour.order):
        d = revealed.reveal(v)
        _check_feasible(v, d)
        trace.steps.append(TraceStep(index, v, Case.RECORD, d, 0.0, 0.0))
        if d > 0:
            trace.skipped.append(v)
    tours.extend(Tour.singleton(v, revealed[v]) for v in trace.skipped)
    return PolicyRun(Itinerary.of(tours), trace)


# ============================================
# ALG.2
# ============================================

@dataclass(frozen=True)
class LargeService:
    """Service T' des gros clients : individuel (T1) ou par couverture exacte (T2)."""
    tours: Tuple[Tour, ...]
    choice: str
    cost: float
    singleton_cost: float
    cover_cost: float


def _shortcut_cover_tours(chosen_tours: Sequence[Tour]) -> List[Tour]:
    """Un client couvert deux fois n'est servi que par le premier ensemble retenu."""
    served = set()
    tours = []
    for tour in chosen_tours:
        amounts = tour.deliveries()
        fresh = [v for v in tour.customers if v not in served]
        if not fresh:
            continue
        served.update(fresh)
        tours.append(Tour.from_deliveries(fresh, [amounts[v] for v in fresh]))
    return tours


def serve_large_customers(instance: Instance, realization: Realization,
                          large: Sequence[int], delta: float) -> LargeService:
    from admin.config import get_config
    from solver.setcover import enumerate_feasible_sets, exact_cover

    if not large:
        return LargeService((), 'T1', 0.0, 0.0, 0.0)

    singles = [Tour.singleton(v, realization.demand(v)) for v in large]
    singles_cost = cumulative_cost(Itinerary.of(singles), instance).total

    sets = enumerate_feasible_sets(instance, realization, delta)
    sets = [s for s in sets if all(v in large for v in s.members)]
    cover = exact_cover(large, sets, get_config().setcover.exact_universe_limit)
    covered = _shortcut_cover_tours([sets[i].tour for i in cover.chosen])
    cover_cost = cumulative_cost(Itinerary.of(covered), instance).total

    if singles_cost <= cover_cost:
        return LargeService(tuple(singles), 'T1', singles_cost, singles_cost, cover_cost)
    return LargeService(tuple(covered), 'T2', cover_cost, singles_cost, cover_cost)


def alg2(instance: Instance, realization: Realization, params: Optional[PolicyParams] = None,
         rng: Seed = None, tour: Optional[TourResult] = None,
         initial_load: Optional[float] = None,
         large_service: Optional[LargeService] = None) -> PolicyRun:
    """
    ALG.2(lambda, delta) : les clients de demande <= delta sont servis le long de T*
    (cas 1 et 2 seulement), les autres par le moins cher de T1 et T2.
    """
    params = (params or PolicyParams(delta=1.0 / 3.0)).unit_fraction()
    tour = resolve_tour(instance, tour)
    instance.check_realization(realization)
    if initial_load is None:
        initial_load = draw_initial_load(rng, params.gap)

    builder, trace, _ = traverse(instance, realization, tour.order, params, initial_load,
                                  'alg2', skip_threshold=params.delta)
    if large_service is None:
        large_service = serve_large_customers(instance, realization, trace.skipped, params.delta)
    trace.notes.update({'cover': large_service.choice,
                        'singleton_cost': large_service.singleton_cost,
                        'cover_cost': large_service.cover_cost})
    for t in large_service.tours:
        builder.add(t)
    return PolicyRun(Itinerary.of(builder.tours), trace)


# ============================================
# ALG.S (cas fractionnable)
# ============================================

def alg_s(instance: Instance, realization: Realization, params: Optional[PolicyParams] = None,
          rng: Seed = None, tour: Optional[TourResult] = None,
          initial_load: Optional[float] = None) -> PolicyRun:
    """Livraison gloutonne min(charge, reste) ; recharge à lambda au dépôt quand elle manque."""
    params = params or PolicyParams()
    lam = params.lam
    tour = resolve_tour(instance, tour)
    instance.check_realization(realization)
    if initial_load is None:
        initial_load = draw_initial_load(rng, lam)

    revealed = RevealedDemands(realization)
    trace = PolicyTrace(policy='alg_s', params=replace(params, delta=0.0),
                        initial_load=initial_load)
    builder = TourBuilder()
    load = initial_load
    builder.start(load)
    for index, v in enumerate(tour.order):
        remaining = revealed.reveal(v)
        _check_feasible(v, remaining)
        before = load
        visits = 0
        while remaining > load + LOAD_TOLERANCE:
            builder.visit(v, load)
            remaining -= load
            builder.close()
            load = lam
            builder.start(load)
            visits += 1
        amount = min(remaining, load)
        builder.visit(v, amount)
        load -= amount
        trace.steps.append(TraceStep(index, v, Case.SPLIT, revealed[v], before, load, visits))
    builder.close()
    return PolicyRun(Itinerary.of(builder.tours), trace)
