"""
Tournées, itinéraires et coût cumulé.

Une tournée est une suite de sommets qui part du dépôt et y revient.
loads[k] est la charge portée sur l'arête stops[k] -> stops[k+1] ;
delivered[k] est la quantité livrée à l'arrêt stops[k].
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from shared.constants import LOAD_TOLERANCE, CAPACITY
from shared.errors import LoadInconsistency
from shared.instance import DEPOT, Instance, Realization


@dataclass(frozen=True)
class Tour:
    stops: Tuple[int, ...]
    loads: Tuple[float, ...]
    delivered: Tuple[float, ...]

    def __post_init__(self):
        if len(self.stops) < 2 or self.stops[0] != DEPOT or self.stops[-1] != DEPOT:
            raise ValueError(f"une tournée part du dépôt et y revient: {self.stops}")
        if len(self.loads) != len(self.stops) - 1:
            raise ValueError("une charge par arête")
        if len(self.delivered) != len(self.stops):
            raise ValueError("une livraison par arrêt")

    @staticmethod
    def from_deliveries(customers: Sequence[int], amounts: Sequence[float],
                        initial_load: Optional[float] = None) -> 'Tour':
        """Tournée dépôt -> clients -> dépôt ; par défaut la charge au départ est le total livré."""
        amounts = [float(x) for x in amounts]
        load = math.fsum(amounts) if initial_load is None else float(initial_load)
        loads = [load]
        for amount in amounts:
            load -= amount
            loads.append(load)
        return Tour(
            stops=(DEPOT,) + tuple(customers) + (DEPOT,),
            loads=tuple(loads),
            delivered=(0.0,) + tuple(amounts) + (0.0,),
        )

    @staticmethod
    def singleton(customer: int, demand: float) -> 'Tour':
        return Tour.from_deliveries([customer], [demand])

    @staticmethod
    def empty_traversal(order: Sequence[int]) -> 'Tour':
        """Parcours à vide (relevé des demandes)."""
        return Tour.from_deliveries(list(order), [0.0] * len(order), initial_load=0.0)

    @property
    def customers(self) -> Tuple[int, ...]:
        return tuple(v for v in self.stops[1:-1] if v != DEPOT)

    @property
    def load_out(self) -> float:
        return self.loads[0]

    @property
    def total_delivered(self) -> float:
        return math.fsum(self.delivered)

    def weight(self, instance: Instance) -> float:
        return math.fsum(instance.w(u, v) for u, v in zip(self.stops, self.stops[1:]))

    def deliveries(self) -> Dict[int, float]:
        out: Dict[int, float] = {}
        for v, x in zip(self.stops, self.delivered):
            if v != DEPOT:
                out[v] = out.get(v, 0.0) + x
        return out

    def trimmed(self) -> 'Tour':
        """Charge au départ ramenée au total livré (la tournée revient à vide)."""
        inner = list(zip(self.stops[1:-1], self.delivered[1:-1]))
        return Tour.from_deliveries([v for v, _ in inner], [x for _, x in inner])

    def reversed(self) -> 'Tour':
        """Même tournée parcourue dans l'autre sens, même charge au départ."""
        inner = list(zip(self.stops[1:-1], self.delivered[1:-1]))[::-1]
        return Tour.from_deliveries([v for v, _ in inner], [x for _, x in inner],
                                    initial_load=self.load_out)

    def to_dict(self) -> dict:
        return {'stops': list(self.stops), 'loads': list(self.loads),
                'delivered': list(self.delivered)}

    @staticmethod
    def from_dict(data: dict) -> 'Tour':
        return Tour(tuple(int(v) for v in data['stops']),
                    tuple(float(x) for x in data['loads']),
                    tuple(float(x) for x in data['delivered']))


@dataclass(frozen=True)
class Itinerary:
    tours: Tuple[Tour, ...] = field(default_factory=tuple)

    def __iter__(self) -> Iterator[Tour]:
        return iter(self.tours)

    def __len__(self) -> int:
        return len(self.tours)

    def concat(self, other: 'Itinerary') -> 'Itinerary':
        return Itinerary(self.tours + other.tours)

    @staticmethod
    def of(tours: Sequence[Tour]) -> 'Itinerary':
        return Itinerary(tuple(tours))

    def to_dict(self) -> dict:
        return {'tours': [t.to_dict() for t in self.tours]}

    @staticmethod
    def from_dict(data: dict) -> 'Itinerary':
        return Itinerary(tuple(Tour.from_dict(t) for t in data.get('tours', [])))


# ============================================
# COÛT CUMULÉ
# ============================================

@dataclass(frozen=True)
class CostBreakdown:
    vehicle_cost: float = 0.0
    cargo_cost: float = 0.0

    @property
    def total(self) -> float:
        return self.vehicle_cost + self.cargo_cost

    def __add__(self, other: 'CostBreakdown') -> 'CostBreakdown':
        return CostBreakdown(self.vehicle_cost + other.vehicle_cost,
                             self.cargo_cost + other.cargo_cost)

    def to_dict(self) -> dict:
        return {'vehicle_cost': self.vehicle_cost, 'cargo_cost': self.cargo_cost,
                'total': self.total}


def check_load_consistency(tour: Tour, tol: float = LOAD_TOLERANCE) -> None:
    if abs(tour.delivered[0]) > tol or abs(tour.delivered[-1]) > tol:
        raise LoadInconsistency("livraison au dépôt")
    for k in range(1, len(tour.stops) - 1):
        if tour.stops[k] == DEPOT:
            if abs(tour.delivered[k]) > tol:
                raise LoadInconsistency("livraison au dépôt")
            continue  # rechargement
        expected = tour.loads[k - 1] - tour.delivered[k]
        if abs(tour.loads[k] - expected) > tol:
            raise LoadInconsistency(
                f"arrêt {k} (client {tour.stops[k]}): charge {tour.loads[k]:.12g}, "
                f"attendu {expected:.12g}"
            )


def tour_cost(tour: Tour, instance: Instance) -> CostBreakdown:
    check_load_consistency(tour)
    edges = [instance.w(u, v) for u, v in zip(tour.stops, tour.stops[1:])]
    vehicle = instance.a * tour.weight(instance)
    cargo = instance.b * math.fsum(x * w for x, w in zip(tour.loads, edges))
    return CostBreakdown(vehicle, cargo)


def cumulative_cost(itinerary: Itinerary, instance: Instance) -> CostBreakdown:
    vehicle = []
    cargo = []
    for tour in itinerary:
        cost = tour_cost(tour, instance)
        vehicle.append(cost.vehicle_cost)
        cargo.append(cost.cargo_cost)
    return CostBreakdown(math.fsum(vehicle), math.fsum(cargo))


def best_direction(tour: Tour, instance: Instance) -> Tour:
    """Garde le sens le moins coûteux ; à égalité, le sens d'origine."""
    back = tour.reversed()
    if tour_cost(back, instance).total < tour_cost(tour, instance).total:
        return back
    return tour


# ============================================
# VALIDATION
# ============================================

class Mode(str, Enum):
    SPLITTABLE = 'splittable'
    UNSPLITTABLE = 'unsplittable'


class ViolationKind(str, Enum):
    CAPACITY = 'capacity'
    UNMET_DEMAND = 'unmet_demand'
    OVER_DELIVERY = 'over_delivery'
    SPLIT_VIOLATION = 'split_violation'
    LOAD_INCONSISTENCY = 'load_inconsistency'
    UNKNOWN_CUSTOMER = 'unknown_customer'


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    customer: Optional[int] = None
    tour_index: Optional[int] = None
    detail: str = ''


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> List[ViolationKind]:
        return [v.kind for v in self.violations]

    def to_dict(self) -> dict:
        return {'ok': self.ok, 'violations': [
            {'kind': v.kind.value, 'customer': v.customer, 'tour': v.tour_index, 'detail': v.detail}
            for v in self.violations
        ]}


def validate_itinerary(itinerary: Itinerary, realization: Realization,
                       mode: Mode = Mode.UNSPLITTABLE,
                       tol: float = LOAD_TOLERANCE) -> ValidationReport:
    report = ValidationReport()
    n = len(realization)
    delivered = [0.0] * (n + 1)
    serving_tours: Dict[int, int] = {}

    for t_index, tour in enumerate(itinerary):
        for x in tour.loads:
            if x < -tol or x > CAPACITY + tol:
                report.violations.append(Violation(ViolationKind.CAPACITY, tour_index=t_index,
                                                   detail=f"charge {x:.12g}"))
                break
        try:
            check_load_consistency(tour, tol)
        except LoadInconsistency as exc:
            report.violations.append(Violation(ViolationKind.LOAD_INCONSISTENCY,
                                               tour_index=t_index, detail=str(exc)))
        for v, x in tour.deliveries().items():
            if v < 1 or v > n:
                report.violations.append(Violation(ViolationKind.UNKNOWN_CUSTOMER, customer=v,
                                                   tour_index=t_index))
                continue
            delivered[v] += x
            if x > tol:
                serving_tours[v] = serving_tours.get(v, 0) + 1

    for v in range(1, n + 1):
        d = realization.demand(v)
        if delivered[v] < d - tol:
            report.violations.append(Violation(ViolationKind.UNMET_DEMAND, customer=v,
                                               detail=f"{delivered[v]:.12g} < {d:.12g}"))
        elif delivered[v] > d + tol:
            report.violations.append(Violation(ViolationKind.OVER_DELIVERY, customer=v,
                                               detail=f"{delivered[v]:.12g} > {d:.12g}"))
        if mode == Mode.UNSPLITTABLE and serving_tours.get(v, 0) > 1:
            report.violations.append(Violation(ViolationKind.SPLIT_VIOLATION, customer=v,
                                               detail=f"{serving_tours[v]} tournées"))
    return report
