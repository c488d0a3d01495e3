"""
Instances du Cu-VRP(SD) : métrique, dépôt, demandes, paramètres de coût.
Les instances sont normalisées à la construction (Q = 1, b multiplié par Q).
"""

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from shared.constants import METRIC_TOLERANCE, PROBABILITY_TOLERANCE
from shared.errors import (
    BothCostParamsZero, DemandOutOfRange, InvalidDemandSpec, MetricViolation,
    PrematureReveal,
)
from shared.log import get_logger

logger = get_logger('instance')

DEPOT = 0


# ============================================
# DEMANDES
# ============================================

@dataclass(frozen=True)
class DemandSpec:
    """Loi discrète d'une demande ; une demande fixe est une loi à un point."""
    values: Tuple[float, ...]
    probs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.values) == 0 or len(self.values) != len(self.probs):
            raise InvalidDemandSpec("valeurs et probabilités de longueurs différentes")
        if any(p < 0 for p in self.probs):
            raise InvalidDemandSpec("probabilité négative")
        if abs(math.fsum(self.probs) - 1.0) > PROBABILITY_TOLERANCE:
            raise InvalidDemandSpec(f"les probabilités somment à {math.fsum(self.probs)}")
        if any(v < 0 or not math.isfinite(v) for v in self.values):
            raise DemandOutOfRange(f"valeur de demande invalide: {self.values}")

    @staticmethod
    def fixed(value: float) -> 'DemandSpec':
        return DemandSpec((float(value),), (1.0,))

    @staticmethod
    def discrete(pairs: Sequence[Tuple[float, float]]) -> 'DemandSpec':
        return DemandSpec(tuple(float(v) for v, _ in pairs), tuple(float(p) for _, p in pairs))

    @property
    def is_fixed(self) -> bool:
        return len(set(self.support)) == 1

    @property
    def support(self) -> Tuple[float, ...]:
        return tuple(v for v, p in zip(self.values, self.probs) if p > 0)

    @property
    def max_value(self) -> float:
        return max(self.support)

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def is_identically_zero(self) -> bool:
        return all(v == 0.0 for v in self.support)

    def scaled(self, factor: float) -> 'DemandSpec':
        return DemandSpec(tuple(v * factor for v in self.values), self.probs)

    def sample(self, rng: np.random.Generator) -> float:
        if len(self.values) == 1:
            return self.values[0]
        return float(self.values[rng.choice(len(self.values), p=np.asarray(self.probs))])

    def contains(self, value: float, tol: float = PROBABILITY_TOLERANCE) -> bool:
        return any(abs(value - v) <= tol for v in self.support)

    def to_dict(self) -> Union[float, dict]:
        if len(self.values) == 1:
            return self.values[0]
        return {'values': list(self.values), 'probs': list(self.probs)}

    @staticmethod
    def from_dict(data: Union[float, int, dict, 'DemandSpec']) -> 'DemandSpec':
        if isinstance(data, DemandSpec):
            return data
        if isinstance(data, (int, float)):
            return DemandSpec.fixed(float(data))
        try:
            return DemandSpec(tuple(float(v) for v in data['values']),
                              tuple(float(p) for p in data['probs']))
        except (KeyError, TypeError) as exc:
            raise InvalidDemandSpec(f"spécification de demande illisible: {data!r}") from exc


@dataclass(frozen=True)
class Realization:
    """Vecteur de demandes réalisées, d[i-1] pour le client i."""
    d: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.d)

    def demand(self, customer: int) -> float:
        return self.d[customer - 1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.d, dtype=float)

    @staticmethod
    def of(values: Sequence[float]) -> 'Realization':
        return Realization(tuple(float(v) for v in values))


class RevealedDemands:
    """
    Accès aux demandes réalisées au fil des visites.
    Une demande n'est lisible qu'après reveal(client) ; toute lecture anticipée lève PrematureReveal.
    """

    def __init__(self, realization: Realization):
        self._realization = realization
        self._revealed: Set[int] = set()
        self.access_log: List[int] = []

    def reveal(self, customer: int) -> float:
        self._revealed.add(customer)
        self.access_log.append(customer)
        return self._realization.demand(customer)

    def reveal_all(self) -> Realization:
        """Demandes connues d'avance (Cu-VRP déterministe)."""
        for customer in range(1, len(self._realization) + 1):
            self._revealed.add(customer)
        return self._realization

    def __getitem__(self, customer: int) -> float:
        if customer not in self._revealed:
            raise PrematureReveal(customer)
        return self._realization.demand(customer)

    def is_revealed(self, customer: int) -> bool:
        return customer in self._revealed


# ============================================
# INSTANCE
# ============================================

@dataclass(frozen=True, eq=False)
class Instance:
    """Instance normalisée : capacité 1, demandes divisées par Q, b multiplié par Q."""
    weight: np.ndarray
    demands: Tuple[DemandSpec, ...]
    a: float
    b: float
    Q: float = 1.0
    points: Optional[np.ndarray] = None
    labels: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return len(self.demands)

    @property
    def gamma(self) -> float:
        return math.inf if self.b == 0 else self.a / self.b

    def radial(self, customer: int) -> float:
        return float(self.weight[DEPOT, customer])

    def w(self, u: int, v: int) -> float:
        return float(self.weight[u, v])

    @property
    def is_deterministic(self) -> bool:
        return all(spec.is_fixed for spec in self.demands)

    def fixed_realization(self) -> Realization:
        if not self.is_deterministic:
            raise InvalidDemandSpec("les demandes ne sont pas déterministes")
        return Realization(tuple(spec.support[0] for spec in self.demands))

    def with_fixed_demands(self, realization: Realization) -> 'Instance':
        """Même instance, demandes fixées à la réalisation (déjà normalisées)."""
        if len(realization) != self.n:
            raise DemandOutOfRange(f"réalisation de taille {len(realization)} pour {self.n} clients")
        return replace(self, demands=tuple(DemandSpec.fixed(v) for v in realization.d))

    def sample_realization(self, rng: np.random.Generator) -> Realization:
        return Realization(tuple(spec.sample(rng) for spec in self.demands))

    def support_size(self) -> int:
        size = 1
        for spec in self.demands:
            size *= len(spec.support)
        return size

    def iter_realizations(self) -> Iterator[Tuple[float, Realization]]:
        """Toutes les réalisations conjointes avec leur probabilité (demandes indépendantes)."""
        per_customer = [[(v, p) for v, p in zip(s.values, s.probs) if p > 0] for s in self.demands]
        for combo in itertools.product(*per_customer):
            prob = math.prod(p for _, p in combo)
            yield prob, Realization(tuple(v for v, _ in combo))

    def check_realization(self, realization: Realization) -> None:
        if len(realization) != self.n:
            raise DemandOutOfRange(f"réalisation de taille {len(realization)} pour {self.n} clients")
        for i, (spec, value) in enumerate(zip(self.demands, realization.d), start=1):
            if not spec.contains(value):
                raise DemandOutOfRange(f"client {i}: {value} hors du support {spec.support}")

    def to_dict(self) -> dict:
        """Forme JSON en unités d'origine (relue par build_instance)."""
        data = {
            'demands': [spec.scaled(self.Q).to_dict() for spec in self.demands],
            'a': self.a,
            'b': self.b / self.Q,
            'Q': self.Q,
        }
        if self.points is not None:
            data['points'] = self.points.tolist()
        else:
            data['matrix'] = self.weight.tolist()
        return data

    @staticmethod
    def from_dict(data: dict) -> 'Instance':
        return build_instance(
            demands=data['demands'],
            a=float(data.get('a', 1.0)),
            b=float(data.get('b', 1.0)),
            Q=float(data.get('Q', 1.0)),
            points=data.get('points'),
            matrix=data.get('matrix'),
        )


# ============================================
# CONSTRUCTION
# ============================================

def euclidean_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def check_metric(weight: np.ndarray, tol: float = METRIC_TOLERANCE) -> None:
    """Symétrie, diagonale nulle, poids positifs, inégalité triangulaire à tol près."""
    if weight.ndim != 2 or weight.shape[0] != weight.shape[1]:
        raise MetricViolation(f"matrice non carrée: {weight.shape}")
    if not np.all(np.isfinite(weight)):
        raise MetricViolation("poids non finis")
    if np.any(weight < -tol):
        i, j = np.argwhere(weight < -tol)[0]
        raise MetricViolation(f"poids négatif w({i},{j})={weight[i, j]}")
    if np.any(np.abs(np.diag(weight)) > tol):
        raise MetricViolation("diagonale non nulle")
    if np.any(np.abs(weight - weight.T) > tol):
        i, j = np.argwhere(np.abs(weight - weight.T) > tol)[0]
        raise MetricViolation(f"matrice non symétrique en ({i},{j})")
    for k in range(weight.shape[0]):
        detour = weight[:, k:k + 1] + weight[k:k + 1, :]
        bad = weight > detour + tol
        if np.any(bad):
            i, j = (int(x) for x in np.argwhere(bad)[0])
            raise MetricViolation(
                f"inégalité triangulaire violée: w({i},{j})={weight[i, j]:.6g} > "
                f"w({i},{k})+w({k},{j})={detour[i, j]:.6g}",
                triple=(i, j, k),
            )


def build_instance(demands: Sequence[Union[float, dict, DemandSpec]],
                   a: float, b: float, Q: float = 1.0,
                   points: Optional[Sequence[Sequence[float]]] = None,
                   matrix: Optional[Sequence[Sequence[float]]] = None,
                   drop_zero: bool = True) -> Instance:
    """
    Construit une instance normalisée.
    points: coordonnées (dépôt en premier), ou matrix: matrice (n+1)x(n+1).
    Les demandes sont données en unités d'origine, dans [0, Q].
    """
    if Q <= 0:
        raise DemandOutOfRange(f"capacité Q={Q} non positive")
    if a < 0 or b < 0:
        raise BothCostParamsZero(f"paramètres de coût négatifs a={a}, b={b}")
    if a == 0 and b == 0:
        raise BothCostParamsZero("a et b sont tous deux nuls")

    coords = None
    if points is not None:
        coords = np.asarray(points, dtype=float)
        if coords.ndim != 2:
            raise MetricViolation(f"coordonnées de forme {coords.shape}")
        weight = euclidean_matrix(coords)
    elif matrix is not None:
        weight = np.asarray(matrix, dtype=float)
        check_metric(weight)
        weight = (weight + weight.T) / 2.0
    else:
        raise MetricViolation("ni coordonnées ni matrice")

    specs = [DemandSpec.from_dict(d) for d in demands]
    if weight.shape[0] != len(specs) + 1:
        raise MetricViolation(f"{weight.shape[0]} sommets pour {len(specs)} clients + dépôt")
    for i, spec in enumerate(specs, start=1):
        if spec.max_value > Q * (1.0 + PROBABILITY_TOLERANCE):
            raise DemandOutOfRange(f"client {i}: demande {spec.max_value} > Q={Q}")

    keep = list(range(1, len(specs) + 1))
    if drop_zero:
        zero = [i for i in keep if specs[i - 1].is_identically_zero()]
        if zero:
            logger.warning("clients à demande identiquement nulle retirés: %s", zero)
            keep = [i for i in keep if i not in zero]

    index = [DEPOT] + keep
    weight = weight[np.ix_(index, index)].copy()
    weight.setflags(write=False)
    if coords is not None:
        coords = coords[index].copy()
        coords.setflags(write=False)

    normalized = tuple(specs[i - 1].scaled(1.0 / Q) for i in keep)
    return Instance(
        weight=weight,
        demands=normalized,
        a=float(a),
        b=float(b) * Q,
        Q=float(Q),
        points=coords,
        labels=tuple(keep),
    )


def load_instance(path: str) -> Instance:
    with open(path, 'r', encoding='utf-8') as f:
        return Instance.from_dict(json.load(f))


def save_instance(instance: Instance, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(instance.to_dict(), f, indent=2)
