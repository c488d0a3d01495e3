"""
Générateur d'instances aléatoires, entièrement déterminé par (configuration, graine).
Familles de métrique : euclidienne, ligne, métrique aléatoire (clôture par plus courts chemins).
"""

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse.csgraph import shortest_path

from shared.errors import ConfigError
from shared.instance import DemandSpec, Instance, build_instance
from shared.log import get_logger
from shared.seeding import STREAM_INSTANCE, SeedStreams

logger = get_logger('generator')


class MetricFamily(str, Enum):
    EUCLIDEAN = 'euclidean'
    LINE = 'line'
    RANDOM_METRIC = 'random-metric'


class DemandFamily(str, Enum):
    FIXED = 'fixed'
    UNIFORM = 'uniform'
    TWO_POINT = 'two-point'
    MIXED = 'mixed'


# Régimes de demande : intervalle de tirage et poids dans la famille 'mixed'
DEMAND_REGIMES: Dict[str, Tuple[float, float, float]] = {
    'small': (0.02, 1.0 / 3.0, 0.4),   # d <= delta de ALG.2 (1, 1/3)
    'medium': (1.0 / 3.0, 2.0 / 3.0, 0.35),
    'large': (2.0 / 3.0, 1.0, 0.25),
}

UNIFORM_SUPPORT = 3


@dataclass
class GeneratorConfig:
    n: int = 6
    metric: str = MetricFamily.EUCLIDEAN.value
    demands: str = DemandFamily.MIXED.value
    a: float = 1.0
    b: float = 1.0
    Q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n={self.n} doit être >= 1")
        try:
            MetricFamily(self.metric)
            DemandFamily(self.demands)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.Q <= 0:
            raise ConfigError(f"Q={self.Q} doit être > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> 'GeneratorConfig':
        known = GeneratorConfig.__dataclass_fields__
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"champs inconnus dans la configuration: {sorted(unknown)}")
        return GeneratorConfig(**data)


# ============================================
# MÉTRIQUES
# ============================================

def _euclidean_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Dépôt au centre du carré unité, clients uniformes."""
    customers = rng.random((n, 2))
    return np.vstack(([0.5, 0.5], customers))


def _line_points(rng: np.random.Generator, n: int) -> np.ndarray:
    positions = np.sort(rng.uniform(0.1, 2.0, size=n))
    return np.column_stack((np.concatenate(([0.0], positions)), np.zeros(n + 1)))


def _random_metric(rng: np.random.Generator, n: int) -> np.ndarray:
    """Poids symétriques dans [1, 2] puis clôture : w(i, j) = plus court chemin."""
    size = n + 1
    raw = rng.uniform(1.0, 2.0, size=(size, size))
    raw = np.triu(raw, 1)
    raw = raw + raw.T
    return shortest_path(raw, method='FW', directed=False)


# ============================================
# DEMANDES
# ============================================

def _draw_value(rng: np.random.Generator, regime: str) -> float:
    low, high, _ = DEMAND_REGIMES[regime]
    return float(rng.uniform(low, high))


def _regime(rng: np.random.Generator) -> str:
    names = list(DEMAND_REGIMES)
    weights = np.array([DEMAND_REGIMES[k][2] for k in names])
    return names[int(rng.choice(len(names), p=weights / weights.sum()))]


def _demand_spec(rng: np.random.Generator, family: DemandFamily, Q: float) -> DemandSpec:
    if family == DemandFamily.FIXED:
        return DemandSpec.fixed(_draw_value(rng, _regime(rng)) * Q)
    if family == DemandFamily.UNIFORM:
        values = sorted(_draw_value(rng, _regime(rng)) * Q for _ in range(UNIFORM_SUPPORT))
        return DemandSpec.discrete([(v, 1.0 / UNIFORM_SUPPORT) for v in values])
    if family == DemandFamily.TWO_POINT:
        p = float(rng.uniform(0.2, 0.8))
        low, high = _draw_value(rng, 'small'), _draw_value(rng, _regime(rng))
        return DemandSpec.discrete([(low * Q, p), (high * Q, 1.0 - p)])
    # mixed : chaque client tire sa propre famille
    choice = DemandFamily(rng.choice([DemandFamily.FIXED.value, DemandFamily.TWO_POINT.value,
                                      DemandFamily.UNIFORM.value]))
    return _demand_spec(rng, choice, Q)


def generate_instance(config: GeneratorConfig) -> Instance:
    rng = SeedStreams(config.seed).generator(STREAM_INSTANCE)
    family = MetricFamily(config.metric)
    points: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None
    if family == MetricFamily.EUCLIDEAN:
        points = _euclidean_points(rng, config.n)
    elif family == MetricFamily.LINE:
        points = _line_points(rng, config.n)
    else:
        matrix = _random_metric(rng, config.n)

    specs: List[DemandSpec] = [_demand_spec(rng, DemandFamily(config.demands), config.Q)
                               for _ in range(config.n)]
    logger.debug("instance générée: n=%d, %s/%s, graine %d",
                 config.n, config.metric, config.demands, config.seed)
    return build_instance(specs, config.a, config.b, config.Q, points=points, matrix=matrix)
