"""
Oracles de vérification : optimum par énumération, espérances exactes des
politiques (sur L_0 puis sur les demandes), intégration sur grille et Monte-Carlo.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from shared import constants as C
from shared.errors import ConfigError, ExplosionGuard, InfeasibleDemand, TooLarge
from shared.instance import DEPOT, Instance, Realization
from shared.itinerary import Itinerary, Mode, Tour, cumulative_cost
from shared.log import get_logger
from shared.seeding import STREAM_DEMANDS, SeedStreams
from solver import analysis
from solver.deterministic import alg4, optimal_partition_dp
from solver.mixtures import effective_alpha, run_policy
from solver.policies import PolicyParams, alg1, alg1_lambda0, alg2, alg_s, resolve_tour, serve_large_customers
from solver.tsp import TourResult, tour_weight

logger = get_logger('oracle')


@dataclass(frozen=True)
class OracleResult:
    value: float
    itinerary: Optional[Itinerary]
    method: str

    def to_dict(self) -> dict:
        return {'value': self.value, 'method': self.method,
                'itinerary': self.itinerary.to_dict() if self.itinerary is not None else None}


# ============================================
# OPTIMUM PAR ÉNUMÉRATION
# ============================================

def _unsplittable_opt(instance: Instance, realization: Realization,
                      customers: List[int]) -> Itinerary:
    from solver.setcover import min_cost_tour

    m = len(customers)
    full = (1 << m) - 1
    block_tour: Dict[int, Tour] = {}
    block_cost = np.full(1 << m, np.inf)
    for mask in range(1, full + 1):
        members = [customers[k] for k in range(m) if mask >> k & 1]
        if math.fsum(realization.demand(v) for v in members) > C.CAPACITY + C.LOAD_TOLERANCE:
            continue
        tour, cost = min_cost_tour(members, instance, realization, limit=m)
        block_tour[mask] = tour
        block_cost[mask] = cost

    best = np.full(1 << m, np.inf)
    choice = np.zeros(1 << m, dtype=np.int64)
    best[0] = 0.0
    for mask in range(1, full + 1):
        low = mask & -mask
        sub = mask
        while sub:
            if sub & low and math.isfinite(block_cost[sub]):
                value = best[mask ^ sub] + block_cost[sub]
                if value < best[mask]:
                    best[mask] = value
                    choice[mask] = sub
            sub = (sub - 1) & mask

    tours = []
    mask = full
    while mask:
        sub = int(choice[mask])
        tours.append(block_tour[sub])
        mask ^= sub
    return Itinerary.of(tours)


def _order_tour(instance: Instance, order) -> TourResult:
    stops = (DEPOT,) + tuple(order) + (DEPOT,)
    return TourResult(stops, tour_weight(instance, stops), C.ALPHA_EXACT, None, 'enumerated')


def brute_force_opt(instance: Instance, realization: Realization,
                    mode: Mode = Mode.UNSPLITTABLE, limit: Optional[int] = None) -> OracleResult:
    """
    Itinéraire statique optimal : partitions des clients en tournées de demande <= 1,
    tous les ordres et les deux sens, chaque tournée chargée de son total.
    En fractionnable (n <= 4), on prend en plus le meilleur découpage fractionné
    de chaque ordre de visite sur une grille de pas 0.1 : c'est une borne supérieure.
    """
    from admin.config import get_config

    settings = get_config().oracle
    instance.check_realization(realization)
    customers = [v for v in range(1, instance.n + 1) if realization.demand(v) > 0]
    limit = settings.brute_force_limit if limit is None else limit
    if len(customers) > limit:
        raise TooLarge('brute_force_opt', len(customers), limit)
    if not customers:
        return OracleResult(0.0, Itinerary(), 'partition-enumeration')

    oversized = [v for v in customers if realization.demand(v) > C.CAPACITY + C.LOAD_TOLERANCE]
    if mode == Mode.UNSPLITTABLE:
        if oversized:
            raise InfeasibleDemand(oversized[0], realization.demand(oversized[0]))
        itinerary = _unsplittable_opt(instance, realization, customers)
        logger.debug("optimum par partitions: %d clients, %d tournées", len(customers), len(itinerary))
        return OracleResult(cumulative_cost(itinerary, instance).total, itinerary,
                            'partition-enumeration')

    if len(customers) > settings.split_limit:
        raise TooLarge('brute_force_opt(splittable)', len(customers), settings.split_limit)
    candidates = []
    if not oversized:
        candidates.append(_unsplittable_opt(instance, realization, customers))
    for order in itertools.permutations(customers):
        run = optimal_partition_dp(instance, realization, _order_tour(instance, order),
                                   splittable=True, resolution=settings.split_resolution)
        candidates.append(run.itinerary)
    costs = [cumulative_cost(it, instance).total for it in candidates]
    best = int(np.argmin(costs))
    return OracleResult(costs[best], candidates[best], 'split-grid')


# ============================================
# ESPÉRANCES EXACTES SUR L_0
# ============================================

def expected_detour_cost(d: float, l: float, lam: float, delta: float, a: float, b: float) -> float:
    """Coût espéré des retours au dépôt supplémentaires d'ALG.1(lambda, delta) pour un client."""
    gap = lam - delta
    if d <= 0:
        return 0.0
    if d <= delta:
        return (a * 2.0 * d + b * ((lam + delta) * d - d * d)) / gap * l
    if d <= gap:
        return (a * (4.0 * d - 2.0 * delta) + b * (d * d + gap * d)) / gap * l
    if d <= lam:
        return (a * (2.0 * d + 2.0 * lam - 4.0 * delta)
                + b * (2.0 * d * d - (lam + delta) * d + lam * lam - delta * delta)) / gap * l
    return a * 2.0 * l + b * d * l


def analytic_expected_cost_alg1(instance: Instance, realization: Realization,
                                params: PolicyParams, tour: Optional[TourResult] = None) -> float:
    tour = resolve_tour(instance, tour)
    lam, delta = params.lam, params.delta
    edges = (instance.a + instance.b * (lam + delta) / 2.0) * tour.weight
    extra = math.fsum(
        expected_detour_cost(realization.demand(v), instance.radial(v), lam, delta, instance.a, instance.b)
        for v in tour.order
    )
    return edges + extra


def analytic_expected_cost_algs(instance: Instance, realization: Realization, lam: float,
                                tour: Optional[TourResult] = None) -> float:
    tour = resolve_tour(instance, tour)
    edges = (instance.a + instance.b * lam / 2.0) * tour.weight
    extra = math.fsum(
        (instance.a * 2.0 * d / lam + instance.b * d) * instance.radial(v)
        for v in tour.order for d in (realization.demand(v),)
    )
    return edges + extra


def analytic_expected_cost_alg2(instance: Instance, realization: Realization,
                                params: PolicyParams, tour: Optional[TourResult] = None) -> float:
    """Arêtes + petits clients (cas 1 et 2) + coût déterministe de T'."""
    params = params.unit_fraction()
    tour = resolve_tour(instance, tour)
    lam, delta = params.lam, params.delta
    edges = (instance.a + instance.b * (lam + delta) / 2.0) * tour.weight
    small, large = [], []
    for v in tour.order:
        d = realization.demand(v)
        if d > delta:
            large.append(v)
        else:
            small.append(expected_detour_cost(d, instance.radial(v), lam, delta, instance.a, instance.b))
    service = serve_large_customers(instance, realization, large, delta)
    return edges + math.fsum(small) + service.cost


# ============================================
# INTÉGRATION SUR GRILLE
# ============================================

def grid_expected_cost(policy: str, instance: Instance, realization: Realization,
                       params: Optional[PolicyParams] = None, M: Optional[int] = None,
                       tour: Optional[TourResult] = None) -> float:
    """Moyenne du coût réalisé sur L_0 = (k + 1/2) largeur / M, k = 0..M-1 (point milieu)."""
    from admin.config import get_config

    M = get_config().oracle.grid_points if M is None else M
    if M < 1:
        raise ConfigError(f"M={M} doit être >= 1")
    params = params or PolicyParams()
    tour = resolve_tour(instance, tour)

    if policy == 'alg1':
        width = params.gap
        run = lambda L0: alg1(instance, realization, params, tour=tour, initial_load=L0)
    elif policy == 'alg2':
        params = params.unit_fraction()
        width = params.gap
        large = [v for v in tour.order if realization.demand(v) > params.delta]
        service = serve_large_customers(instance, realization, large, params.delta)
        run = lambda L0: alg2(instance, realization, params, tour=tour, initial_load=L0,
                              large_service=service)
    elif policy == 'alg_s':
        width = params.lam
        run = lambda L0: alg_s(instance, realization, params, tour=tour, initial_load=L0)
    elif policy == 'alg4':
        fixed = instance.with_fixed_demands(realization)
        width = params.lam
        run = lambda L0: alg4(fixed, params.lam, tour=tour, initial_load=L0)
    else:
        raise ConfigError(f"grille non définie pour {policy!r} (alg1, alg2, alg_s, alg4)")

    costs = [cumulative_cost(run((k + 0.5) * width / M).itinerary, instance).total
             for k in range(M)]
    return math.fsum(costs) / M


# ============================================
# ESPÉRANCE PAR POLITIQUE
# ============================================

def analytic_expected_cost(policy: str, instance: Instance, realization: Realization,
                           params: Optional[PolicyParams] = None,
                           tour: Optional[TourResult] = None,
                           M: Optional[int] = None) -> float:
    """
    Espérance conditionnelle à la réalisation, sur toute la randomisation de la politique
    (L_0 et pièce). Exacte pour les politiques du Cu-VRPSD ; par grille pour ALG.4.
    """
    from admin.config import get_config

    settings = get_config().policy
    tour = resolve_tour(instance, tour)
    alpha = effective_alpha(tour)
    gamma = instance.gamma

    def cost_of(run) -> float:
        return cumulative_cost(run.itinerary, instance).total

    if policy == 'alg1':
        return analytic_expected_cost_alg1(instance, realization, params or PolicyParams(), tour)
    if policy == 'alg2':
        return analytic_expected_cost_alg2(
            instance, realization, params or PolicyParams(delta=C.APPROX2_DELTA), tour)
    if policy == 'alg_s':
        return analytic_expected_cost_algs(instance, realization, (params or PolicyParams()).lam, tour)
    if policy == 'alg1_lambda0':
        return cost_of(alg1_lambda0(instance, realization, tour))
    if policy == 'partition_dp':
        return cost_of(optimal_partition_dp(instance, realization, tour))
    if policy == 'approx0':
        s = analysis.schedule_approx0(gamma, alpha)
        return analytic_expected_cost_alg1(instance, realization, PolicyParams(lam=s.lam), tour)
    if policy == 'approx1':
        s = analysis.schedule_approx1(gamma, alpha)
        high = analytic_expected_cost_alg1(instance, realization, PolicyParams(lam=s.lam), tour)
        low = analytic_expected_cost_alg1(instance, realization,
                                          PolicyParams(lam=s.theta * s.lam), tour)
        return s.p * high + (1.0 - s.p) * low
    if policy == 'approx2':
        params = PolicyParams(lam=C.APPROX2_LAMBDA, delta=C.APPROX2_DELTA)
        return 0.5 * (analytic_expected_cost_alg1(instance, realization, params, tour)
                      + analytic_expected_cost_alg2(instance, realization, params, tour))
    if policy == 'approx_s':
        s = analysis.schedule_approx_s(gamma, alpha)
        return analytic_expected_cost_algs(instance, realization, s.lam, tour)
    if policy == 'dispatch':
        if instance.a == 0:
            return analytic_expected_cost('alg1_lambda0', instance, realization, tour=tour)
        branch = 'approx1' if gamma <= settings.gamma_approx1_max else 'approx2'
        return analytic_expected_cost(branch, instance, realization, tour=tour)
    if policy == 'alg4':
        return grid_expected_cost('alg4', instance, realization, params, M, tour)
    if policy == 'approx4':
        s = analysis.schedule_approx4(gamma, alpha)
        high = grid_expected_cost('alg4', instance, realization, PolicyParams(lam=s.lam), M, tour)
        low = grid_expected_cost('alg4', instance, realization,
                                 PolicyParams(lam=s.theta * s.lam), M, tour)
        return s.p * high + (1.0 - s.p) * low
    if policy == 'dispatch_cuvrp':
        if instance.a == 0:
            return analytic_expected_cost('alg1_lambda0', instance, realization, tour=tour)
        if gamma <= settings.gamma_approx4_max:
            return analytic_expected_cost('approx4', instance, realization, tour=tour, M=M)
    raise ConfigError(f"pas d'espérance exacte pour {policy!r} (utiliser monte_carlo)")


def expectation_over_demands(policy: str, instance: Instance,
                             params: Optional[PolicyParams] = None,
                             tour: Optional[TourResult] = None,
                             cap: Optional[int] = None) -> float:
    """Somme sur les réalisations conjointes de prob * espérance conditionnelle."""
    from admin.config import get_config

    cap = get_config().oracle.expectation_cap if cap is None else cap
    size = instance.support_size()
    if size > cap:
        raise ExplosionGuard('expectation_over_demands', size, cap)
    tour = resolve_tour(instance, tour)
    terms = [prob * analytic_expected_cost(policy, instance, realization, params, tour)
             for prob, realization in instance.iter_realizations()]
    return math.fsum(terms)


# ============================================
# MONTE-CARLO
# ============================================

@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    # None quand trials = 1
    stderr: Optional[float]
    trials: int

    @property
    def flagged(self) -> bool:
        return self.stderr is None

    def to_dict(self) -> dict:
        return {'mean': self.mean, 'stderr': self.stderr, 'trials': self.trials,
                'flagged': self.flagged}


def monte_carlo(policy: str, instance: Instance, trials: int, seed: int,
                params: Optional[PolicyParams] = None, tour: Optional[TourResult] = None,
                threads: Optional[int] = None) -> MonteCarloResult:
    """Tirages indépendants (demandes et hasard de la politique) ; essai t sur le sous-flux (graine, t)."""
    from solver.runner import run_tasks

    if trials < 1:
        raise ConfigError(f"trials={trials} doit être >= 1")
    tour = resolve_tour(instance, tour)
    master = SeedStreams(seed)

    def one(t: int) -> float:
        streams = master.child(t)
        realization = instance.sample_realization(streams.generator(STREAM_DEMANDS))
        run = run_policy(policy, instance, realization, params, streams, tour)
        return cumulative_cost(run.itinerary, instance).total

    costs = np.array(run_tasks(one, list(range(trials)), threads))
    mean = float(math.fsum(costs) / trials)
    stderr = float(costs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None
    return MonteCarloResult(mean, stderr, trials)
