"""
Mélanges randomisés APPROX.* et aiguillage selon gamma.
La pièce est tirée dans le sous-flux 'coin', indépendant de L_0.
"""

import math
from typing import Callable, Dict, Optional

from shared import constants as C
from shared.errors import ConfigError, GammaOutOfRange, TooLarge
from shared.instance import Instance, Realization
from shared.log import get_logger
from shared.seeding import STREAM_COIN, as_streams
from solver import analysis
from solver.deterministic import alg3, alg3_delta_schedule, alg4
from solver.policies import (
    PolicyParams, PolicyRun, Seed, alg1, alg1_lambda0, alg2, alg_s, resolve_tour,
)
from solver.tsp import TourResult

logger = get_logger('mixtures')


def effective_alpha(tour: TourResult) -> float:
    """alpha configuré, sinon la garantie du fournisseur de tournée."""
    from admin.config import get_config

    configured = get_config().policy.alpha
    return tour.alpha if configured is None else configured


def _gamma(instance: Instance, gamma: Optional[float]) -> float:
    gamma = instance.gamma if gamma is None else gamma
    if not gamma > 0:
        raise GammaOutOfRange(f"gamma={gamma} doit être > 0 (a = 0 : alg1_lambda0)")
    return gamma


def flip(rng: Seed, p: float) -> bool:
    """Pile avec probabilité p."""
    return bool(as_streams(rng).generator(STREAM_COIN).random() < p)


def _label(run: PolicyRun, policy: str, arm: str, schedule: Dict[str, float]) -> PolicyRun:
    run.trace.arm = arm
    run.trace.policy = policy
    run.trace.schedule = dict(schedule)
    return run


# ============================================
# Cu-VRPSD
# ============================================

def approx0(instance: Instance, realization: Realization, rng: Seed = None,
            tour: Optional[TourResult] = None, gamma: Optional[float] = None) -> PolicyRun:
    """ALG.1(lambda, 0) avec lambda = min(1, 4 gamma / alpha)."""
    tour = resolve_tour(instance, tour)
    s = analysis.schedule_approx0(_gamma(instance, gamma), effective_alpha(tour))
    run = alg1(instance, realization, PolicyParams(lam=s.lam), rng, tour)
    return _label(run, 'approx0', 'alg1', s.to_dict())


def approx1(instance: Instance, realization: Realization, rng: Seed = None,
            tour: Optional[TourResult] = None, gamma: Optional[float] = None,
            theta: Optional[float] = None) -> PolicyRun:
    """ALG.1(lambda, 0) avec probabilité p, ALG.1(theta lambda, 0) sinon."""
    tour = resolve_tour(instance, tour)
    s = analysis.schedule_approx1(_gamma(instance, gamma), effective_alpha(tour), theta)
    if flip(rng, s.p):
        return _label(alg1(instance, realization, PolicyParams(lam=s.lam), rng, tour),
                      'approx1', 'alg1(lambda)', s.to_dict())
    return _label(alg1(instance, realization, PolicyParams(lam=s.theta * s.lam), rng, tour),
                  'approx1', 'alg1(theta*lambda)', s.to_dict())


def approx2(instance: Instance, realization: Realization, rng: Seed = None,
            tour: Optional[TourResult] = None) -> PolicyRun:
    """Pièce équilibrée entre ALG.1(1, 1/3) et ALG.2(1, 1/3)."""
    tour = resolve_tour(instance, tour)
    params = PolicyParams(lam=C.APPROX2_LAMBDA, delta=C.APPROX2_DELTA)
    schedule = {'lambda': params.lam, 'delta': params.delta, 'p': 0.5}
    if flip(rng, 0.5):
        return _label(alg1(instance, realization, params, rng, tour), 'approx2', 'alg1', schedule)
    return _label(alg2(instance, realization, params, rng, tour), 'approx2', 'alg2', schedule)


def approx_s(instance: Instance, realization: Realization, rng: Seed = None,
             tour: Optional[TourResult] = None, gamma: Optional[float] = None) -> PolicyRun:
    """ALG.S(lambda) avec lambda = min(1, 2 gamma / alpha) ; cas fractionnable."""
    tour = resolve_tour(instance, tour)
    s = analysis.schedule_approx_s(_gamma(instance, gamma), effective_alpha(tour))
    run = alg_s(instance, realization, PolicyParams(lam=s.lam), rng, tour)
    return _label(run, 'approx_s', 'alg_s', s.to_dict())


def dispatch_cuvrpsd(instance: Instance, realization: Realization, rng: Seed = None,
                     tour: Optional[TourResult] = None) -> PolicyRun:
    """a = 0 : exact ; gamma <= 1.444 : APPROX.1 ; au-delà (b = 0 compris) : APPROX.2."""
    from admin.config import get_config

    tour = resolve_tour(instance, tour)
    gamma = instance.gamma
    if instance.a == 0:
        logger.info("aiguillage Cu-VRPSD: a = 0 -> alg1_lambda0")
        return _label(alg1_lambda0(instance, realization, tour), 'dispatch', 'alg1_lambda0', {})
    if gamma <= get_config().policy.gamma_approx1_max:
        logger.info("aiguillage Cu-VRPSD: gamma=%.4g -> approx1", gamma)
        run = approx1(instance, realization, rng, tour)
    else:
        logger.info("aiguillage Cu-VRPSD: gamma=%.4g -> approx2", gamma)
        run = approx2(instance, realization, rng, tour)
    run.trace.notes['dispatched'] = run.trace.policy
    run.trace.policy = 'dispatch'
    return run


# ============================================
# Cu-VRP (demandes connues)
# ============================================

def approx4(instance: Instance, rng: Seed = None, tour: Optional[TourResult] = None,
            gamma: Optional[float] = None, theta: Optional[float] = None) -> PolicyRun:
    """ALG.4(lambda) avec probabilité p, ALG.4(theta lambda) sinon ; lambda = min(1, 3.5 gamma / alpha)."""
    tour = resolve_tour(instance, tour)
    s = analysis.schedule_approx4(_gamma(instance, gamma), effective_alpha(tour), theta)
    if flip(rng, s.p):
        return _label(alg4(instance, s.lam, rng, tour), 'approx4', 'alg4(lambda)', s.to_dict())
    return _label(alg4(instance, s.theta * s.lam, rng, tour),
                  'approx4', 'alg4(theta*lambda)', s.to_dict())


def alg3_params(gamma: float, alpha: float) -> PolicyParams:
    """lambda = min(1, 2 gamma / alpha) ; delta configuré (ou selon epsilon), 1/delta entier, <= lambda/2."""
    from admin.config import get_config

    settings = get_config().policy
    lam = 1.0 if math.isinf(gamma) else min(1.0, 2.0 * gamma / alpha)
    if settings.use_delta_schedule:
        delta = alg3_delta_schedule(gamma, alpha, settings.epsilon)
    else:
        k = max(math.ceil(1.0 / settings.alg3_delta - 1e-9), math.ceil(2.0 / lam - 1e-9))
        delta = 1.0 / k
    return PolicyParams(lam=lam, delta=delta, alpha=alpha)


def dispatch_cuvrp(instance: Instance, rng: Seed = None,
                   tour: Optional[TourResult] = None) -> PolicyRun:
    """
    a = 0 : exact ; gamma <= 0.428 : APPROX.4 ; sinon ALG.3 si gamma > gamma0
    et si l'énumération des ensembles tient, ALG.4(1) à défaut.
    """
    from admin.config import get_config

    settings = get_config().policy
    tour = resolve_tour(instance, tour)
    realization = instance.fixed_realization()
    gamma = instance.gamma
    if instance.a == 0:
        logger.info("aiguillage Cu-VRP: a = 0 -> alg1_lambda0")
        run = _label(alg1_lambda0(instance, realization, tour), 'dispatch_cuvrp', 'alg1_lambda0', {})
        return run
    if gamma <= settings.gamma_approx4_max:
        logger.info("aiguillage Cu-VRP: gamma=%.4g -> approx4", gamma)
        run = approx4(instance, rng, tour)
    else:
        run = None
        if gamma > settings.gamma0:
            params = alg3_params(gamma, effective_alpha(tour))
            try:
                run = alg3(instance, params, rng, tour)
                logger.info("aiguillage Cu-VRP: gamma=%.4g -> alg3 (delta=%.4g)", gamma, params.delta)
            except TooLarge as exc:
                logger.warning("ALG.3 abandonné (%s) : repli sur alg4(1)", exc)
        if run is None:
            logger.info("aiguillage Cu-VRP: gamma=%.4g -> alg4(1)", gamma)
            run = alg4(instance, 1.0, rng, tour)
    run.trace.notes['dispatched'] = run.trace.policy
    run.trace.policy = 'dispatch_cuvrp'
    return run


# ============================================
# REGISTRE
# ============================================

Runner = Callable[..., PolicyRun]


def _needs(params: Optional[PolicyParams]) -> PolicyParams:
    if params is None:
        raise ConfigError("paramètres lambda/delta requis")
    return params


def run_policy(name: str, instance: Instance, realization: Realization,
               params: Optional[PolicyParams] = None, rng: Seed = None,
               tour: Optional[TourResult] = None) -> PolicyRun:
    """Exécute une politique par son nom (ligne de commande, oracles)."""
    from solver.deterministic import optimal_partition_dp

    fixed = None
    if name in DETERMINISTIC_POLICIES:
        fixed = instance.with_fixed_demands(realization)
    table: Dict[str, Runner] = {
        'alg1': lambda: alg1(instance, realization, params or PolicyParams(), rng, tour),
        'alg1_lambda0': lambda: alg1_lambda0(instance, realization, tour),
        'alg2': lambda: alg2(instance, realization, params or PolicyParams(delta=C.APPROX2_DELTA),
                             rng, tour),
        'alg_s': lambda: alg_s(instance, realization, params or PolicyParams(), rng, tour),
        'approx0': lambda: approx0(instance, realization, rng, tour),
        'approx1': lambda: approx1(instance, realization, rng, tour),
        'approx2': lambda: approx2(instance, realization, rng, tour),
        'approx_s': lambda: approx_s(instance, realization, rng, tour),
        'dispatch': lambda: dispatch_cuvrpsd(instance, realization, rng, tour),
        'alg3': lambda: alg3(fixed, _needs(params), rng, tour),
        'alg4': lambda: alg4(fixed, (params or PolicyParams()).lam, rng, tour),
        'approx4': lambda: approx4(fixed, rng, tour),
        'dispatch_cuvrp': lambda: dispatch_cuvrp(fixed, rng, tour),
        'partition_dp': lambda: optimal_partition_dp(fixed, realization, tour),
    }
    if name not in table:
        raise ConfigError(f"politique inconnue: {name!r} ({', '.join(sorted(table))})")
    return table[name]()


DETERMINISTIC_POLICIES = ('alg3', 'alg4', 'approx4', 'dispatch_cuvrp', 'partition_dp')
POLICY_NAMES = ('alg1', 'alg1_lambda0', 'alg2', 'alg_s', 'approx0', 'approx1', 'approx2',
                'approx_s', 'dispatch') + DETERMINISTIC_POLICIES
SPLITTABLE_POLICIES = ('alg_s', 'approx_s')
RANDOMIZED_POLICIES = tuple(p for p in POLICY_NAMES if p not in ('alg1_lambda0', 'partition_dp'))
