"""
Ratios d'approximation en forme close, ordonnancements (lambda, theta, p)
et recherche de theta sur grille.

Toutes les familles s'écrivent
    R(sigma) = [gamma (g1 sigma + g0) + (c1 sigma + c0)] / (gamma max(sigma, 1) + 0.5) + extra
et sigma = inf (ou gamma = inf) est évalué comme la limite exacte.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from shared import constants as C
from shared.bounds import DemandProfile
from shared.errors import ConfigError, DegenerateTheta, GammaOutOfRange
from shared.log import get_logger

logger = get_logger('analysis')


# ============================================
# FORME FRACTIONNAIRE LINÉAIRE
# ============================================

@dataclass(frozen=True)
class RatioForm:
    gamma: float
    g1: float
    g0: float
    c1: float
    c0: float
    extra: float = 0.0

    def __call__(self, sigma: float) -> float:
        gamma = self.gamma
        if math.isinf(gamma):
            if math.isinf(sigma):
                return self.g1 + self.extra
            return (self.g1 * sigma + self.g0) / max(sigma, 1.0) + self.extra
        if math.isinf(sigma):
            if gamma == 0:
                return math.inf if self.c1 > 0 else self.c0 / 0.5 + self.extra
            return (gamma * self.g1 + self.c1) / gamma + self.extra
        num = gamma * (self.g1 * sigma + self.g0) + (self.c1 * sigma + self.c0)
        return num / (gamma * max(sigma, 1.0) + 0.5) + self.extra


def worst_ratio(form: Callable[[float], float]) -> float:
    """max(R(1), R(inf)) : extrémité d'une fraction linéaire en sigma >= 1."""
    return max(form(1.0), form(math.inf))


# ============================================
# ORDONNANCEMENTS
# ============================================

def _lambda(gamma: float, factor: float, alpha: float) -> float:
    if math.isinf(gamma):
        return 1.0
    return min(1.0, factor * gamma / alpha)


def _check_gamma(gamma: float):
    if not gamma > 0:
        raise GammaOutOfRange(f"gamma={gamma} doit être > 0")


def _p_mixture(gamma: float, lam: float, theta: float, share: float) -> float:
    if theta <= 0.0 or theta >= 1.0:
        raise DegenerateTheta(f"theta={theta} hors de ]0, 1[")
    if lam <= 0:
        raise ConfigError(f"lambda={lam} doit être > 0")
    low = lam - theta * lam
    if math.isinf(gamma):
        return 1.0
    top = share / low + gamma / (theta * lam * low)
    return top / (share / lam + top)


def p_approx1(gamma: float, lam: float, theta: float) -> float:
    """p qui annule les termes en mu du mélange ALG.1(lambda, 0) / ALG.1(theta lambda, 0)."""
    return _p_mixture(gamma, lam, theta, 0.5)


def p_approx4(gamma: float, lam: float, theta: float) -> float:
    """Même construction pour ALG.4 : le coefficient 1/2 devient 1/4."""
    return _p_mixture(gamma, lam, theta, 0.25)


@dataclass(frozen=True)
class Schedule:
    lam: float
    theta: Optional[float] = None
    p: Optional[float] = None
    delta: float = 0.0

    def to_dict(self) -> Dict[str, float]:
        out = {'lambda': self.lam, 'delta': self.delta}
        if self.theta is not None:
            out.update(theta=self.theta, p=self.p)
        return out


def schedule_approx0(gamma: float, alpha: float) -> Schedule:
    return Schedule(_lambda(gamma, C.APPROX1_LAMBDA_FACTOR, alpha))


def schedule_approx1(gamma: float, alpha: float, theta: Optional[float] = None,
                     lam: Optional[float] = None) -> Schedule:
    """lambda = min(1, 4 gamma / alpha) ; theta = 0.5 jusqu'à gamma = 0.375, 0.6677 au-delà."""
    from admin.config import get_config

    settings = get_config().policy
    _check_gamma(gamma)
    if theta is None:
        theta = (settings.theta_small_gamma if gamma <= settings.gamma_theta_switch
                 else settings.theta_mid_gamma)
    lam = _lambda(gamma, C.APPROX1_LAMBDA_FACTOR, alpha) if lam is None else lam
    return Schedule(lam, theta, p_approx1(gamma, lam, theta))


def schedule_approx4(gamma: float, alpha: float, theta: Optional[float] = None) -> Schedule:
    """lambda = min(1, 3.5 gamma / alpha) ; theta = 0.5043 par défaut (0.5 : régime paramétré)."""
    from admin.config import get_config

    _check_gamma(gamma)
    theta = get_config().policy.theta_cuvrp if theta is None else theta
    lam = _lambda(gamma, C.APPROX4_LAMBDA_FACTOR, alpha)
    return Schedule(lam, theta, p_approx4(gamma, lam, theta))


def schedule_approx_s(gamma: float, alpha: float) -> Schedule:
    return Schedule(_lambda(gamma, C.SPLIT_LAMBDA_FACTOR, alpha))


def schedule_alg3(gamma: float, alpha: float, delta: float) -> Schedule:
    lam = _lambda(gamma, C.SPLIT_LAMBDA_FACTOR, alpha)
    return Schedule(lam, delta=min(delta, lam / 2.0))


# ============================================
# FAMILLES DE RATIOS
# ============================================

def _mixture_terms(lam: float, theta: float, p: float, alpha: float) -> Tuple[float, float, float]:
    """(g0, c1, c0 sans le terme final) communs à APPROX.1 et APPROX.4."""
    skew = (2.0 * lam - theta * lam) / (lam - theta * lam)
    g0 = p * 2.0 / lam + (1.0 - p) / (theta * lam) * skew
    c1 = (p * lam + (1.0 - p) * theta * lam) / 2.0 * alpha
    return g0, c1, skew


def ratio_approx1(gamma: float, alpha: float = C.ALPHA_CHRISTOFIDES,
                  schedule: Optional[Schedule] = None) -> RatioForm:
    s = schedule or schedule_approx1(gamma, alpha)
    g0, c1, skew = _mixture_terms(s.lam, s.theta, s.p, alpha)
    c0 = s.p / 2.0 + (1.0 - s.p) / 2.0 * skew
    return RatioForm(gamma, alpha, g0, c1, c0)


def ratio_approx4(gamma: float, alpha: float = C.ALPHA_CHRISTOFIDES,
                  schedule: Optional[Schedule] = None) -> RatioForm:
    s = schedule or schedule_approx4(gamma, alpha)
    g0, c1, _ = _mixture_terms(s.lam, s.theta, s.p, alpha)
    lam, theta = s.lam, s.theta
    c0 = s.p / 2.0 + (1.0 - s.p) / 4.0 * (3.0 * lam - 2.0 * theta * lam) / (lam - theta * lam)
    return RatioForm(gamma, alpha, g0, c1, c0)


def approx2_extra(gamma: float) -> float:
    if math.isinf(gamma):
        return 0.25
    return (6.0 * gamma - 1.0) / (24.0 * gamma + 4.0)


def ratio_approx2(gamma: float, alpha: float = C.ALPHA_CHRISTOFIDES) -> RatioForm:
    """Mélange équitable ALG.1(1, 1/3) / ALG.2(1, 1/3) ; valable pour gamma >= 0.1667."""
    if gamma < C.GAMMA_APPROX2_MIN:
        raise GammaOutOfRange(f"gamma={gamma} < {C.GAMMA_APPROX2_MIN} pour APPROX.2")
    return RatioForm(gamma, alpha, 1.5, 2.0 / 3.0 * alpha, 1.0, approx2_extra(gamma))


def ratio_approx0(gamma: float, alpha: float = C.ALPHA_CHRISTOFIDES) -> RatioForm:
    lam = schedule_approx0(gamma, alpha).lam
    return RatioForm(gamma, alpha, 2.0 / lam, lam / 2.0 * alpha, 1.0)


def ratio_approx_s(gamma: float, alpha: float = C.ALPHA_CHRISTOFIDES) -> RatioForm:
    """(gamma + lambda/2)(alpha sigma + 1/lambda) sur le dénominateur commun."""
    lam = schedule_approx_s(gamma, alpha).lam
    return RatioForm(gamma, alpha, 1.0 / lam, lam / 2.0 * alpha, 0.5)


def ratio_alg3(gamma: float, alpha: float = C.ALPHA_CHRISTOFIDES,
               delta: float = 1.0 / 3.0, lam: Optional[float] = None) -> RatioForm:
    if lam is None:
        lam = schedule_alg3(gamma, alpha, delta).lam
    gap = lam - delta
    if gap <= 0:
        raise ConfigError(f"delta={delta} >= lambda={lam}")
    return RatioForm(gamma, alpha, 1.0 / gap, lam / 2.0 * alpha, lam / (2.0 * gap), C.LN2)


# ============================================
# RECHERCHE DE THETA
# ============================================

def _worst_over_thetas(gamma: float, alpha: float, lam: float, thetas: np.ndarray,
                       family: str) -> np.ndarray:
    """max(R(1), R(inf)) pour tout un vecteur de theta (gamma fini)."""
    share = 0.5 if family == 'approx1' else 0.25
    low = lam - thetas * lam
    top = share / low + gamma / (thetas * lam * low)
    p = top / (share / lam + top)
    skew = (2.0 * lam - thetas * lam) / low
    g0 = p * 2.0 / lam + (1.0 - p) / (thetas * lam) * skew
    c1 = (p * lam + (1.0 - p) * thetas * lam) / 2.0 * alpha
    if family == 'approx1':
        c0 = p / 2.0 + (1.0 - p) / 2.0 * skew
    else:
        c0 = p / 2.0 + (1.0 - p) / 4.0 * (3.0 * lam - 2.0 * thetas * lam) / low
    r1 = (gamma * (alpha + g0) + c1 + c0) / (gamma + 0.5)
    rinf = (gamma * alpha + c1) / gamma
    return np.maximum(r1, rinf)


def best_theta(gamma: float, family: str = 'approx1', alpha: float = C.ALPHA_CHRISTOFIDES,
               lam: Optional[float] = None, tie_tol: float = 1e-12) -> float:
    """argmin de worst_ratio sur {i/10000} ; à égalité, le plus petit theta."""
    _check_gamma(gamma)
    if family not in ('approx1', 'approx4'):
        raise ConfigError(f"famille sans theta: {family!r}")
    if math.isinf(gamma):
        return 1.0 / C.THETA_GRID_SIZE
    if lam is None:
        factor = C.APPROX1_LAMBDA_FACTOR if family == 'approx1' else C.APPROX4_LAMBDA_FACTOR
        lam = _lambda(gamma, factor, alpha)
    thetas = np.arange(1, C.THETA_GRID_SIZE) / C.THETA_GRID_SIZE
    values = _worst_over_thetas(gamma, alpha, lam, thetas, family)
    target = values.min()
    return float(thetas[np.nonzero(values <= target + tie_tol)[0][0]])


# ============================================
# RATIO D'UNE INSTANCE (ALG.1)
# ============================================

def instance_ratio_alg1(profile: DemandProfile, gamma: float, sigma: float, alpha: float,
                        lam: float, delta: float) -> float:
    """
    (A + B) / (gamma max(sigma, 1) + 0.5) avec les intégrales de F de la réalisation.
    Multiplié par LB, c'est le coût espéré d'ALG.1 quand w(T*) = alpha tau.
    """
    gap = lam - delta
    F = profile.integral
    A = (alpha * sigma
         + F(0.0, delta, 1) / gap
         + (2.0 * F(delta, gap, 1) - delta * F(delta, gap, 0)) / gap
         + (F(gap, lam, 1) + (lam - 2.0 * delta) * F(gap, lam, 0)) / gap
         + F(lam, 1.0, 0))
    B = ((lam + delta) / 2.0 * alpha * sigma
         + ((lam + delta) * F(0.0, delta, 1) - F(0.0, delta, 2)) / (2.0 * gap)
         + (F(delta, gap, 2) + gap * F(delta, gap, 1)) / (2.0 * gap)
         + (2.0 * F(gap, lam, 2) - (lam + delta) * F(gap, lam, 1)
            + (lam * lam - delta * delta) * F(gap, lam, 0)) / (2.0 * gap)
         + F(lam, 1.0, 1) / 2.0)
    if math.isinf(gamma):
        return A / max(sigma, 1.0)
    return (gamma * A + B) / (gamma * max(sigma, 1.0) + 0.5)


def low_moment_bound(profile: DemandProfile, lam: float, theta: float) -> Tuple[float, float]:
    """(int_0^{theta lam} x dF, (lam int_0^lam x dF - int_0^lam x^2 dF) / (lam - theta lam))."""
    lhs = profile.integral(0.0, theta * lam, 1)
    rhs = (lam * profile.integral(0.0, lam, 1) - profile.integral(0.0, lam, 2)) / (lam - theta * lam)
    return lhs, rhs


# ============================================
# COURBES
# ============================================

def _curve_row(gamma: float, arm: str, form: Optional[RatioForm], schedule: Optional[Schedule],
               value: Optional[float] = None) -> Dict[str, Optional[float]]:
    row = {'gamma': gamma, 'arm': arm,
           'theta': schedule.theta if schedule else None,
           'lambda': schedule.lam if schedule else None,
           'p': schedule.p if schedule else None,
           'R1': None, 'Rinf': None, 'worst': value}
    if form is not None:
        row['R1'] = form(1.0)
        row['Rinf'] = form(math.inf)
        row['worst'] = max(row['R1'], row['Rinf'])
    return row


def _theta_rows(gamma: float, alpha: float) -> List[dict]:
    rows = []
    s = schedule_approx1(gamma, alpha, theta=C.THETA_SMALL_GAMMA)
    rows.append(_curve_row(gamma, 'theta_0.5', ratio_approx1(gamma, alpha, s), s))
    s = schedule_approx1(gamma, alpha, theta=C.THETA_MID_GAMMA, lam=1.0)
    rows.append(_curve_row(gamma, 'theta_0.6677', ratio_approx1(gamma, alpha, s), s))
    theta = best_theta(gamma, 'approx1', alpha, lam=1.0)
    s = schedule_approx1(gamma, alpha, theta=theta, lam=1.0)
    rows.append(_curve_row(gamma, 'best_theta', ratio_approx1(gamma, alpha, s), s))
    return rows


def _crossover_rows(gamma: float, alpha: float) -> List[dict]:
    from admin.config import get_config

    s = schedule_approx1(gamma, alpha)
    first = _curve_row(gamma, 'approx1', ratio_approx1(gamma, alpha, s), s)
    rows = [first]
    second = None
    if gamma >= C.GAMMA_APPROX2_MIN:
        second = _curve_row(gamma, 'approx2', ratio_approx2(gamma, alpha),
                            Schedule(C.APPROX2_LAMBDA, delta=C.APPROX2_DELTA))
        rows.append(second)
    use_first = gamma <= get_config().policy.gamma_approx1_max or second is None
    chosen = first if use_first else second
    rows.append(dict(chosen, arm='dispatch'))
    return rows


def _lp_rows(gamma: float, alpha: float, N: int) -> List[dict]:
    from solver.certify import certify_best

    theta = best_theta(gamma, 'approx1', alpha)
    s = schedule_approx1(gamma, alpha, theta=theta)
    first = _curve_row(gamma, 'approx1_best', ratio_approx1(gamma, alpha, s), s)
    rows = [first]
    lp_row = None
    if gamma >= 0.6:
        value = certify_best(gamma, 1.0, N, alpha)
        lp_row = _curve_row(gamma, 'lp', None, Schedule(C.APPROX2_LAMBDA, delta=C.APPROX2_DELTA),
                            value=value)
        rows.append(lp_row)
    chosen = first if gamma <= C.GAMMA_LP_CROSSOVER or lp_row is None else lp_row
    rows.append(dict(chosen, arm='crossover'))
    return rows


def ratio_curves(gamma_grid: Sequence[float], which: str = 'thetas',
                 alpha: float = C.ALPHA_CHRISTOFIDES, N: int = 300) -> List[dict]:
    """Lignes (gamma, arm, theta, lambda, p, R1, Rinf, worst), dans l'ordre de la grille."""
    builders = {
        'thetas': lambda g: _theta_rows(g, alpha),
        'crossover': lambda g: _crossover_rows(g, alpha),
        'lp': lambda g: _lp_rows(g, alpha, N),
    }
    if which not in builders:
        raise ConfigError(f"courbe inconnue: {which!r} (thetas, crossover, lp)")
    for g in gamma_grid:
        if not g > 0:
            raise ConfigError(f"grille: gamma={g} doit être > 0")
    rows = []
    for g in gamma_grid:
        rows.extend(builders[which](float(g)))
    logger.info("%s: %d lignes sur %d valeurs de gamma", which, len(rows), len(gamma_grid))
    return rows


def default_gamma_grid(step: float = 0.01, upper: float = 2.0) -> List[float]:
    count = int(round(upper / step))
    return [round(k * step, 10) for k in range(1, count + 1)]
