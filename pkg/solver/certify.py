"""
Programmes linéaires discrétisés qui certifient le ratio d'APPROX.2.

Les variables r[i][j] approchent l'intégrale de x^i dF sur [0, j/N] ;
on maximise y <= (A + B) / 2 où A borne ALG.1(1, 1/3) et B borne ALG.2(1, 1/3).
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from shared import constants as C
from shared.errors import ConfigError, LpInfeasible
from shared.log import get_logger
from solver import lp as LP

logger = get_logger('certify')


@dataclass(frozen=True, eq=False)
class DiscretizedMoments:
    N: int
    r: np.ndarray  # forme (3, N + 1)

    def increments(self, i: int) -> np.ndarray:
        return np.diff(self.r[i])

    def sandwich_residual(self) -> float:
        """Violation maximale de (j-1)/N dr^{i-1} <= dr^i <= j/N dr^{i-1} et dr^0 >= 0."""
        j = np.arange(1, self.N + 1) / self.N
        worst = float(np.max(-self.increments(0), initial=0.0))
        for i in (1, 2):
            prev, cur = self.increments(i - 1), self.increments(i)
            worst = max(worst,
                        float(np.max((j - 1.0 / self.N) * prev - cur, initial=0.0)),
                        float(np.max(cur - j * prev, initial=0.0)))
        return worst


@dataclass
class CertifyResult:
    gamma: float
    sigma: float
    N: int
    case: int
    status: LP.Status
    value: Optional[float] = None
    backend: str = ''
    moments: Optional[DiscretizedMoments] = None

    def to_dict(self) -> dict:
        return {'gamma': self.gamma, 'sigma': self.sigma, 'N': self.N, 'case': self.case,
                'status': self.status.value, 'lp_value': self.value, 'backend': self.backend}


def _check_N(N: int):
    if N < 3 or N % 3 != 0:
        raise ConfigError(f"N={N} doit être un multiple de 3")


def build_certify_lp(gamma: float, sigma: float, N: int, case: int,
                      alpha: float = C.ALPHA_CHRISTOFIDES) -> LP.LinearProgram:
    _check_N(N)
    if case not in (1, 2):
        raise ConfigError(f"cas {case} inconnu (1 ou 2)")
    if not (0 < gamma < math.inf) or not (0 <= sigma < math.inf):
        raise ConfigError(f"paramètres hors domaine: gamma={gamma}, sigma={sigma}")

    program = LP.LinearProgram(sense=LP.Sense.MAX)
    r = [[0] * (N + 1) for _ in range(3)]
    for i in range(3):
        for j in range(N + 1):
            lower = upper = None
            if j == 0:
                lower, upper = 0.0, 0.0
            elif i == 1 and j == N:
                lower, upper = 1.0, 1.0
            r[i][j] = program.add_variable(
                f"r{i}_{j}", 0.0,
                0.0 if lower is None else lower,
                math.inf if upper is None else upper,
            )
    A = program.add_variable('A', 0.0, -math.inf, math.inf)
    B = program.add_variable('B', 0.0, -math.inf, math.inf)
    y = program.add_variable('y', 1.0, -math.inf, math.inf)

    # encadrement des incréments successifs
    for j in range(1, N + 1):
        program.add_constraint({r[0][j]: 1.0, r[0][j - 1]: -1.0}, LP.Relation.GE, 0.0,
                               name=f"mono_{j}")
        for i in (1, 2):
            lo, hi = (j - 1) / N, j / N
            program.add_constraint({r[i][j]: 1.0, r[i][j - 1]: -1.0,
                                    r[i - 1][j]: -lo, r[i - 1][j - 1]: lo},
                                   LP.Relation.GE, 0.0, name=f"low_{i}_{j}")
            program.add_constraint({r[i][j]: 1.0, r[i][j - 1]: -1.0,
                                    r[i - 1][j]: -hi, r[i - 1][j - 1]: hi},
                                   LP.Relation.LE, 0.0, name=f"high_{i}_{j}")

    t, u = N // 3, 2 * N // 3
    denom = gamma * max(sigma, 1.0) + 0.5
    constant = (gamma * alpha * sigma + 2.0 / 3.0 * alpha * sigma) / denom

    def add(coeffs: Dict[int, float], key: int, value: float):
        coeffs[key] = coeffs.get(key, 0.0) + value

    # A : ALG.1(1, 1/3)
    a_terms: Dict[int, float] = {}
    for key, value in (
        (r[1][t], 1.5 * gamma),
        (r[1][u], 3.0 * gamma), (r[1][t], -3.0 * gamma),
        (r[0][u], -0.5 * gamma), (r[0][t], 0.5 * gamma),
        (r[1][N], 1.5 * gamma), (r[1][u], -1.5 * gamma),
        (r[0][N], 0.5 * gamma), (r[0][u], -0.5 * gamma),
        (r[2][t], -0.75), (r[1][t], 1.0),
        (r[2][u], 0.75), (r[2][t], -0.75),
        (r[1][u], 0.5), (r[1][t], -0.5),
        (r[2][N], 1.5), (r[2][u], -1.5),
        (r[1][N], -1.0), (r[1][u], 1.0),
        (r[0][N], 2.0 / 3.0), (r[0][u], -2.0 / 3.0),
    ):
        add(a_terms, key, -value / denom)
    a_terms[A] = 1.0
    program.add_constraint(a_terms, LP.Relation.LE, constant, name='bound_A')

    # B : ALG.2(1, 1/3), petits clients puis T' = min(T1, T2)
    b_terms: Dict[int, float] = {}
    for key, value in ((r[1][t], 1.5 * gamma), (r[2][t], -0.75), (r[1][t], 1.0)):
        add(b_terms, key, -value / denom)
    singles: Dict[int, float] = {}
    for key, value in ((r[1][N], 0.5), (r[1][t], -0.5), (r[0][N], gamma), (r[0][t], -gamma)):
        add(singles, key, value)
    if case == 1:
        for key, value in singles.items():
            add(b_terms, key, -value / denom)
        b_terms[B] = 1.0
        program.add_constraint(b_terms, LP.Relation.LE, constant, name='bound_B')
        program.add_constraint(singles, LP.Relation.LE, denom, name='case_1')
    else:
        b_terms[B] = 1.0
        program.add_constraint(b_terms, LP.Relation.LE, constant + 1.0, name='bound_B')
        program.add_constraint(singles, LP.Relation.GE, denom, name='case_2')

    program.add_constraint({y: 1.0, A: -0.5, B: -0.5}, LP.Relation.LE, 0.0, name='mixture')
    return program


def certify_lp(gamma: float, sigma: float, N: int, case: int,
                alpha: float = C.ALPHA_CHRISTOFIDES,
                backend: Optional[str] = None) -> CertifyResult:
    """Valeur maximale de y pour (gamma, sigma, N, cas) ; un PL irréalisable est signalé, pas levé."""
    program = build_certify_lp(gamma, sigma, N, case, alpha)
    result = LP.solve(program, backend)
    out = CertifyResult(gamma, sigma, N, case, result.status, backend=result.backend)
    if result.optimal:
        out.value = result.value
        x = result.x
        r = np.array([[x[i * (N + 1) + j] for j in range(N + 1)] for i in range(3)])
        out.moments = DiscretizedMoments(N, r)
    else:
        logger.info("PL annexe gamma=%.4g sigma=%.4g cas %d: %s",
                    gamma, sigma, case, result.status.value)
    return out


def certify_best(gamma: float, sigma: float, N: int, alpha: float = C.ALPHA_CHRISTOFIDES,
                  backend: Optional[str] = None) -> float:
    """max des deux cas ; LpInfeasible si aucun n'est réalisable."""
    values = [res.value for res in (certify_lp(gamma, sigma, N, case, alpha, backend)
                                    for case in (1, 2)) if res.value is not None]
    if not values:
        raise LpInfeasible(f"aucun cas réalisable pour gamma={gamma}, sigma={sigma}")
    return max(values)


@dataclass
class SweepTable:
    rows: List[CertifyResult]
    # gamma -> (valeur max, sigma qui l'atteint)
    best: Dict[float, tuple]

    def to_rows(self) -> List[dict]:
        return [r.to_dict() for r in self.rows]


def certify_sweep(gamma_grid: Sequence[float], sigma_grid: Sequence[float], N: int,
                   alpha: float = C.ALPHA_CHRISTOFIDES, backend: Optional[str] = None,
                   threads: Optional[int] = None) -> SweepTable:
    """Tous les (gamma, sigma, cas), en parallèle ; ordre de sortie = ordre de la grille."""
    from solver.runner import run_tasks

    _check_N(N)
    tasks = [(g, s, case) for g in gamma_grid for s in sigma_grid for case in (1, 2)]
    rows = run_tasks(lambda task: certify_lp(task[0], task[1], N, task[2], alpha, backend),
                     tasks, threads)

    best: Dict[float, tuple] = {}
    for res in rows:
        if res.value is None:
            continue
        current = best.get(res.gamma)
        if current is None or res.value > current[0] + 1e-12:
            best[res.gamma] = (res.value, res.sigma)
    logger.info("balayage annexe: %d PL (N=%d)", len(rows), N)
    return SweepTable(rows, best)
