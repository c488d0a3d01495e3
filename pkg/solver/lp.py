"""
Programmation linéaire : simplexe dense à deux phases (règle de Bland)
pour les petits programmes, HiGHS (scipy) pour les grands.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix, diags

from shared.constants import (
    LP_FEASIBILITY_TOLERANCE, LP_OPTIMALITY_TOLERANCE, LP_PIVOT_TOLERANCE,
)
from shared.errors import ConfigError, DimensionMismatch, NumericalBreakdown
from shared.log import get_logger

logger = get_logger('lp')


class Sense(str, Enum):
    MIN = 'min'
    MAX = 'max'


class Relation(str, Enum):
    LE = '<='
    GE = '>='
    EQ = '='


class Status(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass
class Constraint:
    coeffs: Dict[int, float]
    relation: Relation
    rhs: float
    name: str = ''


@dataclass
class LinearProgram:
    sense: Sense = Sense.MIN
    objective: List[float] = field(default_factory=list)
    lower: List[float] = field(default_factory=list)
    upper: List[float] = field(default_factory=list)
    names: List[str] = field(default_factory=list)
    rows: List[Constraint] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_variable(self, name: str = '', cost: float = 0.0,
                     lower: float = 0.0, upper: float = math.inf) -> int:
        self.objective.append(float(cost))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.names.append(name or f"x{len(self.objective) - 1}")
        return len(self.objective) - 1

    def add_constraint(self, coeffs: Dict[int, float], relation: Relation, rhs: float,
                       name: str = '') -> int:
        self.rows.append(Constraint(dict(coeffs), Relation(relation), float(rhs), name))
        return len(self.rows) - 1

    def validate(self):
        n = self.num_vars
        if not (len(self.lower) == len(self.upper) == len(self.names) == n):
            raise DimensionMismatch("bornes et objectif de tailles différentes")
        if not all(math.isfinite(c) for c in self.objective):
            raise DimensionMismatch("coefficient d'objectif non fini")
        for r, row in enumerate(self.rows):
            for j, v in row.coeffs.items():
                if j < 0 or j >= n:
                    raise DimensionMismatch(f"ligne {r}: variable {j} hors de [0, {n})")
                if not math.isfinite(v):
                    raise DimensionMismatch(f"ligne {r}: coefficient non fini")
            if not math.isfinite(row.rhs):
                raise DimensionMismatch(f"ligne {r}: second membre non fini")
        for j in range(n):
            if self.lower[j] > self.upper[j]:
                raise DimensionMismatch(f"variable {self.names[j]}: borne inf > borne sup")

    def matrix(self):
        """Matrice des contraintes au format creux (CSR)."""
        data, rows, cols = [], [], []
        for r, row in enumerate(self.rows):
            for j, v in row.coeffs.items():
                rows.append(r)
                cols.append(j)
                data.append(v)
        return coo_matrix((data, (rows, cols)), shape=(len(self.rows), self.num_vars)).tocsr()

    def rhs(self) -> np.ndarray:
        return np.array([row.rhs for row in self.rows], dtype=float)

    def evaluate(self, x: np.ndarray) -> float:
        return float(math.fsum(np.asarray(self.objective) * x))

    def residual(self, x: np.ndarray) -> float:
        """Violation maximale des contraintes et des bornes."""
        worst = 0.0
        if self.rows:
            lhs = self.matrix() @ x
            b = self.rhs()
            for r, row in enumerate(self.rows):
                if row.relation == Relation.LE:
                    worst = max(worst, lhs[r] - b[r])
                elif row.relation == Relation.GE:
                    worst = max(worst, b[r] - lhs[r])
                else:
                    worst = max(worst, abs(lhs[r] - b[r]))
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        worst = max(worst, float(np.max(lo - x, initial=0.0)), float(np.max(x - hi, initial=0.0)))
        return worst

    def to_text(self) -> str:
        """Format texte : sens, objectif, une ligne par contrainte, bornes, 'end'."""
        n = self.num_vars
        lines = [self.sense.value, ' '.join(repr(c) for c in self.objective)]
        for row in self.rows:
            dense = [0.0] * n
            for j, v in row.coeffs.items():
                dense[j] = v
            lines.append(f"{' '.join(repr(v) for v in dense)} {row.relation.value} {row.rhs!r}")
        lines.append('bounds')
        for lo, hi in zip(self.lower, self.upper):
            lines.append(f"{lo!r} {hi!r}")
        lines.append('end')
        return '\n'.join(lines) + '\n'

    @staticmethod
    def from_text(text: str) -> 'LinearProgram':
        lines = [ln.strip() for ln in text.strip().splitlines()
                 if ln.strip() and not ln.strip().startswith('#')]
        lp = LinearProgram(sense=Sense(lines[0].lower()))
        for c in lines[1].split():
            lp.add_variable(cost=float(c), lower=0.0)
        idx = 2
        while lines[idx] not in ('bounds', 'end'):
            for rel in (Relation.LE, Relation.GE, Relation.EQ):
                if rel.value in lines[idx]:
                    left, b = lines[idx].split(rel.value)
                    break
            else:
                raise DimensionMismatch(f"ligne sans relation: {lines[idx]!r}")
            coeffs = [float(v) for v in left.split()]
            if len(coeffs) != lp.num_vars:
                raise DimensionMismatch("nombre de coefficients incorrect")
            lp.add_constraint({j: v for j, v in enumerate(coeffs) if v != 0.0}, rel, float(b))
            idx += 1
        if lines[idx] == 'bounds':
            for j in range(lp.num_vars):
                lo, hi = lines[idx + 1 + j].split()
                lp.lower[j], lp.upper[j] = float(lo), float(hi)
        return lp


@dataclass(frozen=True)
class LpResult:
    status: Status
    value: Optional[float] = None
    x: Optional[np.ndarray] = None
    backend: str = ''
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL


# ============================================
# FORME STANDARDE
# ============================================

def _standard_form(lp: LinearProgram):
    """
    Substitution x = offset + M x', x' >= 0 :
    borne inf finie -> décalage ; seule borne sup finie -> x = u - x' ; libre -> x+ - x-.
    Les bornes sup finies deviennent des lignes x' <= u - l.
    """
    n = lp.num_vars
    offset = np.zeros(n)
    mapping: List[List[Tuple[int, float]]] = []
    caps: List[Tuple[int, float]] = []
    k = 0
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if math.isfinite(lo) and lo == hi:
            offset[j] = lo
            mapping.append([])
        elif math.isfinite(lo):
            offset[j] = lo
            mapping.append([(k, 1.0)])
            if math.isfinite(hi):
                caps.append((k, hi - lo))
            k += 1
        elif math.isfinite(hi):
            offset[j] = hi
            mapping.append([(k, -1.0)])
            k += 1
        else:
            mapping.append([(k, 1.0), (k + 1, -1.0)])
            k += 2

    M = np.zeros((n, k))
    for j, entries in enumerate(mapping):
        for col, sign in entries:
            M[j, col] = sign

    A = lp.matrix().toarray() if lp.rows else np.zeros((0, n))
    A_std = A @ M
    b_std = lp.rhs() - A @ offset if lp.rows else np.zeros(0)
    relations = [row.relation for row in lp.rows]
    for col, cap in caps:
        row = np.zeros(k)
        row[col] = 1.0
        A_std = np.vstack([A_std, row])
        b_std = np.append(b_std, cap)
        relations.append(Relation.LE)

    c = np.asarray(lp.objective, dtype=float)
    if lp.sense == Sense.MAX:
        c = -c
    return A_std, relations, b_std, c @ M, offset, M


def _pivot(T: np.ndarray, row: int, col: int):
    T[row, :] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row, :])


class _Tableau:
    """Tableau du simplexe ; dernière ligne = coûts réduits, dernière colonne = second membre."""

    def __init__(self, A: np.ndarray, relations: List[Relation], b: np.ndarray,
                 pivot_tol: float, opt_tol: float, max_iterations: int):
        m, n = A.shape
        A = A.copy()
        b = b.copy()
        relations = list(relations)
        for i in range(m):
            if b[i] < 0:
                A[i, :] *= -1
                b[i] *= -1
                if relations[i] == Relation.LE:
                    relations[i] = Relation.GE
                elif relations[i] == Relation.GE:
                    relations[i] = Relation.LE

        num_s = sum(1 for r in relations if r != Relation.EQ)
        num_a = sum(1 for r in relations if r != Relation.LE)
        self.n_struct = n
        self.n_real = n + num_s
        total = n + num_s + num_a
        T = np.zeros((m + 1, total + 1))
        T[:m, :n] = A
        T[:m, -1] = b
        basis = []
        si, ai = n, n + num_s
        for i, rel in enumerate(relations):
            if rel == Relation.LE:
                T[i, si] = 1.0
                basis.append(si)
                si += 1
            elif rel == Relation.GE:
                T[i, si] = -1.0
                si += 1
                T[i, ai] = 1.0
                basis.append(ai)
                ai += 1
            else:
                T[i, ai] = 1.0
                basis.append(ai)
                ai += 1
        self.T = T
        self.basis = basis
        self.pivot_tol = pivot_tol
        self.opt_tol = opt_tol
        self.max_iterations = max_iterations
        self.iterations = 0

    def _iterate(self, active: int) -> Status:
        T = self.T
        while True:
            if self.iterations >= self.max_iterations:
                raise NumericalBreakdown(f"simplexe: plus de {self.max_iterations} itérations")
            reduced = T[-1, :active]
            entering = np.nonzero(reduced < -self.opt_tol)[0]
            if entering.size == 0:
                return Status.OPTIMAL
            j = int(entering[0])
            column = T[:-1, j]
            positive = column > self.pivot_tol
            if not positive.any():
                return Status.UNBOUNDED
            ratios = np.full(column.shape, np.inf)
            ratios[positive] = T[:-1, -1][positive] / column[positive]
            best = ratios.min()
            ties = np.nonzero(ratios <= best + LP_PIVOT_TOLERANCE * (1.0 + abs(best)))[0]
            basis = np.asarray(self.basis)
            i = int(ties[np.argmin(basis[ties])])
            _pivot(T, i, j)
            self.basis[i] = j
            self.iterations += 1

    def phase_one(self, feas_tol: float) -> bool:
        T = self.T
        T[-1, :] = 0.0
        T[-1, self.n_real:-1] = 1.0
        for r, col in enumerate(self.basis):
            if col >= self.n_real:
                T[-1, :] -= T[r, :]
        self._iterate(T.shape[1] - 1)
        scale = 1.0 + float(np.max(np.abs(T[:-1, -1]), initial=0.0))
        if -T[-1, -1] > feas_tol * scale:
            return False

        # Sortie des artificielles restées en base (au niveau zéro)
        redundant = []
        for r, col in enumerate(self.basis):
            if col < self.n_real:
                continue
            candidates = np.nonzero(np.abs(T[r, :self.n_real]) > self.pivot_tol)[0]
            if candidates.size:
                _pivot(T, r, int(candidates[0]))
                self.basis[r] = int(candidates[0])
            else:
                redundant.append(r)
        if redundant:
            self.T = np.delete(T, redundant, axis=0)
            self.basis = [col for r, col in enumerate(self.basis) if r not in redundant]
        return True

    def phase_two(self, c: np.ndarray) -> Status:
        T = self.T
        cost = np.zeros(T.shape[1])
        cost[:len(c)] = c
        T[-1, :] = cost
        for r, col in enumerate(self.basis):
            if cost[col] != 0.0:
                T[-1, :] -= cost[col] * T[r, :]
        return self._iterate(self.n_real)

    def solution(self) -> np.ndarray:
        x = np.zeros(self.n_struct)
        for r, col in enumerate(self.basis):
            if col < self.n_struct:
                x[col] = self.T[r, -1]
        return x


def solve_simplex(lp: LinearProgram, pivot_tol: float = LP_PIVOT_TOLERANCE,
                  feas_tol: float = LP_FEASIBILITY_TOLERANCE,
                  max_iterations: int = 200_000) -> LpResult:
    A, relations, b, c, offset, M = _standard_form(lp)
    tableau = _Tableau(A, relations, b, pivot_tol, LP_OPTIMALITY_TOLERANCE, max_iterations)
    if not tableau.phase_one(feas_tol):
        return LpResult(Status.INFEASIBLE, backend='simplex', iterations=tableau.iterations)
    status = tableau.phase_two(c)
    if status != Status.OPTIMAL:
        return LpResult(status, backend='simplex', iterations=tableau.iterations)
    x = offset + M @ tableau.solution()
    return LpResult(Status.OPTIMAL, lp.evaluate(x), x, 'simplex', tableau.iterations)


# ============================================
# HIGHS
# ============================================

def solve_highs(lp: LinearProgram) -> LpResult:
    A = lp.matrix()
    b = lp.rhs()
    le = [r for r, row in enumerate(lp.rows) if row.relation == Relation.LE]
    ge = [r for r, row in enumerate(lp.rows) if row.relation == Relation.GE]
    eq = [r for r, row in enumerate(lp.rows) if row.relation == Relation.EQ]

    ub_rows = le + ge
    sign = np.array([1.0] * len(le) + [-1.0] * len(ge))
    A_ub = b_ub = A_eq = b_eq = None
    if ub_rows:
        A_ub = (diags(sign) @ A[ub_rows]).tocsr()
        b_ub = b[ub_rows] * sign
    if eq:
        A_eq = A[eq]
        b_eq = b[eq]

    c = np.asarray(lp.objective, dtype=float)
    if lp.sense == Sense.MAX:
        c = -c
    bounds = [(None if math.isinf(lo) else lo, None if math.isinf(hi) else hi)
              for lo, hi in zip(lp.lower, lp.upper)]

    res = linprog(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method='highs',
                  options={'primal_feasibility_tolerance': 1e-10,
                           'dual_feasibility_tolerance': 1e-10})
    iterations = int(getattr(res, 'nit', 0) or 0)
    if res.status == 2:
        return LpResult(Status.INFEASIBLE, backend='highs', iterations=iterations)
    if res.status == 3:
        return LpResult(Status.UNBOUNDED, backend='highs', iterations=iterations)
    if res.status != 0:
        raise NumericalBreakdown(f"HiGHS: statut {res.status} ({res.message})")
    x = np.asarray(res.x, dtype=float)
    return LpResult(Status.OPTIMAL, lp.evaluate(x), x, 'highs', iterations)


def solve(lp: LinearProgram, backend: Optional[str] = None) -> LpResult:
    """
    Résout le programme. backend: 'simplex', 'highs' ou 'auto' (défaut de la configuration).
    Une solution optimale est revérifiée : résidu primal <= tolérance de faisabilité.
    """
    from admin.config import get_config

    settings = get_config().lp
    lp.validate()
    backend = backend or settings.backend
    if backend == 'auto':
        cells = len(lp.rows) * max(lp.num_vars, 1)
        backend = 'simplex' if cells <= settings.dense_cell_limit else 'highs'
        logger.debug("PL %dx%d: moteur %s", len(lp.rows), lp.num_vars, backend)

    if backend == 'simplex':
        result = solve_simplex(lp, settings.pivot_tol, settings.feasibility_tol,
                               settings.max_iterations)
    elif backend == 'highs':
        result = solve_highs(lp)
    else:
        raise ConfigError(f"moteur PL inconnu: {backend!r}")

    if result.optimal:
        scale = 1.0 + float(np.max(np.abs(lp.rhs()), initial=0.0))
        residual = lp.residual(result.x)
        if residual > settings.feasibility_tol * scale:
            raise NumericalBreakdown(f"résidu primal {residual:.3g} ({result.backend})")
    return result
