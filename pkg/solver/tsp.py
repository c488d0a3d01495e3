"""
Fournisseurs de tournées TSP : exact (Held-Karp), double arbre, 2-opt.
Une tournée est une permutation (0, v1, ..., vn, 0).
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from shared.constants import ALPHA_DOUBLE_TREE, ALPHA_EXACT, METRIC_TOLERANCE
from shared.errors import ConfigError, TooLarge
from shared.instance import DEPOT, Instance
from shared.log import get_logger

logger = get_logger('tsp')


@dataclass(frozen=True)
class TourResult:
    tour: Tuple[int, ...]
    weight: float
    alpha: float
    # w(T*)/tau quand tau exact est connu
    realized_ratio: Optional[float] = None
    provider: str = ''

    @property
    def order(self) -> Tuple[int, ...]:
        return self.tour[1:-1]

    def edges(self) -> List[Tuple[int, int]]:
        return list(zip(self.tour, self.tour[1:]))

    def to_dict(self) -> dict:
        return {'tour': list(self.tour), 'weight': self.weight, 'alpha': self.alpha,
                'realized_ratio': self.realized_ratio, 'provider': self.provider}


def tour_weight(instance: Instance, tour: Sequence[int]) -> float:
    return math.fsum(instance.w(u, v) for u, v in zip(tour, tour[1:]))


def is_permutation_tour(tour: Sequence[int], n: int) -> bool:
    return (len(tour) == n + 2 and tour[0] == DEPOT and tour[-1] == DEPOT
            and sorted(tour[1:-1]) == list(range(1, n + 1)))


# ============================================
# HELD-KARP
# ============================================

def exact_tsp(instance: Instance, limit: int = 15) -> TourResult:
    """Programmation dynamique sur les sous-ensembles de clients, couche par cardinal."""
    n = instance.n
    if n > limit:
        raise TooLarge('exact_tsp', n, limit)
    if n == 0:
        return TourResult((DEPOT, DEPOT), 0.0, ALPHA_EXACT, 1.0, 'exact')

    W = np.asarray(instance.weight, dtype=float)
    Wc = W[1:, 1:]
    full = (1 << n) - 1
    dp = np.full((1 << n, n), np.inf)
    parent = np.full((1 << n, n), -1, dtype=np.int64)
    for j in range(n):
        dp[1 << j, j] = W[DEPOT, j + 1]

    masks = np.arange(1 << n, dtype=np.int64)
    popcount = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        popcount += (masks >> j) & 1

    for size in range(2, n + 1):
        layer = masks[popcount == size]
        for j in range(n):
            sel = layer[(layer >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            cand = dp[prev, :] + Wc[:, j][None, :]
            best = np.argmin(cand, axis=1)
            dp[sel, j] = cand[np.arange(len(sel)), best]
            parent[sel, j] = best

    closing = dp[full, :] + W[1:, DEPOT]
    last = int(np.argmin(closing))
    weight = float(closing[last])

    order = []
    mask, j = full, last
    while j >= 0:
        order.append(j + 1)
        k = int(parent[mask, j])
        mask ^= 1 << j
        j = k
    tour = (DEPOT,) + tuple(reversed(order)) + (DEPOT,)
    return TourResult(tour, tour_weight(instance, tour), ALPHA_EXACT, 1.0, 'exact')


# ============================================
# DOUBLE ARBRE
# ============================================

def minimum_spanning_tree(weight: np.ndarray) -> List[List[int]]:
    """Prim en O(V^2) ; les poids nuls sont des arêtes ordinaires. Retourne les listes d'enfants."""
    size = weight.shape[0]
    in_tree = np.zeros(size, dtype=bool)
    key = np.full(size, np.inf)
    parent = np.full(size, -1, dtype=np.int64)
    key[DEPOT] = 0.0
    children: List[List[int]] = [[] for _ in range(size)]

    for _ in range(size):
        masked = np.where(in_tree, np.inf, key)
        u = int(np.argmin(masked))
        in_tree[u] = True
        if parent[u] >= 0:
            children[parent[u]].append(u)
        closer = (~in_tree) & (weight[u] < key)
        key[closer] = weight[u][closer]
        parent[closer] = u

    for c in children:
        c.sort()
    return children


def double_tree_tsp(instance: Instance) -> TourResult:
    """Parcours préfixe d'un arbre couvrant minimal, raccourci : 2-approximation."""
    children = minimum_spanning_tree(np.asarray(instance.weight, dtype=float))
    preorder = []
    stack = [DEPOT]
    while stack:
        u = stack.pop()
        preorder.append(u)
        stack.extend(reversed(children[u]))
    tour = tuple(preorder) + (DEPOT,)
    return TourResult(tour, tour_weight(instance, tour), ALPHA_DOUBLE_TREE, None, 'double_tree')


# ============================================
# 2-OPT
# ============================================

def two_opt(result: TourResult, instance: Instance, passes: int = 50) -> TourResult:
    """Amélioration 2-opt (première amélioration) ; le poids ne croît jamais."""
    route = list(result.tour)
    W = instance.weight
    size = len(route)
    for p in range(passes):
        improved = False
        for i in range(1, size - 2):
            for j in range(i + 1, size - 1):
                a, b = route[i - 1], route[i]
                c, d = route[j], route[j + 1]
                delta = W[a, c] + W[b, d] - W[a, b] - W[c, d]
                if delta < -METRIC_TOLERANCE:
                    route[i:j + 1] = route[i:j + 1][::-1]
                    improved = True
        if not improved:
            logger.debug("2-opt: optimum local après %d passes", p + 1)
            break

    tour = tuple(route)
    weight = tour_weight(instance, tour)
    if weight > result.weight:
        return result
    return replace(result, tour=tour, weight=weight, realized_ratio=None,
                   provider=f"{result.provider}+2opt")


def get_tour(instance: Instance, provider: Optional[str] = None) -> TourResult:
    """Tournée selon le fournisseur configuré : exact, double_tree, double_tree_2opt ou auto."""
    from admin.config import get_config

    settings = get_config().tsp
    provider = provider or settings.provider
    if provider == 'auto':
        provider = 'exact' if instance.n <= settings.exact_limit else 'double_tree_2opt'

    if provider == 'exact':
        return exact_tsp(instance, settings.exact_limit)
    if provider == 'double_tree':
        return double_tree_tsp(instance)
    if provider == 'double_tree_2opt':
        return two_opt(double_tree_tsp(instance), instance, settings.two_opt_passes)
    raise ConfigError(f"fournisseur TSP inconnu: {provider!r}")


def tau_lower(instance: Instance, tour: TourResult) -> float:
    """tau exact si la tournée est optimale, sinon le poids de l'arbre couvrant (<= tau)."""
    if tour.provider.startswith('exact'):
        return tour.weight
    children = minimum_spanning_tree(instance.weight)
    return math.fsum(instance.w(u, v) for u, kids in enumerate(children) for v in kids)
