"""
Exécution parallèle des tâches indépendantes (balayages de PL, essais Monte-Carlo).
Le résultat suit l'ordre des tâches, quel que soit l'ordre de fin.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from shared.errors import ConfigError
from shared.log import get_logger

logger = get_logger('runner')

T = TypeVar('T')
R = TypeVar('R')


def run_tasks(fn: Callable[[T], R], tasks: Sequence[T], threads: Optional[int] = None) -> List[R]:
    from admin.config import get_config

    threads = get_config().runner.threads if threads is None else threads
    if threads < 1:
        raise ConfigError(f"threads={threads} doit être >= 1")
    if threads == 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]

    logger.debug("%d tâches sur %d fils", len(tasks), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map conserve l'ordre et relève la première exception
        return list(pool.map(fn, tasks))
