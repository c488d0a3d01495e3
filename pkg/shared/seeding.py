"""
Graines et sous-flux aléatoires.
Une graine maîtresse unique ; chaque usage (charge initiale, pièce des
mélanges, arrondi, tirage des demandes) lit son propre sous-flux nommé.
"""

import zlib
from typing import Optional, Sequence

import numpy as np

from shared.errors import ConfigError


STREAM_INITIAL_LOAD = 'initial_load'
STREAM_COIN = 'coin'
STREAM_ROUNDING = 'rounding'
STREAM_DEMANDS = 'demands'
STREAM_INSTANCE = 'instance'


def _stream_key(name: str) -> int:
    # crc32 : stable entre les process, contrairement à hash()
    return zlib.crc32(name.encode('utf-8'))


class SeedStreams:
    """Fabrique de générateurs indépendants dérivés d'une graine maîtresse."""

    def __init__(self, seed: int, path: Sequence[int] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)

    def generator(self, name: str) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=self.path + (_stream_key(name),))
        return np.random.default_rng(ss)

    def child(self, index: int) -> 'SeedStreams':
        """Sous-flux d'une tâche : (graine maîtresse, indice de tâche)."""
        return SeedStreams(self.seed, self.path + (int(index),))

    def __repr__(self) -> str:
        return f"SeedStreams(seed={self.seed}, path={self.path})"


def as_streams(seed: Optional[object]) -> SeedStreams:
    """Accepte une graine entière ou un SeedStreams déjà construit."""
    if isinstance(seed, SeedStreams):
        return seed
    if seed is None:
        raise ConfigError("une graine est obligatoire pour une politique randomisée")
    return SeedStreams(int(seed))
