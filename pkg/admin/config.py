"""
SolverConfig - Configuration centralisée du laboratoire.
Valeurs par défaut intégrées, surchargées depuis MongoDB ou la ligne de commande.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional

from shared import constants as C
from shared.errors import ConfigError
from shared.log import get_logger

logger = get_logger('config')


@dataclass
class PolicySettings:
    shortcut_case31: bool = False
    # None : garantie du fournisseur de tournée (1 exact, 2 double arbre)
    alpha: Optional[float] = None
    theta_small_gamma: float = C.THETA_SMALL_GAMMA
    theta_mid_gamma: float = C.THETA_MID_GAMMA
    theta_cuvrp: float = C.THETA_CUVRP
    gamma_theta_switch: float = C.GAMMA_THETA_SWITCH
    gamma_approx1_max: float = C.GAMMA_APPROX1_MAX
    gamma_approx4_max: float = C.GAMMA_APPROX4_MAX
    # ALG.3 n'est retenu que pour gamma > gamma0
    gamma0: float = 0.0
    alg3_delta: float = 1.0 / 3.0
    use_delta_schedule: bool = False
    epsilon: float = 0.1


@dataclass
class TspSettings:
    provider: str = 'auto'
    exact_limit: int = 15
    two_opt_passes: int = 50


@dataclass
class LpSettings:
    backend: str = 'auto'
    # au-delà de lignes x colonnes, 'auto' passe à HiGHS
    dense_cell_limit: int = 250_000
    feasibility_tol: float = C.LP_FEASIBILITY_TOLERANCE
    pivot_tol: float = C.LP_PIVOT_TOLERANCE
    max_iterations: int = 200_000


@dataclass
class SetCoverSettings:
    set_cap: int = 10 ** 6
    exact_universe_limit: int = 20
    tour_size_limit: int = 6


@dataclass
class OracleSettings:
    grid_points: int = 10 ** 4
    brute_force_limit: int = 8
    expectation_cap: int = 10 ** 5
    split_resolution: float = 0.1
    split_limit: int = 4


@dataclass
class RunnerSettings:
    threads: int = field(default_factory=lambda: int(os.environ.get('CUVRP_THREADS', '4')))


SECTIONS = {
    'policy': PolicySettings,
    'tsp': TspSettings,
    'lp': LpSettings,
    'setcover': SetCoverSettings,
    'oracle': OracleSettings,
    'runner': RunnerSettings,
}


def _coerce(current: Any, value: Any) -> Any:
    """Convertit une valeur texte (--set) vers le type du champ."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    if text.lower() in ('none', 'null'):
        return None
    kind = type(current) if current is not None else float
    if kind is bool:
        if text.lower() in ('1', 'true', 'yes', 'on'):
            return True
        if text.lower() in ('0', 'false', 'no', 'off'):
            return False
        raise ConfigError(f"booléen attendu: {value!r}")
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"valeur {value!r} invalide ({exc})") from exc


class SolverConfig:
    """Configuration globale, chargée depuis MongoDB ou les valeurs par défaut."""

    _instance: Optional['SolverConfig'] = None

    def __init__(self):
        self.policy = PolicySettings()
        self.tsp = TspSettings()
        self.lp = LpSettings()
        self.setcover = SetCoverSettings()
        self.oracle = OracleSettings()
        self.runner = RunnerSettings()

        self.source = 'defaults'

    @classmethod
    def get_instance(cls) -> 'SolverConfig':
        """Singleton pattern."""
        if cls._instance is None:
            cls._instance = cls()
        return cls._instance

    @classmethod
    def reset(cls) -> 'SolverConfig':
        cls._instance = cls()
        return cls._instance

    def load_defaults(self):
        """Recharge les valeurs intégrées (sans MongoDB)."""
        for name, section in SECTIONS.items():
            setattr(self, name, section())
        self.source = 'defaults'
        logger.debug("configuration par défaut chargée")

    def load_from_mongodb(self, mongo_uri: str = None):
        """Charge les surcharges depuis MongoDB ; repli sur les défauts si la base est injoignable."""
        try:
            from admin.database import AdminDB

            db = AdminDB.get_instance(mongo_uri)
            overrides = db.overrides()
        except Exception as e:
            logger.warning("MongoDB non disponible (%s), utilisation des valeurs par défaut", e)
            self.load_defaults()
            return

        self.load_defaults()
        self.apply_overrides(overrides)
        self.source = 'mongodb'
        logger.info("configuration chargée depuis MongoDB: %d réglages", len(overrides))

    def apply_overrides(self, overrides: Dict[str, Any]):
        for dotted, value in overrides.items():
            section_name, _, key = dotted.partition('.')
            section = getattr(self, section_name, None) if section_name in SECTIONS else None
            if section is None or not key:
                raise ConfigError(f"réglage inconnu: {dotted!r}")
            known = {f.name for f in fields(section)}
            if key not in known:
                raise ConfigError(f"réglage inconnu: {dotted!r}")
            current = getattr(section, key)
            setattr(section, key, _coerce(current, value))

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        return {name: asdict(getattr(self, name)) for name in SECTIONS}

    def fingerprint(self) -> str:
        """Empreinte courte de la configuration (en-tête des CSV)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode('utf-8')).hexdigest()[:12]


def default_settings() -> Dict[str, Dict[str, Any]]:
    """Réglages par défaut, section par section (semence de la base)."""
    return {name: asdict(section()) for name, section in SECTIONS.items()}


# Fonction globale pour accéder à la config
def get_config() -> SolverConfig:
    """Retourne l'instance singleton de la configuration."""
    return SolverConfig.get_instance()
