"""
Exceptions du laboratoire Cu-VRP.
Chaque erreur porte le code de sortie utilisé par la ligne de commande.
"""

from typing import Optional, Tuple


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


class CuVRPError(Exception):
    """Erreur de base."""
    exit_code = EXIT_CONFIG


class ConfigError(CuVRPError):
    exit_code = EXIT_CONFIG


# ============================================
# INSTANCES ET ITINÉRAIRES
# ============================================

class InstanceError(CuVRPError):
    exit_code = EXIT_INFEASIBLE


class MetricViolation(InstanceError):
    """La matrice n'est pas une métrique (symétrie, diagonale, inégalité triangulaire)."""

    def __init__(self, message: str, triple: Optional[Tuple[int, int, int]] = None):
        super().__init__(message)
        self.triple = triple


class DemandOutOfRange(InstanceError):
    pass


class InvalidDemandSpec(InstanceError):
    pass


class BothCostParamsZero(InstanceError):
    pass


class InfeasibleDemand(InstanceError):
    """Une demande dépasse la capacité normalisée."""

    def __init__(self, customer: int, demand: float):
        super().__init__(f"client {customer}: demande {demand} > 1")
        self.customer = customer
        self.demand = demand


class LoadInconsistency(InstanceError):
    pass


class EtaZero(InstanceError):
    pass


class PrematureReveal(CuVRPError):
    """Lecture d'une demande avant la visite du client."""

    def __init__(self, customer: int):
        super().__init__(f"demande du client {customer} lue avant sa visite")
        self.customer = customer


# ============================================
# GARDES DE TAILLE
# ============================================

class TooLarge(InstanceError):
    def __init__(self, what: str, size: int, limit: int):
        super().__init__(f"{what}: taille {size} > limite {limit}")
        self.size = size
        self.limit = limit


class SetTooLarge(TooLarge):
    pass


class UniverseTooLarge(TooLarge):
    pass


class ExplosionGuard(TooLarge):
    pass


class CoverInfeasible(InstanceError):
    """Un élément n'est couvert par aucun ensemble."""

    def __init__(self, element: int):
        super().__init__(f"l'élément {element} n'est couvert par aucun ensemble")
        self.element = element


# ============================================
# PROGRAMMATION LINÉAIRE
# ============================================

class LpError(CuVRPError):
    exit_code = EXIT_NUMERICAL


class LpInfeasible(LpError):
    exit_code = EXIT_INFEASIBLE


class DimensionMismatch(LpError):
    exit_code = EXIT_CONFIG


class NumericalBreakdown(LpError):
    exit_code = EXIT_NUMERICAL


# ============================================
# ANALYSE
# ============================================

class GammaOutOfRange(CuVRPError):
    exit_code = EXIT_CONFIG


class DegenerateTheta(CuVRPError):
    exit_code = EXIT_CONFIG
