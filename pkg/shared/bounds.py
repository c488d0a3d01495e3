"""
Borne inférieure et calcul des intégrales de F.

F est la mesure finie qui met la masse 2*l_i/eta au point d_i : alors
l'intégrale de x^t dF sur ]l, r] vaut somme(2 * d_i^t * l_i / eta) pour l < d_i <= r.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from shared.constants import PROFILE_TOLERANCE
from shared.errors import EtaZero
from shared.instance import Instance, Realization


def eta(instance: Instance, realization: Realization) -> float:
    d = realization.as_array()
    radial = np.asarray(instance.weight[0, 1:], dtype=float)
    return math.fsum(2.0 * d * radial)


@dataclass(frozen=True)
class LowerBoundReport:
    tau: float
    eta: float
    gamma: float
    sigma: float
    lb: float
    a: float
    b: float

    def to_dict(self) -> dict:
        return {'tau': self.tau, 'eta': self.eta, 'gamma': self.gamma,
                'sigma': self.sigma, 'lb': self.lb}


def lower_bound(instance: Instance, realization: Realization, tau: float) -> LowerBoundReport:
    """LB = a*max(tau, eta) + b*0.5*eta, conditionnée à la réalisation."""
    e = eta(instance, realization)
    lb = instance.a * max(tau, e) + instance.b * 0.5 * e
    sigma = math.inf if e == 0 else tau / e
    return LowerBoundReport(tau=tau, eta=e, gamma=instance.gamma, sigma=sigma,
                            lb=lb, a=instance.a, b=instance.b)


@dataclass(frozen=True, eq=False)
class DemandProfile:
    """Points d_i > 0 et masses 2*l_i/eta."""
    values: np.ndarray
    masses: np.ndarray

    @staticmethod
    def from_realization(instance: Instance, realization: Realization) -> 'DemandProfile':
        e = eta(instance, realization)
        if e == 0:
            raise EtaZero("eta = 0 : aucune demande positive loin du dépôt")
        d = realization.as_array()
        radial = np.asarray(instance.weight[0, 1:], dtype=float)
        keep = d > 0
        return DemandProfile(values=d[keep], masses=2.0 * radial[keep] / e)

    @staticmethod
    def from_points(values, masses) -> 'DemandProfile':
        return DemandProfile(values=np.asarray(values, dtype=float),
                             masses=np.asarray(masses, dtype=float))

    def integral(self, l: float, r: float, t: int) -> float:
        if t not in (0, 1, 2):
            raise ValueError(f"moment t={t} hors de {{0, 1, 2}}")
        inside = (self.values > l) & (self.values <= r)
        return math.fsum(self.masses[inside] * self.values[inside] ** t)

    def mu(self, lam: float) -> float:
        """Rapport des moments 2 et 1 sur ]0, lam] ; 0 si aucune masse."""
        first = self.integral(0.0, lam, 1)
        if first == 0:
            return 0.0
        return self.integral(0.0, lam, 2) / first

    def check_invariants(self, l: float = 0.0, r: float = 1.0,
                         tol: float = PROFILE_TOLERANCE) -> bool:
        """Normalisation du premier moment et encadrement des moments successifs."""
        if abs(self.integral(0.0, 1.0, 1) - 1.0) > tol:
            return False
        for t in (1, 2):
            lower = self.integral(l, r, t - 1)
            mid = self.integral(l, r, t)
            if l * lower > mid + tol or mid > r * lower + tol:
                return False
        return True


def profile_of(instance: Instance, realization: Realization) -> Optional[DemandProfile]:
    """Profil de la réalisation, ou None quand eta = 0."""
    try:
        return DemandProfile.from_realization(instance, realization)
    except EtaZero:
        return None
