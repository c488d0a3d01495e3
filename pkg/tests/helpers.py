"""Stratégies hypothesis et petits utilitaires partagés par les tests."""

import math

import numpy as np
from hypothesis import strategies as st

from shared.instance import DemandSpec, build_instance

demand_values = st.floats(min_value=0.01, max_value=1.0, allow_nan=False)


def line_points(positions):
    return [[0.0, 0.0]] + [[float(x), 0.0] for x in positions]


@st.composite
def demand_specs(draw, stochastic=True):
    if not stochastic or draw(st.booleans()):
        return DemandSpec.fixed(draw(demand_values))
    low = draw(st.floats(min_value=0.0, max_value=0.5))
    high = draw(st.floats(min_value=0.3, max_value=1.0))
    p = draw(st.floats(min_value=0.1, max_value=0.9))
    return DemandSpec.discrete([(low, p), (high, 1.0 - p)])


@st.composite
def instances(draw, min_n=1, max_n=6, stochastic=True, a=None, b=None):
    """Instances euclidiennes du carré [0, 4]^2, demandes fixes ou à deux points."""
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    coords = draw(st.lists(
        st.tuples(st.integers(min_value=0, max_value=40), st.integers(min_value=0, max_value=40)),
        min_size=n + 1, max_size=n + 1, unique=True,
    ))
    points = np.array(coords, dtype=float) / 10.0
    specs = [draw(demand_specs(stochastic)) for _ in range(n)]
    a = draw(st.sampled_from([0.0, 0.2, 1.0, 3.0])) if a is None else a
    b = draw(st.sampled_from([0.5, 1.0, 2.0])) if b is None else b
    return build_instance(specs, a=a, b=b, points=points)


def cost_bound(instance, tour_weight):
    """Majorant du coût réalisé d'ALG.1 : deux allers-retours de plus par client, charge <= 1."""
    radial = math.fsum(instance.radial(v) for v in range(1, instance.n + 1))
    return (instance.a + instance.b) * (tour_weight + 4.0 * radial)


def circular_distance(x, y, period):
    gap = abs(x - y) % period
    return min(gap, period - gap)
