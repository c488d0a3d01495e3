import numpy as np
import pytest

from shared.errors import ConfigError
from shared.instance import check_metric
from solver.generator import DEMAND_REGIMES, GeneratorConfig, generate_instance


@pytest.mark.parametrize('data', [
    {'n': 0},
    {'metric': 'manhattan'},
    {'demands': 'poisson'},
    {'Q': 0.0},
])
def test_generator_config_rejects_bad_values(data):
    with pytest.raises(ConfigError):
        GeneratorConfig(**data)


def test_generator_config_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        GeneratorConfig.from_dict({'n': 3, 'clients': 3})
    config = GeneratorConfig.from_dict({'n': 3, 'seed': 7})
    assert GeneratorConfig.from_dict(config.to_dict()) == config


@pytest.mark.parametrize('metric', ['euclidean', 'line', 'random-metric'])
def test_same_seed_same_instance(metric):
    config = GeneratorConfig(n=5, metric=metric, seed=11)
    first, second = generate_instance(config), generate_instance(config)
    assert np.array_equal(first.weight, second.weight)
    assert first.to_dict() == second.to_dict()
    other = generate_instance(GeneratorConfig(n=5, metric=metric, seed=12))
    assert not np.array_equal(first.weight, other.weight)


@pytest.mark.parametrize('seed', range(5))
def test_random_metric_is_closed_under_shortest_paths(seed):
    inst = generate_instance(GeneratorConfig(n=7, metric='random-metric', seed=seed))
    check_metric(inst.weight)
    assert inst.points is None
    off_diagonal = inst.weight[~np.eye(inst.n + 1, dtype=bool)]
    assert off_diagonal.min() >= 1.0 - 1e-12
    assert off_diagonal.max() <= 2.0 + 1e-12


def test_line_customers_lie_on_one_side_of_depot():
    inst = generate_instance(GeneratorConfig(n=6, metric='line', seed=3))
    xs = inst.points[1:, 0]
    assert np.all(xs > 0)
    assert np.all(np.diff(xs) >= 0)
    assert np.allclose(inst.points[:, 1], 0.0)


# ============================================
# DEMANDES
# ============================================

def test_fixed_family_is_deterministic_and_within_regimes():
    inst = generate_instance(GeneratorConfig(n=20, demands='fixed', seed=5))
    assert inst.is_deterministic
    lowest = min(low for low, _, _ in DEMAND_REGIMES.values())
    assert all(lowest <= d <= 1.0 for d in inst.fixed_realization().d)


def test_two_point_family_has_a_small_value():
    inst = generate_instance(GeneratorConfig(n=10, demands='two-point', seed=2))
    small_high = DEMAND_REGIMES['small'][1]
    for spec in inst.demands:
        assert len(spec.values) == 2
        assert spec.values[0] <= small_high


def test_uniform_family_support():
    inst = generate_instance(GeneratorConfig(n=4, demands='uniform', seed=9))
    for spec in inst.demands:
        assert len(spec.values) == 3
        assert spec.probs == pytest.approx((1 / 3, 1 / 3, 1 / 3))
        assert list(spec.values) == sorted(spec.values)


def test_capacity_scaling_is_undone_by_normalization():
    unit = generate_instance(GeneratorConfig(n=6, demands='fixed', seed=4))
    scaled = generate_instance(GeneratorConfig(n=6, demands='fixed', Q=8.0, seed=4))
    assert scaled.fixed_realization().d == pytest.approx(unit.fixed_realization().d)
    assert scaled.b == pytest.approx(8.0 * unit.b)
