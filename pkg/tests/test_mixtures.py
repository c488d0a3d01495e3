import logging

import pytest

from shared.errors import ConfigError, GammaOutOfRange
from shared.instance import build_instance
from shared.itinerary import Mode, validate_itinerary
from solver.mixtures import (
    POLICY_NAMES, RANDOMIZED_POLICIES, SPLITTABLE_POLICIES, alg3_params, approx0, approx1,
    dispatch_cuvrp, dispatch_cuvrpsd, effective_alpha, flip, run_policy,
)
from solver.policies import PolicyParams
from solver.tsp import exact_tsp

POINTS = [[0, 0], [1, 0], [0, 2], [-1, -1]]


def square(a, b, demands=(0.3, 0.5, 0.4)):
    return build_instance(list(demands), a=a, b=b, points=POINTS)


@pytest.fixture(autouse=True)
def info_logs(caplog):
    caplog.set_level(logging.INFO, logger='cuvrp')


def test_flip_uses_its_own_stream():
    assert flip(1, 0.0) is False
    assert flip(1, 1.0) is True
    assert flip(5, 0.5) == flip(5, 0.5)


def test_effective_alpha(fresh_config, triangle_instance):
    tour = exact_tsp(triangle_instance)
    assert effective_alpha(tour) == 1.0
    fresh_config.policy.alpha = 1.5
    assert effective_alpha(tour) == 1.5


@pytest.mark.parametrize('a, b, arm', [
    (0.0, 1.0, 'alg1_lambda0'), (0.5, 1.0, 'approx1'), (3.0, 1.0, 'approx2'), (1.0, 0.0, 'approx2'),
])
def test_cuvrpsd_dispatch(a, b, arm, caplog):
    inst = square(a, b)
    run = dispatch_cuvrpsd(inst, inst.fixed_realization(), rng=11)
    assert f"-> {arm}" in caplog.text
    if arm == 'alg1_lambda0':
        assert run.trace.arm == arm
    else:
        assert run.trace.notes['dispatched'] == arm
        assert run.trace.policy == 'dispatch'
    assert validate_itinerary(run.itinerary, inst.fixed_realization()).ok


def test_approx1_arms_follow_the_coin():
    inst = square(0.5, 1.0)
    arms = {approx1(inst, inst.fixed_realization(), rng=seed).trace.arm for seed in range(200)}
    assert arms == {'alg1(lambda)', 'alg1(theta*lambda)'}
    run = approx1(inst, inst.fixed_realization(), rng=3)
    assert 0.5 < run.trace.schedule['p'] < 1.0
    assert set(run.trace.schedule) == {'lambda', 'delta', 'theta', 'p'}


def test_approx0_needs_positive_gamma():
    inst = square(0.0, 1.0)
    with pytest.raises(GammaOutOfRange):
        approx0(inst, inst.fixed_realization(), rng=1)


def test_alg3_params():
    p = alg3_params(1.0, 1.5)
    assert (p.lam, p.delta) == (1.0, 1.0 / 3.0)
    p = alg3_params(0.3, 1.5)
    assert p.lam == pytest.approx(0.4)
    assert p.delta == pytest.approx(0.2)


def test_alg3_params_with_schedule(fresh_config):
    fresh_config.policy.use_delta_schedule = True
    fresh_config.policy.epsilon = 0.2
    assert alg3_params(float('inf'), 1.5).delta == pytest.approx(1.0 / 14.0)


@pytest.mark.parametrize('a, b, arm', [
    (0.0, 1.0, 'alg1_lambda0'), (0.2, 1.0, 'approx4'), (2.0, 1.0, 'alg3'),
])
def test_cuvrp_dispatch(a, b, arm, caplog):
    inst = square(a, b)
    run = dispatch_cuvrp(inst, rng=5)
    assert f"-> {arm}" in caplog.text
    assert validate_itinerary(run.itinerary, inst.fixed_realization()).ok
    if arm != 'alg1_lambda0':
        assert run.trace.policy == 'dispatch_cuvrp'


def test_cuvrp_dispatch_falls_back_to_alg4(fresh_config, caplog):
    inst = square(2.0, 1.0)
    fresh_config.setcover.set_cap = 0
    run = dispatch_cuvrp(inst, rng=5)
    assert 'repli sur alg4(1)' in caplog.text
    assert run.trace.notes['dispatched'] == 'alg4'

    fresh_config.setcover.set_cap = 10 ** 6
    fresh_config.policy.gamma0 = 10.0
    run = dispatch_cuvrp(inst, rng=5)
    assert run.trace.notes['dispatched'] == 'alg4'


@pytest.mark.parametrize('name', POLICY_NAMES)
def test_every_policy_runs(name, fresh_config):
    inst = square(1.0, 1.0)
    realization = inst.fixed_realization()
    params = PolicyParams(lam=1.0, delta=1.0 / 3.0) if name in ('alg2', 'alg3') else None
    run = run_policy(name, inst, realization, params, rng=9)
    mode = Mode.SPLITTABLE if name in SPLITTABLE_POLICIES else Mode.UNSPLITTABLE
    assert validate_itinerary(run.itinerary, realization, mode).ok


def test_run_policy_errors():
    inst = square(1.0, 1.0)
    with pytest.raises(ConfigError):
        run_policy('christofides', inst, inst.fixed_realization())
    with pytest.raises(ConfigError):
        run_policy('alg3', inst, inst.fixed_realization(), rng=1)
    assert 'alg1_lambda0' not in RANDOMIZED_POLICIES
