import logging
import threading
from unittest import mock

import numpy as np
import pytest

from admin.config import SolverConfig, default_settings, get_config
from admin.database import AdminDB
from shared.errors import ConfigError
from shared.seeding import SeedStreams, as_streams
from solver.runner import run_tasks


# ============================================
# CONFIGURATION
# ============================================

def test_singleton_and_reset():
    config = get_config()
    assert config is SolverConfig.get_instance()
    config.oracle.grid_points = 7
    assert SolverConfig.reset().oracle.grid_points == 10 ** 4


def test_overrides_are_coerced():
    config = get_config()
    config.apply_overrides({'tsp.exact_limit': '9', 'policy.shortcut_case31': 'on',
                            'policy.alpha': '1.5', 'lp.backend': 'highs'})
    assert config.tsp.exact_limit == 9
    assert config.policy.shortcut_case31 is True
    assert config.policy.alpha == 1.5
    assert config.lp.backend == 'highs'
    config.apply_overrides({'policy.alpha': 'none'})
    assert config.policy.alpha is None


@pytest.mark.parametrize('override', [
    {'tsp.nope': 1}, {'nope.exact_limit': 1}, {'tsp': 1},
    {'policy.shortcut_case31': 'maybe'}, {'tsp.exact_limit': 'many'},
])
def test_bad_overrides(override):
    with pytest.raises(ConfigError):
        get_config().apply_overrides(override)


def test_fingerprint_tracks_settings():
    config = get_config()
    before = config.fingerprint()
    assert before == SolverConfig().fingerprint()
    config.apply_overrides({'oracle.grid_points': 100})
    assert config.fingerprint() != before
    assert set(default_settings()) == set(config.to_dict())


def test_mongodb_fallback(monkeypatch, caplog):
    caplog.set_level(logging.WARNING, logger='cuvrp')

    def unreachable(cls, uri=None):
        raise RuntimeError("serveur injoignable")

    monkeypatch.setattr(AdminDB, 'get_instance', classmethod(unreachable))
    config = get_config()
    config.tsp.exact_limit = 3
    config.load_from_mongodb('mongodb://nowhere:1')
    assert config.source == 'defaults'
    assert config.tsp.exact_limit == 15
    assert 'MongoDB non disponible' in caplog.text


def test_mongodb_overrides(monkeypatch):
    client = mock.MagicMock()
    db = AdminDB(client=client)
    db.settings.find.return_value = [{'section': 'runner', 'key': 'threads', 'value': 2}]
    monkeypatch.setattr(AdminDB, 'get_instance', classmethod(lambda cls, uri=None: db))

    config = get_config()
    config.load_from_mongodb()
    assert config.source == 'mongodb'
    assert config.runner.threads == 2


def test_init_default_data_seeds_once():
    db = AdminDB(client=mock.MagicMock())
    db.settings.count_documents.return_value = 0
    inserted = db.init_default_data()
    docs = db.settings.insert_many.call_args[0][0]
    assert inserted == len(docs)
    assert {'section': 'tsp', 'key': 'exact_limit', 'value': 15} in docs

    db.settings.count_documents.return_value = 3
    assert db.init_default_data() == 0


def test_set_value_upserts_one_setting():
    db = AdminDB(client=mock.MagicMock())
    db.set_value('oracle', 'grid_points', 500)
    db.settings.update_one.assert_called_once_with(
        {'section': 'oracle', 'key': 'grid_points'}, {'$set': {'value': 500}}, upsert=True)


# ============================================
# GRAINES ET EXÉCUTION
# ============================================

def test_seed_streams_are_independent_and_reproducible():
    streams = SeedStreams(42)
    a = streams.generator('coin').random(4)
    b = streams.generator('rounding').random(4)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, SeedStreams(42).generator('coin').random(4))
    child = streams.child(3).generator('coin').random(4)
    assert not np.allclose(a, child)
    assert as_streams(streams) is streams
    with pytest.raises(ConfigError):
        as_streams(None)


@pytest.mark.parametrize('threads', [1, 2, 8])
def test_run_tasks_keeps_order(threads):
    seen = set()
    lock = threading.Lock()

    def square(x):
        with lock:
            seen.add(threading.get_ident())
        return x * x

    assert run_tasks(square, list(range(20)), threads) == [x * x for x in range(20)]
    if threads == 1:
        assert seen == {threading.get_ident()}


def test_run_tasks_rejects_bad_thread_count(fresh_config):
    with pytest.raises(ConfigError):
        run_tasks(abs, [1, 2], 0)
    fresh_config.runner.threads = 1
    assert run_tasks(abs, [-1, -2]) == [1, 2]


def test_run_tasks_propagates_errors():
    def fail(x):
        if x == 3:
            raise ValueError("tâche 3")
        return x

    with pytest.raises(ValueError):
        run_tasks(fail, list(range(6)), 3)
