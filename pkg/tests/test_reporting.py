import math

import pytest

from admin.config import get_config
from admin.reporting import (
    cost_row, csv_header_line, csv_text, format_value, read_binary_archive, read_csv,
    write_binary_archive,
)
from shared import protocol
from shared.itinerary import CostBreakdown


@pytest.mark.parametrize('value, text', [
    (None, ''),
    (True, 'true'),
    (False, 'false'),
    (math.inf, 'inf'),
    (-math.inf, '-inf'),
    (math.nan, 'nan'),
    (1.0 / 3.0, '0.333333333333'),
    (7, '7'),
    ('approx1', 'approx1'),
])
def test_format_value(value, text):
    assert format_value(value) == text


def test_csv_starts_with_schema_and_fingerprint():
    text = csv_text([{'policy': 'alg1', 'total': 2.5}])
    first = text.splitlines()[0]
    assert first == csv_header_line()
    assert first == f"# schema=1 config={get_config().fingerprint()}"


def test_csv_read_back_skips_comment_line():
    rows = [{'policy': 'alg1', 'total': 2.5}, {'policy': 'alg2', 'total': None, 'arm': 'T1'}]
    back = read_csv(csv_text(rows))
    assert [r['policy'] for r in back] == ['alg1', 'alg2']
    # colonnes : union dans l'ordre d'apparition
    assert list(back[0]) == ['policy', 'total', 'arm']
    assert back[1]['total'] == ''


def test_csv_header_follows_configuration():
    before = csv_header_line()
    get_config().apply_overrides({'oracle.grid_points': '500'})
    assert csv_header_line() != before


def test_cost_row_carries_breakdown():
    row = cost_row('approx2', CostBreakdown(3.0, 1.5), arm='T2')
    assert row == {'policy': 'approx2', 'vehicle_cost': 3.0, 'cargo_cost': 1.5, 'total': 4.5,
                   'arm': 'T2'}


# ============================================
# ARCHIVES BINAIRES
# ============================================

def test_binary_archive_keeps_record_order(tmp_path, triangle_instance):
    path = tmp_path / 'run.bin'
    trace = {'policy': 'alg1', 'initial_load': 0.25,
             'steps': [{'customer': 1, 'case': 'DELIVER'}, {'customer': 2, 'case': 'REFILL'}]}
    written = write_binary_archive(str(path), triangle_instance, trace, CostBreakdown(24.0, 3.2))
    assert written == path.stat().st_size

    records = read_binary_archive(str(path))
    assert [r['kind'] for r in records] == ['instance', 'trace', 'trace_step', 'trace_step', 'cost']
    assert records[0]['data'] == triangle_instance.to_dict()
    assert 'steps' not in records[1]['data']
    assert records[3]['data']['case'] == 'REFILL'
    assert records[-1]['data']['total'] == pytest.approx(27.2)


def test_truncated_archive_is_rejected(tmp_path, triangle_instance):
    path = tmp_path / 'run.bin'
    write_binary_archive(str(path), triangle_instance, {'policy': 'alg1'}, CostBreakdown(1.0, 1.0))
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(ValueError):
        read_binary_archive(str(path))


def test_unknown_record_kind_is_rejected():
    with pytest.raises(ValueError):
        protocol.pack_record(99, {})
