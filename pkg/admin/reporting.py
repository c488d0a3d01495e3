"""
Écriture des artefacts : CSV (ligne d'en-tête commentée, 12 chiffres significatifs),
traces en lignes JSON, archives binaires msgpack.
"""

import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional, Sequence, TextIO

from shared import constants as C
from shared import protocol
from shared.instance import Instance
from shared.itinerary import CostBreakdown
from shared.log import get_logger

logger = get_logger('reporting')


def format_value(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return 'nan'
        return f"{value:.{C.CSV_SIGNIFICANT_DIGITS}g}"
    return str(value)


def csv_header_line() -> str:
    from admin.config import get_config

    return f"# schema={C.CSV_SCHEMA_VERSION} config={get_config().fingerprint()}"


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """'-' ou None : sortie standard."""
    if path in (None, '-'):
        yield sys.stdout
        return
    with open(path, 'w', encoding='utf-8', newline='') as f:
        yield f


def write_csv(stream: TextIO, rows: Sequence[Dict[str, Any]],
              fieldnames: Optional[List[str]] = None) -> int:
    if fieldnames is None:
        fieldnames = []
        for row in rows:
            fieldnames.extend(k for k in row if k not in fieldnames)
    stream.write(csv_header_line() + '\n')
    writer = csv.DictWriter(stream, fieldnames=fieldnames, extrasaction='ignore',
                            lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format_value(row.get(k)) for k in fieldnames})
    return len(rows)


def csv_text(rows: Sequence[Dict[str, Any]], fieldnames: Optional[List[str]] = None) -> str:
    buffer = io.StringIO()
    write_csv(buffer, rows, fieldnames)
    return buffer.getvalue()


def read_csv(text: str) -> List[Dict[str, str]]:
    """Relit un CSV écrit par write_csv (la ligne commentée est sautée)."""
    lines = [line for line in text.splitlines() if not line.startswith('#')]
    return list(csv.DictReader(lines))


def cost_row(policy: str, cost: CostBreakdown, **extra: Any) -> Dict[str, Any]:
    row: Dict[str, Any] = {'policy': policy}
    row.update(cost.to_dict())
    row.update(extra)
    return row


# ============================================
# TRACES
# ============================================

def write_trace(path: str, lines: Sequence[str]):
    with open(path, 'w', encoding='utf-8') as f:
        for line in lines:
            f.write(line + '\n')
    logger.debug("trace écrite: %s (%d lignes)", path, len(lines))


def write_json(stream: TextIO, data: Any):
    json.dump(data, stream, indent=2, sort_keys=True, default=format_value)
    stream.write('\n')


def write_binary_archive(path: str, instance: Instance, trace: Dict[str, Any],
                         cost: CostBreakdown) -> int:
    """Instance, en-tête de trace, étapes, puis la ligne de coût."""
    header = {k: v for k, v in trace.items() if k != 'steps'}
    records = [(protocol.REC_INSTANCE, instance.to_dict()), (protocol.REC_TRACE, header)]
    records.extend((protocol.REC_TRACE_STEP, step) for step in trace.get('steps', []))
    records.append((protocol.REC_COST, cost.to_dict()))
    with open(path, 'wb') as f:
        written = protocol.write_records(f, records)
    logger.info("archive binaire %s: %d enregistrements, %d octets", path, len(records), written)
    return written


def read_binary_archive(path: str) -> List[dict]:
    with open(path, 'rb') as f:
        return [{'kind': protocol.RECORD_NAMES[r['k']], 'data': r['d']}
                for r in protocol.read_records(f)]
