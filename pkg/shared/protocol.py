"""
Format binaire des archives du laboratoire.
Chaque enregistrement est encadré par sa longueur, comme un message réseau.
"""

from typing import BinaryIO, Iterator, List, Optional, Tuple

import msgpack

# ============================================
# TYPES D'ENREGISTREMENTS
# ============================================

REC_INSTANCE = 1  # Instance sérialisée (dict JSON)
REC_TRACE = 2  # En-tête d'une trace de politique
REC_TRACE_STEP = 3  # Une étape de trace (client, cas, charges)
REC_COST = 4  # Ligne de coût (vehicle, cargo, total)

RECORD_NAMES = {
    REC_INSTANCE: 'instance',
    REC_TRACE: 'trace',
    REC_TRACE_STEP: 'trace_step',
    REC_COST: 'cost',
}

HEADER_SIZE = 4

# ============================================
# FONCTIONS DE SÉRIALISATION
# ============================================

def pack_record(kind: int, data: dict) -> bytes:
    """
    Emballe un enregistrement.
    Format: [longueur (4 bytes)] [msgpack(kind + data)]
    """
    if kind not in RECORD_NAMES:
        raise ValueError(f"type d'enregistrement inconnu: {kind}")
    record = {'k': kind, 'd': data}
    packed = msgpack.packb(record, use_bin_type=True)
    return len(packed).to_bytes(HEADER_SIZE, 'big') + packed


def unpack_record(buffer: bytes) -> Tuple[Optional[dict], bytes]:
    """
    Déballe un enregistrement depuis le buffer.
    Retourne (enregistrement, buffer_restant) ou (None, buffer) si incomplet.
    Un enregistrement corrompu lève ValueError : une archive n'est pas un flux réseau.
    """
    if len(buffer) < HEADER_SIZE:
        return None, buffer

    length = int.from_bytes(buffer[:HEADER_SIZE], 'big')

    if len(buffer) < HEADER_SIZE + length:
        return None, buffer

    try:
        record = msgpack.unpackb(buffer[HEADER_SIZE:HEADER_SIZE + length], raw=False)
    except Exception as exc:
        raise ValueError(f"enregistrement corrompu: {exc}") from exc
    return record, buffer[HEADER_SIZE + length:]


def write_records(stream: BinaryIO, records: List[Tuple[int, dict]]) -> int:
    """Écrit une suite d'enregistrements ; retourne le nombre d'octets écrits."""
    written = 0
    for kind, data in records:
        chunk = pack_record(kind, data)
        stream.write(chunk)
        written += len(chunk)
    return written


def read_records(stream: BinaryIO) -> Iterator[dict]:
    buffer = stream.read()
    while buffer:
        record, rest = unpack_record(buffer)
        if record is None:
            raise ValueError(f"archive tronquée ({len(buffer)} octets restants)")
        yield record
        buffer = rest
