import hashlib
import json
import struct
from typing import Any, Iterable

from rislab.exceptions import ConfigError, MissingConfigKeyError


def dbm_to_watt(value_dbm: float) -> float:
    return 10 ** ((value_dbm - 30) / 10)


def canonical_json(document: Any) -> str:
    return json.dumps(document, sort_keys=True, separators=(',', ':'))


def sha256_digest(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def derive_seed(master_seed: int, index: int) -> int:
    """
    SHA-256 of ``master_seed || index`` (both little-endian u64), truncated to its first 64 bits.
    """
    payload = struct.pack('<QQ', master_seed % 2 ** 64, index % 2 ** 64)
    return struct.unpack('<Q', hashlib.sha256(payload).digest()[:8])[0]


def require_key(dict_: dict, key: str, context: str = 'config'):
    try:
        return dict_[key]
    except KeyError:
        raise MissingConfigKeyError(f"{context} is missing required key '{key}'")


def check_enum(value: str, permitted: Iterable[str], name: str) -> str:
    permitted = list(permitted)
    if value not in permitted:
        raise ConfigError(f"{name} '{value}' must be in {permitted}")
    return value

