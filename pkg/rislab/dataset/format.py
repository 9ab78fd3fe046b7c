"""
Binary fingerprint dataset layout (little-endian)::

    b"RISD" | u32 format_version | u32 header length | header JSON (UTF-8) | records

Each record packs ``y`` as M (re, im) f32 pairs, ``y_r`` as N (re, im) f32 pairs and ``p_u`` as three f64.
Records follow in sample index order.
"""
import json
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from rislab.dataset.exceptions import DatasetBadMagicError, DatasetVersionError, DatasetFormatError, \
    DatasetDigestMismatchError
from rislab.util.core import canonical_json, sha256_digest
from rislab.util.helpervariables import phase_modes

MAGIC = b'RISD'
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct('<4sII')


def record_dtype(m: int, n: int) -> np.dtype:
    return np.dtype([('y', '<f4', (m, 2)), ('y_r', '<f4', (n, 2)), ('p_u', '<f8', (3,))])


@dataclass(frozen=True)
class DatasetHeader:
    scenario: Dict[str, Any] = field(repr=False)
    m: int
    n: int
    sample_count: int
    region_low: Tuple[float, float, float]
    region_high: Tuple[float, float, float]
    phase_mode: str
    master_seed: int
    exclusion_radius_m: float = 0.0
    format_version: int = FORMAT_VERSION
    magic: bytes = MAGIC

    def __post_init__(self):
        if self.phase_mode not in phase_modes:
            raise DatasetFormatError(f"phase_mode '{self.phase_mode}' must be in {list(phase_modes)}")

    @property
    def scenario_digest(self) -> str:
        return sha256_digest(canonical_json(self.scenario))

    @property
    def bs_shape(self) -> Tuple[int, int]:
        geometry = self.scenario['bs_geometry']
        return geometry['n_elev'], geometry['n_azim']

    @property
    def ris_shape(self) -> Tuple[int, int]:
        geometry = self.scenario['ris_geometry']
        return geometry['n_elev'], geometry['n_azim']

    @property
    def dtype(self) -> np.dtype:
        return record_dtype(self.m, self.n)

    @property
    def record_size(self) -> int:
        return self.dtype.itemsize

    def to_dict(self) -> Dict[str, Any]:
        return {
            'format_version': self.format_version,
            'scenario_digest': self.scenario_digest,
            'm': self.m,
            'n': self.n,
            'sample_count': self.sample_count,
            'region': {'low': list(self.region_low), 'high': list(self.region_high),
                       'exclusion_radius_m': self.exclusion_radius_m},
            'phase_mode': self.phase_mode,
            'master_seed': self.master_seed,
            'scenario': self.scenario,
        }

    def to_bytes(self) -> bytes:
        payload = canonical_json(self.to_dict()).encode('utf-8')
        return _PREAMBLE.pack(self.magic, self.format_version, len(payload)) + payload

    @classmethod
    def from_dict(cls, dict_: Dict[str, Any]) -> 'DatasetHeader':
        try:
            header = cls(scenario=dict_['scenario'], m=int(dict_['m']), n=int(dict_['n']),
                         sample_count=int(dict_['sample_count']),
                         region_low=tuple(dict_['region']['low']), region_high=tuple(dict_['region']['high']),
                         phase_mode=dict_['phase_mode'], master_seed=int(dict_['master_seed']),
                         exclusion_radius_m=float(dict_['region'].get('exclusion_radius_m', 0.0)),
                         format_version=int(dict_['format_version']))
        except (KeyError, TypeError) as err:
            raise DatasetFormatError(f"malformed dataset header: {err}")
        if header.scenario_digest != dict_.get('scenario_digest'):
            raise DatasetDigestMismatchError(
                f"scenario digest {dict_.get('scenario_digest')} does not match embedded scenario ({header.scenario_digest})")
        return header


def read_header(file) -> Tuple[DatasetHeader, int]:
    """
    :return: the validated header and the byte offset of the first record.
    """
    preamble = file.read(_PREAMBLE.size)
    if len(preamble) < 4 or preamble[:4] != MAGIC:
        raise DatasetBadMagicError(f"bad magic {preamble[:4]!r}, expected {MAGIC!r}")
    if len(preamble) < _PREAMBLE.size:
        raise DatasetFormatError("file ends inside the preamble")
    _, version, length = _PREAMBLE.unpack(preamble)
    if version != FORMAT_VERSION:
        raise DatasetVersionError(f"format version {version} is not supported (expected {FORMAT_VERSION})")
    payload = file.read(length)
    if len(payload) < length:
        raise DatasetFormatError(f"file ends inside the header ({len(payload)} of {length} bytes)")
    try:
        dict_ = json.loads(payload.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise DatasetFormatError(f"header is not valid JSON: {err}")
    return DatasetHeader.from_dict(dict_), _PREAMBLE.size + length


def pack_records(m: int, n: int, ys, y_rs, positions) -> bytes:
    records = np.zeros(len(positions), dtype=record_dtype(m, n))
    ys = np.asarray(ys, dtype=np.complex128).reshape(-1, m)
    y_rs = np.asarray(y_rs, dtype=np.complex128).reshape(-1, n)
    records['y'][..., 0], records['y'][..., 1] = ys.real, ys.imag
    records['y_r'][..., 0], records['y_r'][..., 1] = y_rs.real, y_rs.imag
    records['p_u'] = np.asarray(positions, dtype=np.float64)
    return records.tobytes()


def unpack_complex(pairs: np.ndarray) -> np.ndarray:
    return pairs[..., 0].astype(np.float64) + 1j * pairs[..., 1].astype(np.float64)


def describe_header(header: DatasetHeader) -> str:
    lines = [f"format         {header.magic.decode('ascii')} v{header.format_version}",
             f"scenario       {header.scenario_digest}",
             f"M x N          {header.m} x {header.n} (BS {header.bs_shape[0]}x{header.bs_shape[1]}, "
             f"RIS {header.ris_shape[0]}x{header.ris_shape[1]})",
             f"samples        {header.sample_count} ({header.record_size} bytes each)",
             f"phase mode     {header.phase_mode}",
             f"master seed    {header.master_seed}",
             f"region         {list(header.region_low)} .. {list(header.region_high)}, "
             f"exclusion {header.exclusion_radius_m} m"]
    return '\n'.join(lines)
