import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from rislab.channel.geometry import Position
from rislab.dataset.exceptions import DatasetTruncatedError, DatasetFormatError, EmptySplitError
from rislab.dataset.format import DatasetHeader, read_header, unpack_complex
from rislab.dataset.generator import SampleRecord
from rislab.exceptions import ConfigError

logger = logging.getLogger(__name__)

_READ_BLOCK = 1024


class DatasetReader:
    """
    Validating, streaming reader of a fingerprint dataset file. The header (magic, version, scenario digest) and the
    file length are checked on construction.
    """

    def __init__(self, path: Union[str, Path]):
        self._path = Path(path)
        self._header = None
        self._data_offset = None
        self._read_header()

    # ------------------
    # private methods

    def _read_header(self):
        with open(self._path, 'rb') as file:
            self._header, self._data_offset = read_header(file)
        expected = self._data_offset + self._header.sample_count * self._header.record_size
        actual = os.path.getsize(self._path)
        if actual < expected:
            raise DatasetTruncatedError(
                f"{self._path} holds {actual - self._data_offset} record bytes, header declares "
                f"{self._header.sample_count} records of {self._header.record_size} bytes")
        if actual > expected:
            raise DatasetFormatError(f"{self._path} has {actual - expected} trailing bytes")

    def _to_sample_records(self, records, first_index):
        for offset, record in enumerate(records):
            yield SampleRecord(y=unpack_complex(record['y']), y_r=unpack_complex(record['y_r']),
                               p_u=Position.of(record['p_u']), sample_index=first_index + offset)

    # ------------------
    # public properties

    @property
    def header(self) -> DatasetHeader:
        return self._header

    @property
    def path(self) -> Path:
        return self._path

    # ------------------
    # public methods

    def iter_records(self) -> Iterator[SampleRecord]:
        dtype = self.header.dtype
        with open(self._path, 'rb') as file:
            file.seek(self._data_offset)
            index = 0
            while index < self.header.sample_count:
                wanted = min(_READ_BLOCK, self.header.sample_count - index)
                buffer = file.read(wanted * dtype.itemsize)
                if len(buffer) < wanted * dtype.itemsize:
                    raise DatasetTruncatedError(f"{self._path} ends inside record {index + len(buffer) // dtype.itemsize}")
                yield from self._to_sample_records(np.frombuffer(buffer, dtype=dtype), index)
                index += wanted

    def read_arrays(self, indices: Optional[Sequence[int]] = None) -> np.ndarray:
        records = np.memmap(self._path, dtype=self.header.dtype, mode='r', offset=self._data_offset,
                            shape=(self.header.sample_count,))
        if indices is None:
            return np.array(records)
        return np.array(records[np.asarray(indices, dtype=np.int64)])

    def __len__(self):
        return self.header.sample_count

    def __iter__(self):
        return self.iter_records()


def read_dataset(path: Union[str, Path]) -> Tuple[DatasetHeader, Iterator[SampleRecord]]:
    reader = DatasetReader(path)
    return reader.header, reader.iter_records()


@dataclass(frozen=True, eq=False)
class Fingerprints:
    """
    In-memory arrays of a dataset subset: ``y`` (K, M) and ``y_r`` (K, N) complex, ``positions`` (K, 3) meters.
    """
    y: np.ndarray
    y_r: np.ndarray
    positions: np.ndarray
    indices: np.ndarray
    bs_shape: Tuple[int, int]
    ris_shape: Tuple[int, int]

    def __len__(self):
        return self.positions.shape[0]

    def subset(self, selection) -> 'Fingerprints':
        return Fingerprints(self.y[selection], self.y_r[selection], self.positions[selection],
                            self.indices[selection], self.bs_shape, self.ris_shape)


def load_fingerprints(path: Union[str, Path], indices: Optional[Sequence[int]] = None) -> Fingerprints:
    reader = DatasetReader(path)
    records = reader.read_arrays(indices)
    if indices is None:
        indices = np.arange(len(reader))
    return Fingerprints(y=unpack_complex(records['y']), y_r=unpack_complex(records['y_r']),
                        positions=records['p_u'].astype(np.float64), indices=np.asarray(indices, dtype=np.int64),
                        bs_shape=reader.header.bs_shape, ris_shape=reader.header.ris_shape)


def split_indices(count: int, fractions: Sequence[float], seed: int) -> Tuple[List[int], ...]:
    """
    Seeded shuffled partition of ``range(count)``. Split k holds the permuted indices between
    floor(count * (f_1 + .. + f_{k-1})) and floor(count * (f_1 + .. + f_k)).
    """
    if not fractions or any(not f > 0 for f in fractions):
        raise ConfigError(f"split fractions {list(fractions)} must be positive")
    if sum(fractions) > 1 + 1e-9:
        raise ConfigError(f"split fractions {list(fractions)} sum to more than 1")
    permutation = np.random.default_rng(seed).permutation(count)
    boundaries = [0]
    cumulative = 0.0
    for fraction in fractions:
        cumulative += fraction
        boundaries.append(min(count, math.floor(count * cumulative + 1e-9)))
    splits = tuple(permutation[lo:hi].tolist() for lo, hi in zip(boundaries, boundaries[1:]))
    for position, split in enumerate(splits):
        if not split:
            raise EmptySplitError(f"split {position} (fraction {fractions[position]}) of {count} samples is empty")
    return splits


def split_dataset(path: Union[str, Path], fractions: Sequence[float] = (0.8, 0.1, 0.1),
                  seed: int = 0) -> Tuple[List[int], ...]:
    return split_indices(DatasetReader(path).header.sample_count, fractions, seed)
