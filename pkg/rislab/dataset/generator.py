import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from rislab.channel.channel import mu_ris_channel, ris_bs_channel
from rislab.channel.geometry import Position
from rislab.channel.phaseshift import PhaseShiftVector, random_phase_shifts, optimize_phase_shifts
from rislab.channel.scenario import Scenario
from rislab.channel.signal import ris_received, bs_received
from rislab.dataset.format import DatasetHeader, pack_records
from rislab.exceptions import ConfigError
from rislab.util.core import derive_seed, check_enum
from rislab.util.helpervariables import default_region, default_exclusion_radius_m, phase_modes

logger = logging.getLogger(__name__)

_POSITION_STREAM, _PHASE_STREAM, _NOISE_STREAM = 0, 1, 2
FIXED_PHASE_INDEX = 2 ** 64 - 1
_CHUNK_SIZE = 256
_MAX_REJECTIONS = 10_000


@dataclass(frozen=True)
class SamplingRegion:
    """
    Axis-aligned box in which mobile users are placed, minus a ball of ``exclusion_radius_m`` around the RIS centre.
    """
    low: Sequence[float] = default_region[0]
    high: Sequence[float] = default_region[1]
    exclusion_radius_m: float = default_exclusion_radius_m

    def __post_init__(self):
        object.__setattr__(self, 'low', tuple(float(v) for v in self.low))
        object.__setattr__(self, 'high', tuple(float(v) for v in self.high))
        if len(self.low) != 3 or len(self.high) != 3 or any(lo >= hi for lo, hi in zip(self.low, self.high)):
            raise ConfigError(f"sampling region {self.low} .. {self.high} is degenerate")
        if self.exclusion_radius_m < 0:
            raise ConfigError(f"exclusion_radius_m '{self.exclusion_radius_m}' must not be negative")

    @classmethod
    def from_dict(cls, dict_: Optional[dict]) -> 'SamplingRegion':
        if not dict_:
            return cls()
        return cls(low=dict_.get('low', default_region[0]), high=dict_.get('high', default_region[1]),
                   exclusion_radius_m=float(dict_.get('exclusion_radius_m', default_exclusion_radius_m)))

    def contains(self, position) -> bool:
        point = Position.of(position).as_array()
        return bool(np.all(point >= self.low) and np.all(point <= self.high))

    def draw(self, rng: np.random.Generator, excluded_centre: Position) -> Position:
        centre = excluded_centre.as_array()
        for _ in range(_MAX_REJECTIONS):
            point = rng.uniform(self.low, self.high)
            if np.linalg.norm(point - centre) > self.exclusion_radius_m:
                return Position.of(point)
        raise ConfigError(f"sampling region {self.low} .. {self.high} lies inside the exclusion ball around the RIS")


@dataclass(frozen=True, eq=False)
class SampleRecord:
    y: np.ndarray
    y_r: np.ndarray
    p_u: Position
    sample_index: int


def fixed_phase_shifts(scenario: Scenario, seed: int) -> PhaseShiftVector:
    return random_phase_shifts(scenario.n, derive_seed(seed, FIXED_PHASE_INDEX))


def simulate_sample(scenario: Scenario, region: SamplingRegion, phase_mode: str, sample_seed: int,
                    sample_index: int = 0, fixed_omega: Optional[PhaseShiftVector] = None) -> SampleRecord:
    """
    Simulates one fingerprint. Position, phase shifts and noise use independent streams derived from
    ``sample_seed``.
    """
    h_rb = ris_bs_channel(scenario)
    p_u = region.draw(np.random.default_rng(derive_seed(sample_seed, _POSITION_STREAM)), scenario.p_r)
    g_ur = mu_ris_channel(scenario, p_u)
    if phase_mode == 'random_per_sample':
        omega = random_phase_shifts(scenario.n, derive_seed(sample_seed, _PHASE_STREAM))
    elif phase_mode == 'optimized_per_sample':
        omega = optimize_phase_shifts(h_rb, g_ur)
    elif phase_mode == 'fixed':
        if fixed_omega is None:
            raise ConfigError("phase_mode 'fixed' needs fixed_omega")
        omega = fixed_omega
    else:
        raise ConfigError(f"phase_mode '{phase_mode}' must be in {list(phase_modes)}")
    y = bs_received(h_rb, omega, g_ur, scenario.pilot, scenario.noise_power_w,
                    derive_seed(sample_seed, _NOISE_STREAM))
    return SampleRecord(y=y, y_r=ris_received(g_ur, scenario.pilot), p_u=p_u, sample_index=sample_index)


def _simulate_chunk(scenario, region, phase_mode, seed, fixed_omega, start, stop) -> bytes:
    records = [simulate_sample(scenario, region, phase_mode, derive_seed(seed, index), index, fixed_omega)
               for index in range(start, stop)]
    return pack_records(scenario.m, scenario.n, [r.y for r in records], [r.y_r for r in records],
                        [r.p_u.as_array() for r in records])


def generate_dataset(scenario: Scenario, region: SamplingRegion, count: int, phase_mode: str, seed: int,
                     path: Union[str, Path], workers: int = 1) -> DatasetHeader:
    """
    Writes ``count`` fingerprints to ``path``. Record i depends only on (scenario, region, phase_mode,
    derive_seed(seed, i)), so the output is byte-identical for any ``workers``. ``path`` is only written once every
    record is ready; a failed run leaves any previous file in place.
    """
    if count < 1:
        raise ConfigError(f"count '{count}' must be at least 1")
    check_enum(phase_mode, phase_modes, 'phase_mode')
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed '{seed}' must be an unsigned 64-bit integer")
    header = DatasetHeader(scenario=scenario.to_dict(), m=scenario.m, n=scenario.n, sample_count=count,
                           region_low=region.low, region_high=region.high, phase_mode=phase_mode, master_seed=seed,
                           exclusion_radius_m=region.exclusion_radius_m)
    fixed_omega = fixed_phase_shifts(scenario, seed) if phase_mode == 'fixed' else None
    bounds = [(start, min(start + _CHUNK_SIZE, count)) for start in range(0, count, _CHUNK_SIZE)]
    args = [(scenario, region, phase_mode, seed, fixed_omega, start, stop) for start, stop in bounds]
    logger.info(f"generating {count} samples ({phase_mode}, M={scenario.m}, N={scenario.n}) into {path} "
                f"with {workers} worker(s)")
    progress = tqdm(total=count, unit='sample', disable=not logger.isEnabledFor(logging.INFO))
    path = Path(path)
    partial = path.with_name(path.name + '.partial')
    try:
        with open(partial, 'wb') as file:
            file.write(header.to_bytes())
            if workers > 1:
                with ProcessPoolExecutor(max_workers=workers) as executor:
                    for (start, stop), chunk in zip(bounds, executor.map(_simulate_chunk, *zip(*args))):
                        file.write(chunk)
                        progress.update(stop - start)
            else:
                for (start, stop), arguments in zip(bounds, args):
                    file.write(_simulate_chunk(*arguments))
                    progress.update(stop - start)
        os.replace(partial, path)
    finally:
        progress.close()
        partial.unlink(missing_ok=True)
    return header
