import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from rislab.channel.channel import ChannelRealization, mu_ris_channel, ris_bs_channel
from rislab.channel.geometry import ArrayGeometry, Position
from rislab.exceptions import ConfigError
from rislab.util.core import dbm_to_watt, canonical_json, sha256_digest, check_enum
from rislab.util.helpervariables import speed_of_light, default_frequency_hz, default_bs_shape, default_ris_shape, \
    default_p_b, default_p_r, default_ris_normal, default_mu_paths, default_bs_paths, default_scatterer_box, \
    default_tx_power_dbm, default_noise_power_dbm, default_master_seed

logger = logging.getLogger(__name__)

SCATTER_AMPLITUDE_MODELS = ('total_distance', 'per_hop_product')

_SCENARIO_KEYS = {'frequency_hz', 'bs_geometry', 'ris_geometry', 'p_b', 'p_r', 'bs_array_normal', 'ris_array_normal',
                  'mu_paths', 'bs_paths', 'scatterer_box', 'tx_power_dbm', 'noise_power_dbm', 'master_seed',
                  'scatter_amplitude'}


@dataclass(frozen=True)
class Scatterer:
    position: Position
    phase_offset: float


def _horizontal_direction(source, target):
    direction = np.asarray(target, dtype=float) - np.asarray(source, dtype=float)
    direction[2] = 0.0
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ConfigError(f"cannot derive an array normal from {source} towards {target}")
    return [float(v) for v in direction / norm]


def _resolve_geometry(value, default_shape):
    value = dict(value or {})
    unknown = set(value) - {'n_elev', 'n_azim', 'spacing_m'}
    if unknown:
        raise ConfigError(f"unknown geometry keys {sorted(unknown)}")
    return {'n_elev': int(value.get('n_elev', default_shape[0])), 'n_azim': int(value.get('n_azim', default_shape[1])),
            'spacing_m': value.get('spacing_m')}


def resolve_scenario_dict(document: Dict[str, Any]) -> Dict[str, Any]:
    """
    :return: ``document`` with every missing key filled with the default deployment.
    """
    unknown = set(document) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys {sorted(unknown)}; allowed keys are {sorted(_SCENARIO_KEYS)}")
    p_b = [float(v) for v in document.get('p_b', default_p_b)]
    p_r = [float(v) for v in document.get('p_r', default_p_r)]
    box = document.get('scatterer_box', {'low': default_scatterer_box[0], 'high': default_scatterer_box[1]})
    resolved = {
        'frequency_hz': float(document.get('frequency_hz', default_frequency_hz)),
        'bs_geometry': _resolve_geometry(document.get('bs_geometry'), default_bs_shape),
        'ris_geometry': _resolve_geometry(document.get('ris_geometry'), default_ris_shape),
        'p_b': p_b,
        'p_r': p_r,
        'bs_array_normal': [float(v) for v in document.get('bs_array_normal', _horizontal_direction(p_b, p_r))],
        'ris_array_normal': [float(v) for v in document.get('ris_array_normal', default_ris_normal)],
        'mu_paths': int(document.get('mu_paths', default_mu_paths)),
        'bs_paths': int(document.get('bs_paths', default_bs_paths)),
        'scatterer_box': {'low': [float(v) for v in box['low']], 'high': [float(v) for v in box['high']]},
        'tx_power_dbm': float(document.get('tx_power_dbm', default_tx_power_dbm)),
        'noise_power_dbm': document.get('noise_power_dbm', default_noise_power_dbm),
        'master_seed': int(document.get('master_seed', default_master_seed)),
        'scatter_amplitude': document.get('scatter_amplitude', 'total_distance'),
    }
    if resolved['noise_power_dbm'] is not None:
        resolved['noise_power_dbm'] = float(resolved['noise_power_dbm'])
    if resolved['mu_paths'] < 1 or resolved['bs_paths'] < 1:
        raise ConfigError(f"path counts must be positive, got P={resolved['mu_paths']} J={resolved['bs_paths']}")
    if not 0 <= resolved['master_seed'] < 2 ** 64:
        raise ConfigError(f"master_seed '{resolved['master_seed']}' must be an unsigned 64-bit integer")
    if any(lo > hi for lo, hi in zip(resolved['scatterer_box']['low'], resolved['scatterer_box']['high'])):
        raise ConfigError(f"scatterer_box {resolved['scatterer_box']} has low > high")
    check_enum(resolved['scatter_amplitude'], SCATTER_AMPLITUDE_MODELS, 'scatter_amplitude')
    return resolved


@dataclass(frozen=True)
class Scenario:
    """
    Immutable deployment: array geometries, positions, scatterers, pilot and noise level. Scatterers are drawn once
    from ``master_seed`` when the scenario is built from a document.
    """
    bs_geometry: ArrayGeometry
    ris_geometry: ArrayGeometry
    p_b: Position
    p_r: Position
    bs_array_normal: Tuple[float, float, float]
    ris_array_normal: Tuple[float, float, float]
    mu_scatterers: Tuple[Scatterer, ...]
    bs_scatterers: Tuple[Scatterer, ...]
    pilot: complex
    noise_power_w: float
    tx_power_w: float
    master_seed: int
    scatter_amplitude: str = 'total_distance'
    document: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'Scenario':
        resolved = resolve_scenario_dict(document)
        wavelength = speed_of_light / resolved['frequency_hz']
        rng = np.random.default_rng(resolved['master_seed'])
        low, high = resolved['scatterer_box']['low'], resolved['scatterer_box']['high']

        def draw(count):
            positions = rng.uniform(low, high, size=(count, 3))
            phases = rng.uniform(0.0, 2 * np.pi, size=count)
            return tuple(Scatterer(Position.of(p), float(ph)) for p, ph in zip(positions, phases))

        mu_scatterers = draw(resolved['mu_paths'] - 1)
        bs_scatterers = draw(resolved['bs_paths'] - 1)
        tx_power_w = dbm_to_watt(resolved['tx_power_dbm'])
        noise_dbm = resolved['noise_power_dbm']
        scenario = cls(
            bs_geometry=ArrayGeometry(wavelength_m=wavelength, **resolved['bs_geometry']),
            ris_geometry=ArrayGeometry(wavelength_m=wavelength, **resolved['ris_geometry']),
            p_b=Position.of(resolved['p_b']),
            p_r=Position.of(resolved['p_r']),
            bs_array_normal=tuple(resolved['bs_array_normal']),
            ris_array_normal=tuple(resolved['ris_array_normal']),
            mu_scatterers=mu_scatterers,
            bs_scatterers=bs_scatterers,
            pilot=complex(np.sqrt(tx_power_w)),
            noise_power_w=0.0 if noise_dbm is None else dbm_to_watt(noise_dbm),
            tx_power_w=tx_power_w,
            master_seed=resolved['master_seed'],
            scatter_amplitude=resolved['scatter_amplitude'],
            document=resolved,
        )
        logger.debug(f"scenario {scenario.digest[:12]}: M={scenario.m} N={scenario.n} P={len(mu_scatterers) + 1} "
                     f"J={len(bs_scatterers) + 1}")
        return scenario

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'Scenario':
        with open(path) as file:
            return cls.from_dict(json.load(file))

    @property
    def wavelength_m(self) -> float:
        return self.ris_geometry.wavelength_m

    @property
    def m(self) -> int:
        return self.bs_geometry.size

    @property
    def n(self) -> int:
        return self.ris_geometry.size

    @cached_property
    def canonical_json(self) -> str:
        return canonical_json(self.document)

    @cached_property
    def digest(self) -> str:
        return sha256_digest(self.canonical_json)

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(self.canonical_json)

    def channel_realization(self, p_u) -> ChannelRealization:
        return ChannelRealization(g_ur=mu_ris_channel(self, p_u), h_rb=ris_bs_channel(self))
