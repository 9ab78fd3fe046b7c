import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from rislab.channel.geometry import Position, geometric_angles
from rislab.channel.paths import PathSet, path_gain, array_channel, link_matrix
from rislab.exceptions import ChannelDomainError

if TYPE_CHECKING:
    from rislab.channel.scenario import Scenario


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    g_ur: np.ndarray
    h_rb: np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.g_ur)) and np.all(np.isfinite(self.h_rb))):
            raise ChannelDomainError("channel realization has non-finite entries")
        if self.h_rb.ndim != 2 or self.h_rb.shape[1] != self.g_ur.shape[0]:
            raise ChannelDomainError(f"H_rb shape {self.h_rb.shape} does not match g_ur shape {self.g_ur.shape}")


def _propagation_phase(distance_m, wavelength_m, offset=0.0):
    return float(np.mod(offset - 2 * math.pi * distance_m / wavelength_m, 2 * math.pi))


def _scattered_gain(scenario: 'Scenario', first_hop_m, second_hop_m, offset):
    wavelength = scenario.wavelength_m
    phase = _propagation_phase(first_hop_m + second_hop_m, wavelength, offset)
    if scenario.scatter_amplitude == 'per_hop_product':
        return path_gain(first_hop_m, wavelength, phase) * wavelength / (4 * math.pi * second_hop_m)
    return path_gain(first_hop_m + second_hop_m, wavelength, phase)


def mu_ris_paths(scenario: 'Scenario', p_u) -> PathSet:
    """
    Path 1 is the line of sight from ``p_u`` to the RIS, the remaining paths bounce once on the scenario's MU
    scatterers.
    """
    p_u = Position.of(p_u)
    distance = p_u.distance_to(scenario.p_r)
    theta, phi = geometric_angles(scenario.p_r, p_u, scenario.ris_array_normal)
    elevations, azimuths = [theta], [phi]
    gains = [path_gain(distance, scenario.wavelength_m, _propagation_phase(distance, scenario.wavelength_m))]
    for scatterer in scenario.mu_scatterers:
        theta, phi = geometric_angles(scenario.p_r, scatterer.position, scenario.ris_array_normal)
        elevations.append(theta)
        azimuths.append(phi)
        gains.append(_scattered_gain(scenario, p_u.distance_to(scatterer.position),
                                     scatterer.position.distance_to(scenario.p_r), scatterer.phase_offset))
    return PathSet(arrival_elev=elevations, arrival_azim=azimuths, gains=gains)


def mu_ris_channel(scenario: 'Scenario', p_u) -> np.ndarray:
    return array_channel(scenario.ris_geometry, mu_ris_paths(scenario, p_u))


def ris_bs_paths(scenario: 'Scenario') -> PathSet:
    """
    Arrival angles are taken at the BS, departure angles at the RIS. Path 1 is the RIS to BS line of sight.
    """
    distance = scenario.p_r.distance_to(scenario.p_b)
    arrival = [geometric_angles(scenario.p_b, scenario.p_r, scenario.bs_array_normal)]
    departure = [geometric_angles(scenario.p_r, scenario.p_b, scenario.ris_array_normal)]
    gains = [path_gain(distance, scenario.wavelength_m, _propagation_phase(distance, scenario.wavelength_m))]
    for scatterer in scenario.bs_scatterers:
        arrival.append(geometric_angles(scenario.p_b, scatterer.position, scenario.bs_array_normal))
        departure.append(geometric_angles(scenario.p_r, scatterer.position, scenario.ris_array_normal))
        gains.append(_scattered_gain(scenario, scenario.p_r.distance_to(scatterer.position),
                                     scatterer.position.distance_to(scenario.p_b), scatterer.phase_offset))
    return PathSet(arrival_elev=[a[0] for a in arrival], arrival_azim=[a[1] for a in arrival], gains=gains,
                   departure_elev=[d[0] for d in departure], departure_azim=[d[1] for d in departure])


@lru_cache(maxsize=16)
def _cached_ris_bs_channel(scenario: 'Scenario') -> np.ndarray:
    h_rb = link_matrix(scenario.bs_geometry, scenario.ris_geometry, ris_bs_paths(scenario))
    h_rb.setflags(write=False)
    return h_rb


def ris_bs_channel(scenario: 'Scenario') -> np.ndarray:
    """
    :return: H_rb of shape (M, N). Depends only on the fixed deployment and is computed once per scenario.
    """
    return _cached_ris_bs_channel(scenario)
