import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from rislab.channel.geometry import ArrayGeometry, steering_vector
from rislab.exceptions import ChannelDomainError


def path_gain(distance_m: float, wavelength_m: float, phase_offset: float) -> complex:
    """
    Free-space amplitude lambda / (4 pi d) with phase ``phase_offset``.
    """
    if not distance_m > 0:
        raise ChannelDomainError(f"distance '{distance_m}' must be positive")
    return wavelength_m / (4 * math.pi * distance_m) * complex(math.cos(phase_offset), math.sin(phase_offset))


@dataclass(frozen=True)
class PathSet:
    arrival_elev: Sequence[float]
    arrival_azim: Sequence[float]
    gains: Sequence[complex]
    departure_elev: Optional[Sequence[float]] = None
    departure_azim: Optional[Sequence[float]] = None

    def __post_init__(self):
        lists = [self.arrival_elev, self.arrival_azim, self.gains]
        if self.has_departure:
            if self.departure_elev is None or self.departure_azim is None:
                raise ChannelDomainError("PathSet needs both departure_elev and departure_azim or neither")
            lists += [self.departure_elev, self.departure_azim]
        if len({len(list_) for list_ in lists}) != 1 or self.count < 1:
            raise ChannelDomainError(f"PathSet lists must share a positive length, got {[len(l) for l in lists]}")
        angles = list(self.arrival_elev) + list(self.arrival_azim)
        if self.has_departure:
            angles += list(self.departure_elev) + list(self.departure_azim)
        for angle in angles:
            if not 0 < angle <= math.pi:
                raise ChannelDomainError(f"PathSet angle '{angle}' must be in (0, pi]")

    @property
    def count(self) -> int:
        return len(self.gains)

    @property
    def has_departure(self) -> bool:
        return self.departure_elev is not None or self.departure_azim is not None

    def scaled(self, factor: complex) -> 'PathSet':
        return PathSet(self.arrival_elev, self.arrival_azim, [g * factor for g in self.gains], self.departure_elev,
                       self.departure_azim)


def array_channel(geometry: ArrayGeometry, paths: PathSet) -> np.ndarray:
    """
    :return: sum over paths of gain * steering_vector(geometry, arrival angles)
    """
    output = np.zeros(geometry.size, dtype=np.complex128)
    for theta, phi, gain in zip(paths.arrival_elev, paths.arrival_azim, paths.gains):
        output += gain * steering_vector(geometry, theta, phi)
    return output


def link_matrix(receiver: ArrayGeometry, transmitter: ArrayGeometry, paths: PathSet) -> np.ndarray:
    """
    :return: sum over paths of gain * a_rx(arrival) a_tx(departure)^H
    """
    if not paths.has_departure:
        raise ChannelDomainError("link_matrix needs departure angles")
    output = np.zeros((receiver.size, transmitter.size), dtype=np.complex128)
    for theta, phi, psi, omega, gain in zip(paths.arrival_elev, paths.arrival_azim, paths.departure_elev,
                                            paths.departure_azim, paths.gains):
        output += gain * np.outer(steering_vector(receiver, theta, phi),
                                  steering_vector(transmitter, psi, omega).conj())
    return output
