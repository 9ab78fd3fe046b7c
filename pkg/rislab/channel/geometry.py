import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from rislab.exceptions import ChannelDomainError
from rislab.util.helpervariables import smallest_angle


@dataclass(frozen=True)
class ArrayGeometry:
    """
    Uniform planar array. Elements are indexed by (k, l) with k along the elevation axis (slow axis of the
    flattened response) and l along the azimuth axis.
    """
    n_elev: int
    n_azim: int
    wavelength_m: float
    spacing_m: Optional[float] = field(default=None)

    def __post_init__(self):
        if int(self.n_elev) < 1 or int(self.n_azim) < 1:
            raise ChannelDomainError(f"ArrayGeometry needs positive element counts, got {self.n_elev}x{self.n_azim}")
        if not self.wavelength_m > 0:
            raise ChannelDomainError(f"ArrayGeometry.wavelength_m '{self.wavelength_m}' must be positive")
        if self.spacing_m is None:
            object.__setattr__(self, 'spacing_m', self.wavelength_m / 2)
        elif not self.spacing_m > 0:
            raise ChannelDomainError(f"ArrayGeometry.spacing_m '{self.spacing_m}' must be positive")

    @property
    def size(self) -> int:
        return self.n_elev * self.n_azim

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_elev, self.n_azim


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ChannelDomainError(f"Position {self} must have finite components")

    @classmethod
    def of(cls, value: Union['Position', Sequence[float]]) -> 'Position':
        if isinstance(value, Position):
            return value
        x, y, z = (float(v) for v in value)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def distance_to(self, other: 'Position') -> float:
        return float(np.linalg.norm(other.as_array() - self.as_array()))


def _check_angle(name, value):
    if not (0 < value <= math.pi):
        raise ChannelDomainError(f"{name} '{value}' must be in (0, pi]")


def clamp_angle(value: float) -> float:
    return min(max(value, smallest_angle), math.pi)


def steering_vector(geometry: ArrayGeometry, theta: float, phi: float) -> np.ndarray:
    """
    :return: a_e(theta) kron a_a(theta, phi), the unit-modulus response of ``geometry`` to a plane wave from (theta, phi).
        Entry ``k * n_azim + l`` equals ``exp(-j 2 pi d (k cos(theta) + l sin(theta) cos(phi)) / lambda)``.
    """
    _check_angle('theta', theta)
    _check_angle('phi', phi)
    scale = -2j * np.pi * geometry.spacing_m / geometry.wavelength_m
    a_elev = np.exp(scale * np.arange(geometry.n_elev) * np.cos(theta))
    a_azim = np.exp(scale * np.arange(geometry.n_azim) * np.sin(theta) * np.cos(phi))
    return np.kron(a_elev, a_azim)


def array_frame(array_normal: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Local frame of a vertical array: (vertical axis, broadside normal, in-plane horizontal axis). The normal is
    projected onto the horizontal plane.
    """
    vertical = np.array([0.0, 0.0, 1.0])
    normal = np.asarray(array_normal, dtype=np.float64).copy()
    normal[2] = 0.0
    norm = np.linalg.norm(normal)
    if norm == 0:
        raise ChannelDomainError(f"array normal {tuple(array_normal)} has no horizontal component")
    normal /= norm
    return vertical, normal, np.cross(vertical, normal)


def geometric_angles(source: Position, target: Position, array_normal: Sequence[float]) -> Tuple[float, float]:
    """
    Angles of ``target`` as seen by the array centred at ``source``.

    theta is measured from the array's vertical axis, phi is the angle of the horizontal projection measured from the
    in-plane azimuth axis, so that broadside is (pi/2, pi/2). Directions behind the array fold onto the front
    half-space. Both angles are clamped into (0, pi].
    """
    direction = Position.of(target).as_array() - Position.of(source).as_array()
    length = np.linalg.norm(direction)
    if length == 0:
        raise ChannelDomainError(f"source and target coincide at {source}")
    unit = direction / length
    vertical, normal, azimuth_axis = array_frame(array_normal)
    theta = math.acos(float(np.clip(unit @ vertical, -1.0, 1.0)))
    along_axis, along_normal = float(unit @ azimuth_axis), float(unit @ normal)
    horizontal = math.hypot(along_axis, along_normal)
    if horizontal == 0:
        phi = math.pi / 2
    else:
        phi = math.acos(max(-1.0, min(1.0, along_axis / horizontal)))
    return clamp_angle(theta), clamp_angle(phi)
