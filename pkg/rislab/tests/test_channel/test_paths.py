import cmath
import math
from unittest import TestCase

import numpy as np

from rislab.channel.geometry import ArrayGeometry, steering_vector
from rislab.channel.paths import PathSet, path_gain, array_channel, link_matrix
from rislab.exceptions import ChannelDomainError

WAVELENGTH = 299_792_458.0 / 90e9


class TestPathGain(TestCase):
    def test_normalization_point(self):
        gain = path_gain(WAVELENGTH / (4 * math.pi), WAVELENGTH, 0.0)
        assert abs(gain - 1) < 1e-15

    def test_inverse_distance_law(self):
        assert abs(abs(path_gain(20.0, WAVELENGTH, 0.3)) * 2 - abs(path_gain(10.0, WAVELENGTH, 0.3))) < 1e-18

    def test_scalar_oracle(self):
        gain = path_gain(10.0, 3.33e-3, math.pi / 2)
        assert abs(abs(gain) - 3.33e-3 / (40 * math.pi)) < 1e-15
        assert abs(abs(gain) - 2.65e-5) < 1e-7
        assert abs(cmath.phase(gain) - math.pi / 2) < 1e-12

    def test_invalid_distance(self):
        for distance in (0.0, -1.0):
            with self.assertRaises(ChannelDomainError):
                path_gain(distance, WAVELENGTH, 0.0)


class TestPathSet(TestCase):
    def test_lengths_must_match(self):
        with self.assertRaises(ChannelDomainError):
            PathSet([1.0, 2.0], [1.0], [1j, 1j])
        with self.assertRaises(ChannelDomainError):
            PathSet([], [], [])
        with self.assertRaises(ChannelDomainError):
            PathSet([1.0], [1.0], [1j], departure_elev=[1.0])

    def test_angles_must_be_in_range(self):
        with self.assertRaises(ChannelDomainError):
            PathSet([0.0], [1.0], [1j])

    def test_superposition(self):
        geometry = ArrayGeometry(3, 4, WAVELENGTH)
        paths = PathSet([0.4, 1.2, 2.9], [0.7, 1.5, 3.0], [1 + 2j, -0.5j, 0.25])
        assert paths.count == 3
        assert not paths.has_departure
        assert np.max(np.abs(array_channel(geometry, paths.scaled(2)) - 2 * array_channel(geometry, paths))) < 1e-14
        expected = sum(g * steering_vector(geometry, t, p) for t, p, g in
                       zip(paths.arrival_elev, paths.arrival_azim, paths.gains))
        assert np.max(np.abs(array_channel(geometry, paths) - expected)) < 1e-14

    def test_link_matrix_needs_departures(self):
        geometry = ArrayGeometry(2, 2, WAVELENGTH)
        with self.assertRaises(ChannelDomainError):
            link_matrix(geometry, geometry, PathSet([1.0], [1.0], [1j]))

    def test_single_path_link_is_rank_one(self):
        receiver, transmitter = ArrayGeometry(3, 3, WAVELENGTH), ArrayGeometry(4, 5, WAVELENGTH)
        paths = PathSet([1.1], [0.6], [0.3 - 0.2j], departure_elev=[2.0], departure_azim=[1.4])
        matrix = link_matrix(receiver, transmitter, paths)
        assert matrix.shape == (9, 20)
        assert np.linalg.matrix_rank(matrix) == 1
