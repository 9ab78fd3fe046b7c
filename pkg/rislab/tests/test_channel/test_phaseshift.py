import math
from unittest import TestCase

import numpy as np

from rislab.channel.geometry import ArrayGeometry
from rislab.channel.paths import PathSet, array_channel, link_matrix
from rislab.channel.phaseshift import PhaseShiftVector, random_phase_shifts, optimize_phase_shifts, \
    beamforming_objective, received_snr
from rislab.exceptions import ChannelDomainError
from rislab.tests.util import complex_normal

WAVELENGTH = 299_792_458.0 / 90e9


class TestPhaseShiftVector(TestCase):
    def test_unit_modulus(self):
        with self.assertRaises(ChannelDomainError):
            PhaseShiftVector(np.array([1.0, 0.5]))
        with self.assertRaises(ChannelDomainError):
            PhaseShiftVector(np.array([]))
        omega = PhaseShiftVector.from_phases([0.0, math.pi])
        assert len(omega) == 2
        assert not omega.omega.flags.writeable

    def test_random_phase_shifts(self):
        omega = random_phase_shifts(100, 7)
        assert np.max(np.abs(np.abs(omega.omega) - 1)) <= 1e-12
        assert np.array_equal(omega.omega, random_phase_shifts(100, 7).omega)
        assert not np.array_equal(omega.omega, random_phase_shifts(100, 8).omega)
        with self.assertRaises(ChannelDomainError):
            random_phase_shifts(0, 7)

    def test_random_phases_are_uniform(self):
        count = 100_000
        phases = np.mod(np.angle(random_phase_shifts(count, 11).omega), 2 * math.pi)
        sigma = 2 * math.pi / math.sqrt(12) / math.sqrt(count)
        assert abs(np.mean(phases) - math.pi) < 3 * sigma


class TestOptimizePhaseShifts(TestCase):
    def setUp(self) -> None:
        self.bs = ArrayGeometry(3, 3, WAVELENGTH)
        self.ris = ArrayGeometry(10, 10, WAVELENGTH)
        self.alpha = 2e-4 * np.exp(0.4j)
        self.beta = 5e-5 * np.exp(-1.3j)
        self.h_rb = link_matrix(self.bs, self.ris, PathSet([1.2], [0.9], [self.beta], departure_elev=[1.7],
                                                           departure_azim=[2.2]))
        self.g_ur = array_channel(self.ris, PathSet([1.4], [0.5], [self.alpha]))

    def test_rank_one_closed_form(self):
        omega = optimize_phase_shifts(self.h_rb, self.g_ur)
        m, n, s, sigma2 = self.bs.size, self.ris.size, 1.0 + 0j, 1e-15
        closed_form = abs(self.alpha) ** 2 * abs(self.beta) ** 2 * n ** 2 * m * abs(s) ** 2 / sigma2
        snr = received_snr(self.h_rb, omega, self.g_ur, s, sigma2)
        assert abs(snr - closed_form) <= 1e-9 * closed_form
        for seed in range(100):
            assert received_snr(self.h_rb, random_phase_shifts(n, seed), self.g_ur, s, sigma2) < snr

    def test_beats_random_phases_on_multipath(self):
        rng = np.random.default_rng(3)
        h_rb, g_ur = complex_normal(rng, 9, 100), complex_normal(rng, 100)
        optimized = beamforming_objective(h_rb, optimize_phase_shifts(h_rb, g_ur), g_ur)
        for seed in range(100):
            assert beamforming_objective(h_rb, random_phase_shifts(100, seed), g_ur) <= optimized

    def test_objective_is_non_decreasing(self):
        rng = np.random.default_rng(4)
        h_rb, g_ur = complex_normal(rng, 4, 30), complex_normal(rng, 30)
        omega = optimize_phase_shifts(h_rb, g_ur, max_iters=50, tol=0.0)
        history = omega.objective_history
        assert len(history) >= 2
        assert all(b >= a * (1 - 1e-12) for a, b in zip(history, history[1:]))
        assert abs(history[-1] - beamforming_objective(h_rb, omega, g_ur)) <= 1e-9 * history[-1]

    def test_zero_channel_is_degenerate(self):
        omega = optimize_phase_shifts(self.h_rb, np.zeros(100))
        assert omega.degenerate
        assert np.array_equal(omega.omega, np.ones(100))

    def test_shape_mismatch(self):
        with self.assertRaises(ChannelDomainError):
            optimize_phase_shifts(self.h_rb, np.ones(99))
        with self.assertRaises(ChannelDomainError):
            optimize_phase_shifts(self.h_rb, self.g_ur, max_iters=0)


class TestReceivedSnr(TestCase):
    def test_noise_scaling_and_norm_oracle(self):
        rng = np.random.default_rng(5)
        h_rb, g_ur = complex_normal(rng, 4, 8), complex_normal(rng, 8)
        omega = random_phase_shifts(8, 1)
        snr = received_snr(h_rb, omega, g_ur, 2j, 0.5)
        direct = np.linalg.norm(h_rb @ np.diag(omega.omega) @ g_ur) ** 2 * 4 / 0.5
        assert abs(snr - direct) <= 1e-12 * direct
        assert abs(received_snr(h_rb, omega, g_ur, 2j, 1.0) * 2 - snr) <= 1e-12 * snr

    def test_non_positive_noise(self):
        with self.assertRaises(ChannelDomainError):
            received_snr(np.ones((2, 2)), random_phase_shifts(2, 0), np.ones(2), 1, 0.0)
