import logging
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from rislab.exceptions import ChannelDomainError, PhaseOptimizationError

logger = logging.getLogger(__name__)

UNIT_MODULUS_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class PhaseShiftVector:
    """
    Unit-modulus RIS reflection coefficients. ``objective_history`` and ``degenerate`` are only filled by
    :obj:`optimize_phase_shifts`.
    """
    omega: np.ndarray
    objective_history: Tuple[float, ...] = field(default=(), compare=False)
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=np.complex128).reshape(-1)
        if omega.size == 0:
            raise ChannelDomainError("PhaseShiftVector needs at least one element")
        if np.max(np.abs(np.abs(omega) - 1.0)) > UNIT_MODULUS_TOLERANCE:
            raise ChannelDomainError("PhaseShiftVector entries must have unit modulus")
        omega.setflags(write=False)
        object.__setattr__(self, 'omega', omega)

    @classmethod
    def of(cls, value: Union['PhaseShiftVector', np.ndarray]) -> 'PhaseShiftVector':
        if isinstance(value, PhaseShiftVector):
            return value
        return cls(np.asarray(value))

    @classmethod
    def from_phases(cls, phases: np.ndarray, **kwargs) -> 'PhaseShiftVector':
        return cls(np.exp(1j * np.asarray(phases, dtype=np.float64)), **kwargs)

    def __len__(self):
        return self.omega.shape[0]


def random_phase_shifts(n: int, seed) -> PhaseShiftVector:
    if n < 1:
        raise ChannelDomainError(f"n '{n}' must be positive")
    return PhaseShiftVector.from_phases(np.random.default_rng(seed).uniform(0.0, 2 * np.pi, size=n))


def _effective_matrix(h_rb, g_ur):
    h_rb = np.asarray(h_rb, dtype=np.complex128)
    g_ur = np.asarray(g_ur, dtype=np.complex128)
    if h_rb.ndim != 2 or h_rb.shape[1] != g_ur.shape[0]:
        raise ChannelDomainError(f"inconsistent shapes H_rb {h_rb.shape}, g_ur {g_ur.shape}")
    return h_rb * g_ur[np.newaxis, :]


def beamforming_objective(h_rb: np.ndarray, omega: PhaseShiftVector, g_ur: np.ndarray) -> float:
    """
    :return: ||H_rb diag(omega) g_ur||^2
    """
    return float(np.linalg.norm(_effective_matrix(h_rb, g_ur) @ PhaseShiftVector.of(omega).omega) ** 2)


def optimize_phase_shifts(h_rb: np.ndarray, g_ur: np.ndarray, max_iters: int = 100,
                          tol: float = 1e-9) -> PhaseShiftVector:
    """
    Alternating maximization of ||H_rb diag(omega) g_ur||^2 over unit-modulus omega.

    Each iteration sets the receive combiner w to the normalized effective signal and then phase-aligns every
    term of w^H H_rb diag(omega) g_ur, i.e. omega_n = exp(-j arg((w^H H_rb[:, n]) g_ur[n])). The objective is
    non-decreasing; iterations stop when its relative change drops below ``tol``.

    A zero effective channel returns all-ones phases with ``degenerate=True``.
    """
    if max_iters < 1:
        raise ChannelDomainError(f"max_iters '{max_iters}' must be at least 1")
    effective = _effective_matrix(h_rb, g_ur)
    n = effective.shape[1]
    if not np.any(effective):
        logger.warning("zero effective channel, returning all-ones phase shifts")
        return PhaseShiftVector(np.ones(n, dtype=np.complex128), objective_history=(0.0,), degenerate=True)

    omega = np.ones(n, dtype=np.complex128)
    if not np.any(effective @ omega):
        # all-ones start cancels exactly; start from the dominant right singular vector instead
        _, _, vh = np.linalg.svd(effective)
        omega = np.exp(-1j * np.angle(vh[0]))
    history = [float(np.linalg.norm(effective @ omega) ** 2)]
    for iteration in range(max_iters):
        signal = effective @ omega
        combiner = signal / np.linalg.norm(signal)
        coefficients = combiner.conj() @ effective
        omega = np.exp(-1j * np.angle(coefficients))
        history.append(float(np.linalg.norm(effective @ omega) ** 2))
        if history[-1] < history[-2] * (1 - 1e-12):
            raise PhaseOptimizationError(
                f"objective decreased at iteration {iteration}: {history[-2]} -> {history[-1]}")
        if abs(history[-1] - history[-2]) <= tol * history[-1]:
            break
    logger.debug(f"phase optimization: {len(history) - 1} iterations, objective {history[0]:.3e} -> {history[-1]:.3e}")
    return PhaseShiftVector(omega, objective_history=tuple(history))


def received_snr(h_rb: np.ndarray, omega: PhaseShiftVector, g_ur: np.ndarray, s: complex, sigma2: float) -> float:
    """
    Post maximum-ratio-combining SNR ||H_rb diag(omega) g_ur||^2 |s|^2 / sigma^2.
    """
    if not sigma2 > 0:
        raise ChannelDomainError(f"sigma2 '{sigma2}' must be positive")
    return beamforming_objective(h_rb, omega, g_ur) * abs(s) ** 2 / sigma2
