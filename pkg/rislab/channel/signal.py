import numpy as np

from rislab.channel.phaseshift import PhaseShiftVector
from rislab.exceptions import ChannelDomainError


def ris_received(g_ur: np.ndarray, s: complex) -> np.ndarray:
    """
    Noiseless signal impinging on the RIS.
    """
    return np.asarray(g_ur, dtype=np.complex128) * s


def noiseless_bs_signal(h_rb: np.ndarray, omega: PhaseShiftVector, g_ur: np.ndarray, s: complex) -> np.ndarray:
    h_rb = np.asarray(h_rb)
    g_ur = np.asarray(g_ur)
    omega = PhaseShiftVector.of(omega)
    if h_rb.ndim != 2 or h_rb.shape[1] != g_ur.shape[0] or omega.omega.shape[0] != g_ur.shape[0]:
        raise ChannelDomainError(f"inconsistent shapes H_rb {h_rb.shape}, omega {omega.omega.shape}, g_ur {g_ur.shape}")
    return h_rb @ (omega.omega * g_ur) * s


def complex_gaussian(size: int, noise_power_w: float, rng_seed) -> np.ndarray:
    if noise_power_w < 0:
        raise ChannelDomainError(f"noise power '{noise_power_w}' must not be negative")
    rng = np.random.default_rng(rng_seed)
    scale = np.sqrt(noise_power_w / 2)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def bs_received(h_rb: np.ndarray, omega: PhaseShiftVector, g_ur: np.ndarray, s: complex, noise_power_w: float,
                rng_seed) -> np.ndarray:
    """
    y = H_rb diag(omega) g_ur s + n with n circularly-symmetric Gaussian of per-entry variance ``noise_power_w``,
    drawn from ``rng_seed``.
    """
    if noise_power_w < 0:
        raise ChannelDomainError(f"noise power '{noise_power_w}' must not be negative")
    clean = noiseless_bs_signal(h_rb, omega, g_ur, s)
    return clean + complex_gaussian(clean.shape[0], noise_power_w, rng_seed)
