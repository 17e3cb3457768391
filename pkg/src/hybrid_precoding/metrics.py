"""Spectral efficiency, transceiver power draw and energy efficiency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError
from .precoder import HybridPrecoder, _freq

__all__ = ["PowerModel", "spectral_efficiency", "power_consumption", "energy_efficiency"]

ARCHITECTURES = ("passive", "active")
ARRAYS = ("FCA", "PCS", "FD")


@dataclass(frozen=True)
class PowerModel:
    """Component power draws in milliwatts plus the hardware layout."""

    p_ps: float = 30.0
    p_dac: float = 200.0
    p_mix: float = 39.0
    p_lo: float = 5.0
    p_pa: float = 138.0
    architecture: str = "passive"
    array: str = "PCS"

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"architecture must be one of {ARCHITECTURES}")
        if self.array not in ARRAYS:
            raise ConfigError(f"array must be one of {ARRAYS}")
        if min(self.p_ps, self.p_dac, self.p_mix, self.p_lo, self.p_pa) < 0:
            raise ConfigError("component powers must be nonnegative")


def spectral_efficiency(channel, precoder, noise_variance: float) -> float:
    """Average over subcarriers of ``log2 det(I + H F F^H H^H / noise_variance)``.

    ``precoder`` is a :class:`HybridPrecoder` or a ``(K, Nt, Ns)`` array of
    overall precoders.
    """
    H = _freq(channel)
    F = precoder.effective() if isinstance(precoder, HybridPrecoder) else np.asarray(precoder)
    HF = H @ F
    nr = H.shape[1]
    M = np.eye(nr) + HF @ np.conj(np.swapaxes(HF, 1, 2)) / noise_variance
    sign, logdet = np.linalg.slogdet(M)
    return float(np.mean(logdet.real) / np.log(2))


def power_consumption(model: PowerModel, nt: int, nt_rf: int) -> float:
    """Total transmitter power in milliwatts."""
    m = model
    if m.array == "FD":
        return nt * (m.p_pa + m.p_dac + m.p_mix + m.p_lo)
    n_ps = nt * nt_rf if m.array == "FCA" else nt
    if m.architecture == "passive":
        return n_ps * m.p_ps + nt_rf * (m.p_dac + m.p_mix + m.p_pa + m.p_lo)
    return n_ps * m.p_ps + nt * m.p_pa + nt_rf * (m.p_dac + m.p_mix + m.p_lo)


def energy_efficiency(se_bits_per_s_hz: float, bandwidth_hz: float, power_mw: float) -> float:
    """Bits per joule, ``SE * B / P`` with ``P`` converted from mW to W."""
    if not power_mw > 0:
        raise ValueError("power must be positive")
    return se_bits_per_s_hz * bandwidth_hz / (power_mw / 1000.0)
