"""Clustered wideband mmWave MIMO channel for uniform planar arrays.

Antenna (vertical n, horizontal m) of an ``n_v x n_h`` array is flattened to
index ``m * n_v + n`` (vertical index runs fastest). The same convention is
used for both ends of the link and for every subarray pattern.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .config import ConfigError, SystemConfig

__all__ = [
    "RayParameters",
    "ChannelRealization",
    "steering_vector",
    "steering_matrix",
    "sample_rays",
    "build_delay_taps",
    "taps_to_frequency",
    "generate_channel",
    "dump_channel",
    "load_channel",
]


@dataclass(frozen=True)
class RayParameters:
    cluster_index: int
    ray_index: int
    gain: complex
    delay_seconds: float
    aod_azimuth: float
    aod_elevation: float
    aoa_azimuth: float
    aoa_elevation: float


@dataclass
class ChannelRealization:
    taps: np.ndarray  # (D, Nr, Nt)
    freq: np.ndarray  # (K, Nr, Nt)
    rays: List[RayParameters] = field(default_factory=list)

    @property
    def K(self) -> int:
        return self.freq.shape[0]

    @property
    def nr(self) -> int:
        return self.freq.shape[1]

    @property
    def nt(self) -> int:
        return self.freq.shape[2]


def steering_matrix(azimuth, elevation, n_v: int, n_h: int,
                    dv_over_lambda: float = 0.5,
                    dh_over_lambda: float = 0.5) -> np.ndarray:
    """Stack UPA responses for arrays of angles as columns, shape ``(n_v*n_h, P)``.

    The horizontal phase progression uses ``sin(elevation) * cos(azimuth)``
    and the vertical one ``sin(azimuth)``.
    """
    az = np.atleast_1d(np.asarray(azimuth, dtype=float))
    el = np.atleast_1d(np.asarray(elevation, dtype=float))
    m = np.repeat(np.arange(n_h), n_v)[:, None]
    n = np.tile(np.arange(n_v), n_h)[:, None]
    phase = (m * dh_over_lambda * np.sin(el) * np.cos(az)
             + n * dv_over_lambda * np.sin(az))
    return np.exp(-2j * np.pi * phase) / np.sqrt(n_v * n_h)


def steering_vector(azimuth: float, elevation: float, n_v: int, n_h: int,
                    dv_over_lambda: float = 0.5,
                    dh_over_lambda: float = 0.5) -> np.ndarray:
    """Unit-norm UPA response to a plane wave at (azimuth, elevation)."""
    return steering_matrix(azimuth, elevation, n_v, n_h,
                           dv_over_lambda, dh_over_lambda)[:, 0]


def sample_rays(config: SystemConfig, seed) -> List[RayParameters]:
    """Draw cluster centres, Laplacian ray offsets, gains and delays.

    Cluster centres are uniform on [-pi/2, pi/2] for each of the four angles.
    Offsets are Laplacian with standard deviation ``angle_spread_rad``.
    Delays are uniform on [0, (D-1) T_s] so that nearest-tap rounding always
    lands on the grid; one delay per cluster unless ``per_ray_delay``.
    """
    rng = np.random.default_rng(seed)
    n_cl, n_ray = config.n_cl, config.n_ray
    ts = config.sample_period
    centres = rng.uniform(-np.pi / 2, np.pi / 2, size=(n_cl, 4))
    if config.per_ray_delay:
        delays = rng.uniform(0.0, (config.D - 1) * ts, size=(n_cl, n_ray))
    else:
        delays = np.repeat(rng.uniform(0.0, (config.D - 1) * ts, size=(n_cl, 1)), n_ray, axis=1)
    # Laplace(b) has standard deviation b * sqrt(2)
    offsets = rng.laplace(0.0, config.angle_spread_rad / np.sqrt(2), size=(n_cl, n_ray, 4))
    angles = centres[:, None, :] + offsets
    gains = (rng.standard_normal((n_cl, n_ray)) + 1j * rng.standard_normal((n_cl, n_ray))) / np.sqrt(2)

    rays = []
    for i in range(n_cl):
        for l in range(n_ray):
            a = angles[i, l]
            rays.append(RayParameters(
                cluster_index=i, ray_index=l, gain=complex(gains[i, l]),
                delay_seconds=float(delays[i, l]),
                aod_azimuth=float(a[0]), aod_elevation=float(a[1]),
                aoa_azimuth=float(a[2]), aoa_elevation=float(a[3]),
            ))
    return rays


def build_delay_taps(rays: Sequence[RayParameters], config: SystemConfig) -> np.ndarray:
    """Delay-domain channel matrices ``(D, Nr, Nt)``.

    The Dirac pulse is realized on the sampled grid: every ray contributes its
    whole coefficient to tap ``round(delay / T_s)``.
    """
    nt, nr = config.nt, config.nr
    taps = np.zeros((config.D, nr, nt), dtype=complex)
    if not rays:
        return taps
    ts = config.sample_period
    delays = np.array([r.delay_seconds for r in rays])
    if np.any(delays < 0):
        raise ConfigError("negative ray delay")
    tap_index = np.rint(delays / ts).astype(int)
    if np.any(tap_index >= config.D):
        raise ConfigError(
            f"ray delay rounds to tap {tap_index.max()} but only D={config.D} taps exist")
    gains = np.array([r.gain for r in rays])
    a_t = steering_matrix([r.aod_azimuth for r in rays], [r.aod_elevation for r in rays],
                          config.nt_v, config.nt_h, config.dv_over_lambda, config.dh_over_lambda)
    a_r = steering_matrix([r.aoa_azimuth for r in rays], [r.aoa_elevation for r in rays],
                          config.nr_v, config.nr_h, config.dv_over_lambda, config.dh_over_lambda)
    coeff = np.sqrt(nt * nr / (config.n_cl * config.n_ray)) * gains
    outer = coeff[:, None, None] * a_r.T[:, :, None] * a_t.conj().T[:, None, :]
    np.add.at(taps, tap_index, outer)
    return taps


def taps_to_frequency(taps: np.ndarray, K: int) -> np.ndarray:
    """``H[k] = sum_d H_d[d] exp(-j 2 pi k d / K)`` for k = 0..K-1."""
    taps = np.asarray(taps)
    if taps.shape[0] > K:
        raise ConfigError(f"{taps.shape[0]} taps do not fit into K={K} subcarriers")
    return np.fft.fft(taps, n=K, axis=0)


def generate_channel(config: SystemConfig, seed) -> ChannelRealization:
    rays = sample_rays(config, seed)
    taps = build_delay_taps(rays, config)
    return ChannelRealization(taps=taps, freq=taps_to_frequency(taps, config.K), rays=rays)


def _pack(a: np.ndarray) -> list:
    flat = np.ascontiguousarray(a).ravel()
    return np.column_stack([flat.real, flat.imag]).ravel().tolist()


def _unpack(values: list, shape) -> np.ndarray:
    pairs = np.asarray(values, dtype=float).reshape(-1, 2)
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(shape)


def dump_channel(channel: ChannelRealization, path: Optional[str] = None) -> str:
    """Serialize to JSON: dimension header plus row-major (re, im) float pairs."""
    D, nr, nt = channel.taps.shape
    doc = {
        "format": "hybrid-precoding-channel/1",
        "D": D, "K": channel.K, "nr": nr, "nt": nt,
        "taps": _pack(channel.taps),
        "freq": _pack(channel.freq),
        "rays": [dict(asdict(r), gain=[r.gain.real, r.gain.imag]) for r in channel.rays],
    }
    text = json.dumps(doc)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def load_channel(source: str) -> ChannelRealization:
    """Inverse of :func:`dump_channel`; accepts a path or the JSON text itself."""
    text = source
    if not source.lstrip().startswith("{"):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    doc = json.loads(text)
    D, K, nr, nt = doc["D"], doc["K"], doc["nr"], doc["nt"]
    rays = [RayParameters(**dict(r, gain=complex(*r["gain"]))) for r in doc.get("rays", [])]
    return ChannelRealization(taps=_unpack(doc["taps"], (D, nr, nt)),
                              freq=_unpack(doc["freq"], (K, nr, nt)), rays=rays)
