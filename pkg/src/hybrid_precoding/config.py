"""Link configuration shared by every stage of the simulator."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Optional


class ConfigError(ValueError):
    """Raised for inconsistent or unsupported configuration values."""


def parse_quant_bits(value: Any) -> Optional[int]:
    """Normalize a phase-quantization setting; ``None`` means unquantized."""
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinite", "none", "∞"):
            return None
        value = int(value)
    if isinstance(value, float) and math.isinf(value):
        return None
    bits = int(value)
    if bits < 1:
        raise ConfigError(f"quant_bits must be >= 1 or 'infinite', got {value!r}")
    return bits


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions and physical parameters of one simulated link.

    Defaults reproduce the evaluation setup: 8x8 transmit UPA, 2x2 receive
    UPA, 512 subcarriers over 500 MHz, 64 delay taps, 8 clusters of 10 rays,
    4 transmit RF chains and 3 streams.
    """

    nt_v: int = 8
    nt_h: int = 8
    nr_v: int = 2
    nr_h: int = 2
    nt_rf: int = 4
    ns: int = 3
    K: int = 512
    D: int = 64
    bandwidth_hz: float = 500e6
    n_cl: int = 8
    n_ray: int = 10
    angle_spread_rad: float = math.radians(7.5)
    dv_over_lambda: float = 0.5
    dh_over_lambda: float = 0.5
    noise_variance: float = 1.0
    quant_bits: Optional[int] = None
    per_ray_delay: bool = False

    def __post_init__(self):
        object.__setattr__(self, "quant_bits", parse_quant_bits(self.quant_bits))
        for name in ("nt_v", "nt_h", "nr_v", "nr_h", "nt_rf", "ns", "K", "D", "n_cl", "n_ray"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("bandwidth_hz", "dv_over_lambda", "dh_over_lambda", "noise_variance"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.angle_spread_rad < 0:
            raise ConfigError("angle_spread_rad must be nonnegative")
        if self.nt_rf > self.nt:
            raise ConfigError(f"nt_rf={self.nt_rf} exceeds the {self.nt} transmit antennas")
        if self.ns > self.nt_rf:
            raise ConfigError(f"ns={self.ns} exceeds nt_rf={self.nt_rf}")
        if self.ns > self.nr:
            raise ConfigError(f"ns={self.ns} exceeds the {self.nr} receive antennas")
        if self.D > self.K:
            raise ConfigError(f"D={self.D} exceeds K={self.K}")

    @property
    def nt(self) -> int:
        return self.nt_v * self.nt_h

    @property
    def nr(self) -> int:
        return self.nr_v * self.nr_h

    @property
    def sample_period(self) -> float:
        return 1.0 / self.bandwidth_hz

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["quant_bits"] = "infinite" if self.quant_bits is None else self.quant_bits
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)
