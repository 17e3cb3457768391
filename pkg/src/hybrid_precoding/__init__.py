"""PCA-based hybrid precoding for wideband mmWave MIMO-OFDM with fixed and dynamic subarrays."""

from .config import ConfigError, SystemConfig
from .channel import ChannelRealization, generate_channel, steering_vector
from .precoder import (
    FullyDigitalPrecoders,
    Grouping,
    HybridPrecoder,
    baseband_precoder,
    fs_pattern,
    optimal_fully_digital,
    pca_analog_precoder,
    water_filling,
)
from .grouping import correlation_matrix, exhaustive_grouping, partition_count, shared_ahc
from .metrics import PowerModel, energy_efficiency, power_consumption, spectral_efficiency
from .harness import ExperimentSpec, ResultRow, run_experiment

__version__ = "0.1.0"
