import numpy as np
import pytest

from hybrid_precoding.channel import generate_channel
from hybrid_precoding.config import SystemConfig
from hybrid_precoding.grouping import correlation_matrix
from hybrid_precoding.precoder import optimal_fully_digital

ACCEPTANCE_LINES = []

# default link shrunk to an 8-antenna (4x2) transmitter, used wherever
# exhaustive search over groupings has to stay cheap
SMALL = SystemConfig(nt_v=4, nt_h=2, nt_rf=2, ns=2, K=16, D=16)


def small_rf(seed, cfg=SMALL):
    ch = generate_channel(cfg, seed)
    return correlation_matrix(optimal_fully_digital(ch, cfg.ns))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unitary_columns(rng, n, m):
    a = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    q, _ = np.linalg.qr(a)
    return q


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
