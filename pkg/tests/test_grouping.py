import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_precoding.config import ConfigError
from hybrid_precoding.grouping import (
    BudgetExceeded,
    correlation_matrix,
    exact_objective,
    exhaustive_grouping,
    greedy_grouping,
    iter_partitions,
    minkowski_lambda_estimate,
    minkowski_objective,
    mutual_correlation,
    partition_count,
    random_partition,
    shared_ahc,
)
from hybrid_precoding.precoder import FullyDigitalPrecoders, Grouping, stacked_precoders

from conftest import SMALL, random_unitary_columns, small_rf

BLOCKS = np.array([
    [1.0, 0.9, 0.0, 0.0],
    [0.9, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.8],
    [0.0, 0.0, 0.8, 1.0],
])


def fopt_of(blocks):
    f = np.asarray(blocks, dtype=complex)
    return FullyDigitalPrecoders(f_opt=f, sigma1=np.ones(f.shape[::2]))


def ranks(x):
    r = np.empty(len(x))
    r[np.argsort(x, kind="stable")] = np.arange(len(x))
    return r


def spearman(a, b):
    return float(np.corrcoef(ranks(a), ranks(b))[0, 1])


# correlation matrix

def test_correlation_of_unit_vector():
    e1 = np.zeros((1, 3, 1))
    e1[0, 0, 0] = 1
    rF = correlation_matrix(fopt_of(e1))
    expected = np.zeros((3, 3))
    expected[0, 0] = 1
    np.testing.assert_array_equal(rF, expected)


def test_correlation_trace_and_loop_oracle(rng):
    blocks = [random_unitary_columns(rng, 6, 2) for _ in range(5)]
    rF = correlation_matrix(fopt_of(blocks))
    assert np.trace(rF).real == pytest.approx(10.0, rel=1e-12)
    loop = np.zeros((6, 6), dtype=complex)
    for b in blocks:
        loop += b @ b.conj().T
    assert np.max(np.abs(rF - loop)) <= 1e-12


def test_correlation_is_hermitian_psd():
    rF = small_rf(3)
    assert np.max(np.abs(rF - rF.conj().T)) <= 1e-12
    assert np.linalg.eigvalsh(rF).min() >= -1e-10


# Minkowski estimate and mutual correlation

def test_minkowski_exact_cases():
    assert minkowski_lambda_estimate(np.eye(2), [0, 1]) == pytest.approx(1.0)
    assert minkowski_lambda_estimate(np.ones((2, 2)), [0, 1]) == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        minkowski_lambda_estimate(np.eye(2), [])


def test_minkowski_tracks_exact_objective():
    corr = []
    parts = list(iter_partitions(8, 2))
    for seed in range(100):
        rF = small_rf(seed)
        est = [minkowski_objective(rF, p) for p in parts]
        ex = [exact_objective(rF, p) for p in parts]
        corr.append(spearman(est, ex))
    assert np.mean(corr) >= 0.8


def test_mutual_correlation_examples():
    rF = small_rf(1)
    assert mutual_correlation(rF, [2], [5]) == pytest.approx(abs(rF[2, 5]))
    assert mutual_correlation(np.ones((5, 5)), [0, 3], [1, 2, 4]) == pytest.approx(1.0)
    R = np.eye(3)
    R[0, 2] = R[2, 0] = 0.2
    R[1, 2] = R[2, 1] = -0.4
    assert mutual_correlation(R, [0, 1], [2]) == pytest.approx(0.3)


def test_mutual_correlation_symmetric_and_disjoint():
    rF = small_rf(2)
    assert mutual_correlation(rF, [0, 4], [1, 6, 7]) == pytest.approx(mutual_correlation(rF, [1, 6, 7], [0, 4]))
    with pytest.raises(ConfigError):
        mutual_correlation(rF, [0, 1], [1, 2])


# shared-AHC

def test_ahc_singletons_when_chains_equal_antennas():
    assert shared_ahc(small_rf(0), 8, 8).subsets == tuple((i,) for i in range(8))


def test_ahc_block_diagonal():
    assert shared_ahc(BLOCKS, 4, 2).subsets == ((0, 1), (2, 3))


def test_ahc_matches_exhaustive_on_blocks():
    best, _ = exhaustive_grouping(BLOCKS, 4, 2)
    assert best == shared_ahc(BLOCKS, 4, 2)


def test_ahc_deterministic():
    rF = small_rf(7)
    assert shared_ahc(rF, 8, 3) == shared_ahc(rF.copy(), 8, 3)


def test_ahc_all_ties_still_terminates():
    g = shared_ahc(np.ones((6, 6)), 6, 2)
    g.validate(6, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8))
def test_ahc_returns_valid_grouping(seed, nrf):
    shared_ahc(small_rf(seed), 8, nrf).validate(8, nrf)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9), st.data())
def test_ahc_valid_on_random_psd(n, data):
    nrf = data.draw(st.integers(1, n))
    seed = data.draw(st.integers(0, 2 ** 32 - 1))
    r = np.random.default_rng(seed)
    a = r.standard_normal((n, 3)) + 1j * r.standard_normal((n, 3))
    shared_ahc(a @ a.conj().T, n, nrf).validate(n, nrf)


def test_ahc_beats_greedy_on_average():
    diffs = [exact_objective(rF, shared_ahc(rF, 8, 2)) - exact_objective(rF, greedy_grouping(rF, 8, 2))
             for rF in (small_rf(s) for s in range(100))]
    assert np.mean(diffs) >= 0


def test_ahc_rejects_bad_chain_count():
    with pytest.raises(ConfigError):
        shared_ahc(np.eye(3), 3, 4)


# exhaustive search and partition counting

def test_exhaustive_two_antennas():
    g, val = exhaustive_grouping(np.eye(2), 2, 2)
    assert g.subsets == ((0,), (1,)) and val == pytest.approx(2.0)


def test_exhaustive_counts():
    assert sum(1 for _ in iter_partitions(8, 2)) == 127


@pytest.mark.parametrize("nt", range(1, 11))
def test_enumeration_matches_formula(nt):
    for k in range(1, nt + 1):
        if partition_count(nt, k) > 150_000:
            continue
        parts = list(iter_partitions(nt, k))
        assert len(parts) == partition_count(nt, k)
        assert len(set(parts)) == len(parts)


def test_partition_count_values():
    assert partition_count(2, 2) == 1
    assert partition_count(3, 2) == 3
    assert partition_count(8, 2) == 127
    assert float(partition_count(64, 4)) == pytest.approx(1.4178e37, rel=1e-4)


def test_exhaustive_budget_refusal():
    with pytest.raises(BudgetExceeded):
        exhaustive_grouping(np.eye(64), 64, 4)
    with pytest.raises(BudgetExceeded):
        exhaustive_grouping(np.eye(8), 8, 2, budget=100)


def test_exhaustive_accepts_precoders():
    blocks = [np.linalg.qr(BLOCKS[:, :2].astype(complex) + 0.1)[0]]
    f = fopt_of(blocks)
    g1, v1 = exhaustive_grouping(f, 4, 2)
    g2, v2 = exhaustive_grouping(correlation_matrix(f), 4, 2)
    assert g1 == g2 and v1 == pytest.approx(v2)


def test_exhaustive_is_optimal_for_minkowski_too():
    rF = small_rf(4)
    g, val = exhaustive_grouping(rF, 8, 2, objective="minkowski")
    assert val == pytest.approx(max(minkowski_objective(rF, p) for p in iter_partitions(8, 2)))
    with pytest.raises(ConfigError):
        exhaustive_grouping(rF, 8, 2, objective="trace")


# greedy reference

def test_greedy_singletons():
    assert greedy_grouping(small_rf(0), 8, 8).subsets == tuple((i,) for i in range(8))


def test_greedy_block_diagonal():
    assert greedy_grouping(BLOCKS, 4, 2).subsets == ((0, 1), (2, 3))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8))
def test_greedy_valid_and_deterministic(seed, nrf):
    rF = small_rf(seed)
    g = greedy_grouping(rF, 8, nrf)
    g.validate(8, nrf)
    assert g == greedy_grouping(rF, 8, nrf)


# objective consistency and random partitions

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_objective_consistency(seed, nrf):
    from hybrid_precoding.channel import generate_channel
    from hybrid_precoding.precoder import optimal_fully_digital

    fopt = optimal_fully_digital(generate_channel(SMALL, seed), SMALL.ns)
    rF = correlation_matrix(fopt)
    g = random_partition(8, nrf, np.random.default_rng(seed))
    via_f = sum(np.linalg.svd(stacked_precoders(fopt, s), compute_uv=False)[0] ** 2 for s in g)
    assert exact_objective(rF, g) == pytest.approx(via_f, rel=1e-9)


def test_random_partition_is_uniform():
    rng = np.random.default_rng(0)
    counts = {}
    for _ in range(3000):
        g = random_partition(4, 2, rng)
        g.validate(4, 2)
        counts[g] = counts.get(g, 0) + 1
    assert len(counts) == 7
    assert min(counts.values()) > 3000 / 7 * 0.8
