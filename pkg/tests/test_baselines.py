import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_precoding.baselines import (
    channel_covariance,
    covariance_evd_precoder,
    dft_codebook,
    dft_codebook_precoder,
    somp_precoder,
    steering_dictionary,
)
from hybrid_precoding.channel import generate_channel, steering_vector
from hybrid_precoding.config import ConfigError, SystemConfig
from hybrid_precoding.precoder import FullyDigitalPrecoders, fs_pattern, optimal_fully_digital

CFG = SystemConfig(nt_v=4, nt_h=4, nr_v=2, nr_h=2, nt_rf=4, ns=2, K=8, D=4)


def fopt_of(f):
    f = np.asarray(f, dtype=complex)
    return FullyDigitalPrecoders(f_opt=f, sigma1=np.ones(f.shape[::2]))


def power_iteration(R, iters=5000):
    v = np.ones(R.shape[0], dtype=complex) + 0.05j * np.arange(R.shape[0])
    for _ in range(iters):
        v = R @ v
        v /= np.linalg.norm(v)
    return v


# steering dictionary

def test_dictionary_shape_and_modulus():
    d = steering_dictionary(4, 2)
    assert d.atoms.shape == (8, 32) and len(d.angles) == 32
    np.testing.assert_allclose(np.abs(d.atoms), 1 / math.sqrt(8))
    az, el = d.angles[5]
    np.testing.assert_allclose(d.atoms[:, 5], steering_vector(az, el, 4, 2))


# SOMP

def test_somp_recovers_single_atom():
    d = steering_dictionary(4, 4)
    atom = d.atoms[:, 13]
    f = np.tile(atom[None, :, None], (5, 1, 1))
    f_rf, chosen, captured = somp_precoder(fopt_of(f), d, 1, return_history=True)
    assert chosen == [13]
    assert captured[-1] == pytest.approx(5.0, rel=1e-12)  # residual energy 0


def test_somp_orthogonal_dictionary_order():
    C = dft_codebook(4, 2)
    col = (0.6 * C[:, 3] + 0.8j * C[:, 7])[None, :, None]
    _, chosen, _ = somp_precoder(fopt_of(col), C, 2, return_history=True)
    assert chosen == [7, 3]


def test_somp_full_dictionary_saturates(rng):
    C = dft_codebook(2, 2)
    f = rng.standard_normal((3, 4, 2)) + 1j * rng.standard_normal((3, 4, 2))
    _, _, captured = somp_precoder(fopt_of(f), C, 4, return_history=True)
    assert captured[-1] == pytest.approx(np.sum(np.abs(f) ** 2), rel=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_somp_captured_energy_monotone(seed):
    fopt = optimal_fully_digital(generate_channel(CFG, seed), CFG.ns)
    f_rf, chosen, captured = somp_precoder(fopt, steering_dictionary(4, 4), 4, return_history=True)
    assert np.all(np.diff(captured) >= -1e-12)
    assert len(set(chosen)) == 4
    np.testing.assert_allclose(np.abs(f_rf), 1 / 4)


def test_somp_needs_enough_atoms():
    with pytest.raises(ConfigError):
        somp_precoder(fopt_of(np.ones((1, 4, 1))), dft_codebook(2, 1), 3)


# DFT codebook

def test_dft_gram_is_identity():
    C = dft_codebook(8, 8)
    assert np.max(np.abs(C.conj().T @ C - np.eye(64))) <= 1e-12
    np.testing.assert_allclose(np.abs(C), 1 / 8)


def test_dft_trivial_array():
    np.testing.assert_allclose(dft_codebook(1, 1), [[1.0]])


def test_dft_aligned_beam_selected_first():
    C = dft_codebook(4, 4)
    f = np.tile(C[:, 9][None, :, None], (3, 1, 1))
    _, idx = dft_codebook_precoder(fopt_of(f), 4, 4, 2, return_indices=True)
    assert idx[0] == 9


def test_dft_single_path_channel():
    # a path whose spatial frequencies sit exactly on DFT bins
    C = dft_codebook(4, 4)
    ur = np.array([1.0, 0, 0, 0])
    H = np.outer(ur, C[:, 6].conj())[None]
    fopt = optimal_fully_digital(H, 1)
    _, idx = dft_codebook_precoder(fopt, 4, 4, 1, return_indices=True)
    assert idx == [6]


def test_dft_too_many_chains():
    with pytest.raises(ConfigError):
        dft_codebook_precoder(fopt_of(np.ones((1, 4, 1))), 2, 2, 5)


# covariance EVD

def test_covariance_rank_one(rng):
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    H = 3 * np.outer(u, v.conj())[None]
    f_rf, mask = covariance_evd_precoder(H, nt_rf=1)
    assert mask.all()
    expected = np.exp(1j * np.angle(v))
    ratio = f_rf[:, 0] * math.sqrt(8) / expected
    np.testing.assert_allclose(ratio, ratio[0], atol=1e-10)  # equal up to a common phase
    raw, _ = covariance_evd_precoder(H, nt_rf=1, constant_modulus=False)
    assert abs(np.vdot(raw[:, 0], v)) / np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_covariance_identity_tie_break():
    raw, _ = covariance_evd_precoder(np.eye(4)[None].astype(complex), nt_rf=1, constant_modulus=False)
    np.testing.assert_allclose(raw[:, 0], [1, 0, 0, 0], atol=1e-15)


def test_covariance_average_over_subcarriers(rng):
    H = rng.standard_normal((3, 2, 4)) + 1j * rng.standard_normal((3, 2, 4))
    loop = sum(h.conj().T @ h for h in H) / 3
    np.testing.assert_allclose(channel_covariance(H), loop, atol=1e-13)


def test_covariance_subarray_matches_power_iteration():
    ch = generate_channel(CFG, 21)
    R = channel_covariance(ch)
    g = fs_pattern("vertical", 4, 4, 4)
    raw, _ = covariance_evd_precoder(ch, g, constant_modulus=False)
    for r, s in enumerate(g):
        idx = list(s)
        oracle = power_iteration(R[np.ix_(idx, idx)])
        assert abs(np.vdot(raw[idx, r], oracle)) >= 1 - 1e-9


def test_covariance_fca_requires_chain_count():
    with pytest.raises(ConfigError):
        covariance_evd_precoder(np.eye(2)[None])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["vertical", "horizontal", "squared", "interlaced", None]),
       st.sampled_from([None, 1, 3]))
def test_baseline_outputs_respect_mask_and_modulus(seed, kind, bits):
    ch = generate_channel(CFG, seed)
    g = None if kind is None else fs_pattern(kind, 4, 4, 4)
    f_rf, mask = covariance_evd_precoder(ch, g, nt_rf=4, quant_bits=bits)
    assert np.all((f_rf != 0) == mask)
    for r in range(4):
        np.testing.assert_allclose(np.abs(f_rf[mask[:, r], r]), 1 / math.sqrt(mask[:, r].sum()))
