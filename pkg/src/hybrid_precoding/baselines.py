"""Reference analog precoders: SOMP, DFT codebook and covariance EVD."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .channel import steering_matrix
from .config import ConfigError
from .precoder import (
    FullyDigitalPrecoders,
    Grouping,
    _freq,
    analog_from_vectors,
    principal_eigenvectors,
    project_constant_modulus,
    quantize_phases,
)

__all__ = [
    "SteeringDictionary",
    "steering_dictionary",
    "somp_precoder",
    "dft_codebook",
    "dft_codebook_precoder",
    "channel_covariance",
    "covariance_evd_precoder",
]


@dataclass
class SteeringDictionary:
    atoms: np.ndarray  # (Nt, G)
    angles: List[Tuple[float, float]]


def steering_dictionary(nt_v: int, nt_h: int, n_az: Optional[int] = None, n_el: Optional[int] = None,
                        dv_over_lambda: float = 0.5, dh_over_lambda: float = 0.5) -> SteeringDictionary:
    """Transmit steering vectors on a uniform (azimuth, elevation) grid.

    Default grid is ``2*nt_v x 2*nt_h`` cell centres over [-pi/2, pi/2]^2,
    i.e. ``G = 4 * Nt`` atoms.
    """
    n_az = 2 * nt_v if n_az is None else n_az
    n_el = 2 * nt_h if n_el is None else n_el
    az = -np.pi / 2 + (np.arange(n_az) + 0.5) * np.pi / n_az
    el = -np.pi / 2 + (np.arange(n_el) + 0.5) * np.pi / n_el
    AZ, EL = np.meshgrid(az, el, indexing="ij")
    atoms = steering_matrix(AZ.ravel(), EL.ravel(), nt_v, nt_h, dv_over_lambda, dh_over_lambda)
    return SteeringDictionary(atoms=atoms, angles=list(zip(AZ.ravel().tolist(), EL.ravel().tolist())))


def somp_precoder(fopt: FullyDigitalPrecoders, dictionary, nt_rf: int,
                  return_history: bool = False):
    """Simultaneous OMP over all subcarriers.

    Picks the atom with the largest total correlation energy against the
    residuals, then re-projects every ``F_opt[k]`` onto the span of the
    selected atoms by least squares.
    """
    A = dictionary.atoms if isinstance(dictionary, SteeringDictionary) else np.asarray(dictionary)
    if A.shape[1] < nt_rf:
        raise ConfigError(f"dictionary has {A.shape[1]} atoms, fewer than nt_rf={nt_rf}")
    target = np.concatenate(list(fopt.f_opt), axis=1)  # (Nt, K*Ns)
    residual = target
    chosen: List[int] = []
    captured = []
    for _ in range(nt_rf):
        scores = np.sum(np.abs(A.conj().T @ residual) ** 2, axis=1)
        scores[chosen] = -np.inf
        chosen.append(int(np.argmax(scores)))
        sel = A[:, chosen]
        coef, *_ = np.linalg.lstsq(sel, target, rcond=None)
        residual = target - sel @ coef
        captured.append(float(np.sum(np.abs(sel @ coef) ** 2)))
    f_rf = A[:, chosen].copy()
    if return_history:
        return f_rf, chosen, captured
    return f_rf


def dft_codebook(nt_v: int, nt_h: int) -> np.ndarray:
    """All ``Nt`` Kronecker products of horizontal and vertical DFT beams.

    Column ``p * nt_v + q`` pairs horizontal beam ``p`` with vertical beam ``q``,
    matching the vertical-fastest antenna ordering.
    """
    dft_v = np.exp(-2j * np.pi * np.outer(np.arange(nt_v), np.arange(nt_v)) / nt_v)
    dft_h = np.exp(-2j * np.pi * np.outer(np.arange(nt_h), np.arange(nt_h)) / nt_h)
    return np.kron(dft_h, dft_v) / np.sqrt(nt_v * nt_h)


def dft_codebook_precoder(fopt: FullyDigitalPrecoders, nt_v: int, nt_h: int, nt_rf: int,
                          return_indices: bool = False):
    """The ``nt_rf`` DFT codewords with the largest projection energy."""
    C = dft_codebook(nt_v, nt_h)
    if nt_rf > C.shape[1]:
        raise ConfigError(f"nt_rf={nt_rf} exceeds the {C.shape[1]} DFT codewords")
    scores = np.sum(np.abs(np.conj(C.T)[None] @ fopt.f_opt) ** 2, axis=(0, 2))
    picked = np.argsort(-scores, kind="stable")[:nt_rf]
    f_rf = C[:, picked]
    if return_indices:
        return f_rf, picked.tolist()
    return f_rf


def channel_covariance(channel) -> np.ndarray:
    """Transmit-side covariance ``(1/K) sum_k H[k]^H H[k]``."""
    H = _freq(channel)
    R = np.einsum("kri,krj->ij", H.conj(), H) / H.shape[0]
    return 0.5 * (R + R.conj().T)


def covariance_evd_precoder(channel, grouping: Optional[Grouping] = None, nt_rf: Optional[int] = None,
                            quant_bits: Optional[int] = None,
                            constant_modulus: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Analog precoder from the eigenvectors of the channel covariance.

    Fully connected (``grouping=None``): top ``nt_rf`` eigenvectors. Subarray:
    principal eigenvector of each subset's block of the covariance.
    Returns ``(f_rf, mask)``.
    """
    R = channel_covariance(channel)
    nt = R.shape[0]
    if grouping is None:
        if nt_rf is None:
            raise ConfigError("nt_rf is required for a fully-connected analog precoder")
        _, U = principal_eigenvectors(R, nt_rf)
        mask = np.ones((nt, nt_rf), dtype=bool)
        if not constant_modulus:
            return U, mask
        return quantize_phases(project_constant_modulus(U), quant_bits), mask
    grouping.validate(nt)
    vectors = []
    for s in grouping:
        idx = list(s)
        _, u = principal_eigenvectors(R[np.ix_(idx, idx)], 1)
        u = u[:, 0]
        if constant_modulus:
            u = quantize_phases(project_constant_modulus(u), quant_bits)
        vectors.append(u)
    return analog_from_vectors(vectors, grouping, nt), grouping.mask(nt)
