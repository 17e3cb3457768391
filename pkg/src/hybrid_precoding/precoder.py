"""Fully-digital, PCA analog and water-filled baseband precoders."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .channel import ChannelRealization
from .config import ConfigError

__all__ = [
    "Grouping",
    "FullyDigitalPrecoders",
    "HybridPrecoder",
    "DegenerateAnalogError",
    "optimal_fully_digital",
    "stacked_precoders",
    "principal_eigenvectors",
    "pca_subarray_vector",
    "project_constant_modulus",
    "quantize_phases",
    "fs_pattern",
    "FS_KINDS",
    "pca_analog_precoder",
    "analog_from_vectors",
    "water_filling",
    "inverse_sqrt_gram",
    "baseband_precoder",
    "hybrid_precoder",
    "fully_digital_precoder",
    "unitary_objective",
]

FS_KINDS = ("vertical", "horizontal", "squared", "interlaced")


class DegenerateAnalogError(ValueError):
    """The analog precoder does not have full column rank."""


@dataclass(frozen=True)
class Grouping:
    """Partition of transmit antennas (0-based) into one subset per RF chain.

    Subsets are stored sorted, and ordered by their smallest antenna index.
    """

    subsets: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        canon = tuple(sorted((tuple(sorted(int(i) for i in s)) for s in self.subsets),
                             key=lambda s: (s[0] if s else -1, s)))
        object.__setattr__(self, "subsets", canon)

    @classmethod
    def of(cls, subsets: Iterable[Iterable[int]]) -> "Grouping":
        return cls(tuple(tuple(s) for s in subsets))

    def __len__(self) -> int:
        return len(self.subsets)

    def __iter__(self):
        return iter(self.subsets)

    @property
    def nt(self) -> int:
        return sum(len(s) for s in self.subsets)

    def validate(self, nt: int, nt_rf: Optional[int] = None) -> None:
        """Check cover, disjointness and nonemptiness."""
        if nt_rf is not None and len(self.subsets) != nt_rf:
            raise ConfigError(f"grouping has {len(self.subsets)} subsets, expected {nt_rf}")
        seen = []
        for s in self.subsets:
            if not s:
                raise ConfigError("grouping contains an empty subset")
            seen.extend(s)
        if sorted(seen) != list(range(nt)):
            raise ConfigError("grouping subsets must be disjoint and cover every antenna")

    def mask(self, nt: Optional[int] = None) -> np.ndarray:
        nt = self.nt if nt is None else nt
        m = np.zeros((nt, len(self.subsets)), dtype=bool)
        for r, s in enumerate(self.subsets):
            m[list(s), r] = True
        return m

    def to_json(self) -> str:
        return json.dumps([list(s) for s in self.subsets])

    @classmethod
    def from_json(cls, text: str) -> "Grouping":
        return cls.of(json.loads(text))


@dataclass
class FullyDigitalPrecoders:
    f_opt: np.ndarray  # (K, Nt, Ns)
    sigma1: np.ndarray  # (K, Ns), descending

    @property
    def K(self) -> int:
        return self.f_opt.shape[0]

    @property
    def nt(self) -> int:
        return self.f_opt.shape[1]

    @property
    def ns(self) -> int:
        return self.f_opt.shape[2]


@dataclass
class HybridPrecoder:
    f_rf: np.ndarray  # (Nt, Nrf)
    mask: np.ndarray  # (Nt, Nrf) bool
    f_bb: np.ndarray  # (K, Nrf, Ns)

    def effective(self) -> np.ndarray:
        """Per-subcarrier overall precoder ``F_RF F_BB[k]``, shape (K, Nt, Ns)."""
        return np.einsum("tr,krs->kts", self.f_rf, self.f_bb)

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.effective()) ** 2))


def _freq(channel) -> np.ndarray:
    return channel.freq if isinstance(channel, ChannelRealization) else np.asarray(channel)


def optimal_fully_digital(channel, ns: int) -> FullyDigitalPrecoders:
    """Top-``ns`` right singular vectors of every ``H[k]``."""
    H = _freq(channel)
    if ns > min(H.shape[1], H.shape[2]):
        raise ConfigError(f"ns={ns} exceeds min(Nr, Nt)={min(H.shape[1:])}")
    _, s, vh = np.linalg.svd(H, full_matrices=False)
    f_opt = np.conj(np.swapaxes(vh[:, :ns, :], 1, 2))
    return FullyDigitalPrecoders(f_opt=f_opt, sigma1=s[:, :ns])


def stacked_precoders(fopt: FullyDigitalPrecoders, subset: Optional[Sequence[int]] = None) -> np.ndarray:
    """``[F_opt[1] ... F_opt[K]]`` restricted to the rows in ``subset``."""
    F = np.concatenate(list(fopt.f_opt), axis=1)
    return F if subset is None else F[list(subset), :]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # rotate so the largest-modulus entry (first on ties) is real positive
    idx = np.argmax(np.abs(v), axis=0)
    pivot = v[idx, np.arange(v.shape[1])]
    rot = np.ones_like(pivot)
    nz = np.abs(pivot) > 0
    rot[nz] = np.conj(pivot[nz]) / np.abs(pivot[nz])
    return v * rot


def principal_eigenvectors(R: np.ndarray, n: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Leading ``n`` eigenpairs of a Hermitian matrix, descending.

    Ties keep the eigen-solver's order (lowest index first). Each vector is
    phase-normalized so its largest-modulus entry is real positive.
    """
    w, V = np.linalg.eigh(R)
    order = np.argsort(-w, kind="stable")[:n]
    return w[order], _fix_phase(V[:, order])


def pca_subarray_vector(fopt: FullyDigitalPrecoders, subset: Sequence[int]) -> np.ndarray:
    """Principal component of the subarray's stacked optimal precoders."""
    if len(subset) == 0:
        raise ConfigError("subset must be nonempty")
    F_s = stacked_precoders(fopt, subset)
    _, u = principal_eigenvectors(F_s @ F_s.conj().T, 1)
    return u[:, 0]


def project_constant_modulus(u: np.ndarray, n_sub: Optional[int] = None) -> np.ndarray:
    """Closest vector with entries of modulus ``1/sqrt(n_sub)`` (phase of ``u`` kept)."""
    u = np.asarray(u)
    n_sub = u.shape[0] if n_sub is None else n_sub
    if u.shape[0] != n_sub:
        raise ConfigError(f"vector length {u.shape[0]} != n_sub={n_sub}")
    return np.exp(1j * np.angle(u)) / np.sqrt(n_sub)


def quantize_phases(f_rf: np.ndarray, bits: Optional[int]) -> np.ndarray:
    """Snap every nonzero entry's phase to the ``2**bits``-point grid.

    Halfway cases go to the smaller phase. ``bits=None`` is the identity.
    """
    if bits is None:
        return f_rf
    f_rf = np.asarray(f_rf)
    levels = 2 ** int(bits)
    step = 2 * np.pi / levels
    phase = np.mod(np.angle(f_rf), 2 * np.pi)
    idx = np.mod(np.ceil(phase / step - 0.5), levels)
    out = np.abs(f_rf) * np.exp(1j * idx * step)
    return np.where(f_rf != 0, out, 0)


def _tile_shape(nt_v: int, nt_h: int, nt_rf: int) -> Tuple[int, int]:
    # most square factorization a*b = nt_rf with a | nt_v and b | nt_h
    best = None
    for a in range(1, nt_rf + 1):
        if nt_rf % a:
            continue
        b = nt_rf // a
        if nt_v % a or nt_h % b:
            continue
        key = (abs(math.log(a / b)), -a)
        if best is None or key < best[0]:
            best = (key, (a, b))
    if best is None:
        raise ConfigError(f"{nt_rf} RF chains admit no rectangular tiling of a {nt_v}x{nt_h} array")
    return best[1]


def fs_pattern(kind: str, nt_v: int, nt_h: int, nt_rf: int,
               tiles: Optional[Tuple[int, int]] = None) -> Grouping:
    """Fixed-subarray antenna-to-chain map.

    ``vertical``: contiguous runs of the vertical-fastest ordering (column
    stripes). ``horizontal``: contiguous runs of the horizontal-fastest
    ordering (row stripes). ``squared``: ``a x b`` rectangular tiles.
    ``interlaced``: antenna (v, h) goes to chain ``(v mod a) * b + (h mod b)``.
    ``tiles=(a, b)`` overrides the automatic, most square choice.
    """
    nt = nt_v * nt_h
    if nt_rf < 1 or nt % nt_rf:
        raise ConfigError(f"{nt_rf} RF chains do not divide {nt} antennas")
    v = np.tile(np.arange(nt_v), nt_h)
    h = np.repeat(np.arange(nt_h), nt_v)
    n_sub = nt // nt_rf
    if kind == "vertical":
        chain = np.arange(nt) // n_sub
    elif kind == "horizontal":
        chain = (v * nt_h + h) // n_sub
    elif kind in ("squared", "interlaced"):
        a, b = tiles if tiles is not None else _tile_shape(nt_v, nt_h, nt_rf)
        if a * b != nt_rf or nt_v % a or nt_h % b:
            raise ConfigError(f"tiles {a}x{b} incompatible with {nt_v}x{nt_h} array and {nt_rf} chains")
        if kind == "squared":
            chain = (v // (nt_v // a)) * b + h // (nt_h // b)
        else:
            chain = (v % a) * b + h % b
    else:
        raise ConfigError(f"unknown fixed-subarray kind {kind!r}; expected one of {FS_KINDS}")
    return Grouping.of([np.flatnonzero(chain == r).tolist() for r in range(nt_rf)])


def analog_from_vectors(vectors: Sequence[np.ndarray], grouping: Grouping, nt: int) -> np.ndarray:
    """Scatter per-subarray vectors into a block-structured ``Nt x Nrf`` matrix."""
    f_rf = np.zeros((nt, len(grouping)), dtype=complex)
    for r, (s, vec) in enumerate(zip(grouping, vectors)):
        f_rf[list(s), r] = vec
    return f_rf


def pca_analog_precoder(fopt: FullyDigitalPrecoders, grouping: Optional[Grouping] = None,
                        quant_bits: Optional[int] = None, nt_rf: Optional[int] = None,
                        constant_modulus: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """PCA-based frequency-flat analog precoder and its connectivity mask.

    With a grouping, each chain's weights are the principal component of its
    subarray's stacked optimal precoders. With ``grouping=None`` (fully
    connected, ``nt_rf`` required) the columns are the top ``nt_rf`` principal
    components of the full stack. ``constant_modulus=False`` skips the
    projection and quantization and returns the unit-norm components.
    """
    nt = fopt.nt
    F = stacked_precoders(fopt)
    R = F @ F.conj().T
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


def water_filling(sigma_tilde: np.ndarray, ns: Optional[int] = None, K: Optional[int] = None,
                  floor: Optional[float] = None, tol: float = 1e-9) -> Tuple[float, np.ndarray]:
    """Allocate ``K * ns`` units of power over the effective modes.

    Allocation ``p_i[k] = (mu - floor / sigma_i[k]**2)^+`` with ``floor``
    defaulting to ``ns``. The active set is found by scanning the sorted
    levels, so ``mu`` is exact rather than iterated.

    Returns
    -------
    (mu, allocations) : (float, np.ndarray)
        Water level and per-mode powers, same shape as ``sigma_tilde``.
    """
    sig = np.atleast_2d(np.asarray(sigma_tilde, dtype=float))
    K = sig.shape[0] if K is None else K
    ns = sig.shape[1] if ns is None else ns
    if np.any(sig < 0):
        raise ValueError("effective singular values must be nonnegative")
    floor = float(ns) if floor is None else float(floor)
    total = float(K * ns)
    with np.errstate(divide="ignore", over="ignore"):
        level = floor / sig ** 2
    finite = np.isfinite(level)
    if not np.any(finite):
        raise ValueError("water-filling needs at least one mode with positive gain")
    # The active set is a prefix of the sorted levels. Working with level
    # differences avoids cancellation when gains are tiny and levels huge.
    flat = np.where(finite, level, np.inf).ravel()
    order = np.argsort(flat, kind="stable")[:np.count_nonzero(finite)]
    ordered = flat[order]
    n = np.arange(1, ordered.size + 1)
    gap = np.concatenate([[0.0], np.cumsum(n[:-1] * np.diff(ordered))])
    n_active = int(np.count_nonzero(gap < total))
    share = (total - gap[n_active - 1]) / n_active
    mu = float(ordered[n_active - 1] + share)
    alloc = np.zeros(flat.size)
    alloc[order[:n_active]] = share + (ordered[n_active - 1] - ordered[:n_active])
    if abs(alloc.sum() - total) > tol * total:
        raise ArithmeticError("water-filling failed to meet the power budget")
    return float(mu), alloc.reshape(np.shape(sigma_tilde))


def inverse_sqrt_gram(f_rf: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """``(F_RF^H F_RF)^(-1/2)``; raises when ``F_RF`` is column-rank deficient."""
    w, V = np.linalg.eigh(f_rf.conj().T @ f_rf)
    if w.min() <= rtol * max(w.max(), np.finfo(float).tiny):
        raise DegenerateAnalogError(
            "analog precoder is rank deficient (degenerate grouping or repeated columns)")
    return (V / np.sqrt(w)) @ V.conj().T


def baseband_precoder(channel, f_rf: np.ndarray, ns: int, noise_variance: float = 1.0,
                      water_fill: bool = True, floor: str = "noise") -> np.ndarray:
    """Per-subcarrier digital precoders ``(K, Nrf, Ns)`` for a fixed analog stage.

    ``floor`` selects the water-filling level: ``"noise"`` uses
    ``noise_variance / sigma**2`` (rate-optimal for the SE metric), ``"streams"``
    uses ``ns / sigma**2``. ``water_fill=False`` gives the unitary variant.
    """
    H = _freq(channel)
    G = inverse_sqrt_gram(f_rf)
    f_bar = f_rf @ G
    if ns > min(H.shape[1], f_rf.shape[1]):
        raise ConfigError(f"ns={ns} exceeds min(Nr, Nrf)")
    _, s, vh = np.linalg.svd(H @ f_bar, full_matrices=False)
    v_top = np.conj(np.swapaxes(vh[:, :ns, :], 1, 2))
    if water_fill:
        level = {"noise": noise_variance, "streams": float(ns)}[floor]
        _, p = water_filling(s[:, :ns], floor=level)
        v_top = v_top * np.sqrt(p)[:, None, :]
    return np.einsum("ij,kjs->kis", G, v_top)


def hybrid_precoder(channel, f_rf: np.ndarray, mask: np.ndarray, ns: int,
                    noise_variance: float = 1.0, quantize_after: Optional[int] = None,
                    **kwargs) -> HybridPrecoder:
    """Baseband stage for ``f_rf`` bundled into a :class:`HybridPrecoder`.

    ``quantize_after`` designs ``F_BB`` against ``f_rf`` as given and only
    then quantizes the analog phases to that many bits, so the power
    constraint holds exactly only where the quantized Gram matrix is unchanged.
    """
    f_bb = baseband_precoder(channel, f_rf, ns, noise_variance, **kwargs)
    if quantize_after is not None:
        f_rf = quantize_phases(f_rf, quantize_after)
    return HybridPrecoder(f_rf=f_rf, mask=mask, f_bb=f_bb)


def fully_digital_precoder(channel, ns: int, noise_variance: float = 1.0, **kwargs) -> HybridPrecoder:
    """Optimal unconstrained precoder expressed with an identity analog stage."""
    nt = _freq(channel).shape[2]
    eye = np.eye(nt, dtype=complex)
    return hybrid_precoder(channel, eye, np.eye(nt, dtype=bool), ns, noise_variance, **kwargs)


def unitary_objective(fopt: FullyDigitalPrecoders, f_rf: np.ndarray) -> float:
    """``sum_k ||F_opt^H[k] F_RF (F_RF^H F_RF)^(-1/2)||_F^2``."""
    f_bar = f_rf @ inverse_sqrt_gram(f_rf)
    return float(np.sum(np.abs(np.conj(np.swapaxes(fopt.f_opt, 1, 2)) @ f_bar) ** 2))
