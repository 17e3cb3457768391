"""Antenna grouping for dynamic subarrays.

The grouping objective is ``sum_r lambda_max(R_F[S_r, S_r])`` where
``R_F = F F^H`` and ``F`` stacks the optimal fully-digital precoders of all
subcarriers. Shared-AHC approximates its maximizer by bottom-up clustering
on the mutual-correlation metric; exhaustive search gives the optimum for
small arrays.
"""

from __future__ import annotations

from math import comb, factorial
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .config import ConfigError
from .precoder import FullyDigitalPrecoders, Grouping, stacked_precoders

__all__ = [
    "correlation_matrix",
    "minkowski_lambda_estimate",
    "mutual_correlation",
    "exact_objective",
    "minkowski_objective",
    "shared_ahc",
    "greedy_grouping",
    "partition_count",
    "iter_partitions",
    "exhaustive_grouping",
    "random_partition",
    "BudgetExceeded",
]


class BudgetExceeded(RuntimeError):
    """Exhaustive search refused because the partition count is too large."""


def correlation_matrix(fopt: FullyDigitalPrecoders) -> np.ndarray:
    """``R_F = sum_k F_opt[k] F_opt[k]^H`` (Hermitian PSD, trace ``K * Ns``)."""
    F = stacked_precoders(fopt)
    R = F @ F.conj().T
    return 0.5 * (R + R.conj().T)


def minkowski_lambda_estimate(rF: np.ndarray, subset: Sequence[int]) -> float:
    """Mean-absolute-row-sum estimate of ``lambda_max(R_F[S, S])``."""
    if len(subset) == 0:
        raise ConfigError("subset must be nonempty")
    idx = list(subset)
    return float(np.abs(rF[np.ix_(idx, idx)]).sum() / len(idx))


def mutual_correlation(rF: np.ndarray, set_a: Sequence[int], set_b: Sequence[int]) -> float:
    """Average ``|R_F[i, j]|`` over ``i`` in A and ``j`` in B."""
    if len(set_a) == 0 or len(set_b) == 0:
        raise ConfigError("clusters must be nonempty")
    if set(set_a) & set(set_b):
        raise ConfigError("mutual correlation is defined for disjoint clusters only")
    a, b = list(set_a), list(set_b)
    return float(np.abs(rF[np.ix_(a, b)]).sum() / (len(a) * len(b)))


def exact_objective(rF: np.ndarray, grouping) -> float:
    total = 0.0
    for s in grouping:
        idx = list(s)
        total += np.linalg.eigvalsh(rF[np.ix_(idx, idx)])[-1]
    return float(total)


def minkowski_objective(rF: np.ndarray, grouping) -> float:
    return float(sum(minkowski_lambda_estimate(rF, s) for s in grouping))


def _g_matrix(abs_r: np.ndarray, clusters: List[List[int]]) -> np.ndarray:
    ind = np.zeros((len(clusters), abs_r.shape[0]))
    for c, members in enumerate(clusters):
        ind[c, members] = 1.0
    sizes = ind.sum(axis=1)
    return (ind @ abs_r @ ind.T) / np.outer(sizes, sizes)


def shared_ahc(rF: np.ndarray, nt: int, nt_rf: int) -> Grouping:
    """Shared agglomerative hierarchical clustering of the transmit antennas.

    Each pass works on a snapshot of the clusters: cluster ``i`` is merged
    with ``j = argmax_{l > i} g(i, l)`` only when ``i`` is in turn the best
    partner of ``j`` among all other clusters. A pass that would leave fewer
    than ``nt_rf`` clusters is discarded; the surplus is then removed by
    folding the smallest clusters into their best-correlated partner among
    the ``nt_rf`` largest. Argmax ties resolve to the lowest index.
    """
    if not 1 <= nt_rf <= nt:
        raise ConfigError(f"need 1 <= nt_rf <= nt, got nt_rf={nt_rf}, nt={nt}")
    abs_r = np.abs(np.asarray(rF))[:nt, :nt]
    clusters: List[List[int]] = [[i] for i in range(nt)]

    while len(clusters) > nt_rf:
        snapshot = clusters
        n = len(snapshot)
        g = _g_matrix(abs_r, snapshot)
        absorbed = set()
        merged: List[List[int]] = []
        for i in range(n):
            if i in absorbed:
                continue
            if i == n - 1:
                merged.append(snapshot[i])
                continue
            j = i + 1 + int(np.argmax(g[i, i + 1:]))
            row = g[j].copy()
            row[j] = -np.inf
            if int(np.argmax(row)) == i and j not in absorbed:
                merged.append(snapshot[i] + snapshot[j])
                absorbed.add(j)
            else:
                merged.append(snapshot[i])
        if len(merged) < nt_rf:
            break
        if len(merged) == n:
            # all-tie stall: merge the single most correlated pair instead
            masked = np.where(np.triu(np.ones((n, n), dtype=bool), 1), g, -np.inf)
            a, b = np.unravel_index(int(np.argmax(masked)), masked.shape)
            merged = [c for k, c in enumerate(snapshot) if k != b]
            merged[a] = snapshot[a] + snapshot[b]
        clusters = merged

    if len(clusters) > nt_rf:
        surplus = len(clusters) - nt_rf
        ordered = sorted(clusters, key=len)
        small, big = ordered[:surplus], [list(c) for c in ordered[surplus:]]
        for c in small:
            scores = [np.abs(abs_r[np.ix_(c, b)]).sum() / (len(c) * len(b)) for b in big]
            big[int(np.argmax(scores))].extend(c)
        clusters = big

    return Grouping.of(clusters)


def greedy_grouping(rF: np.ndarray, nt: int, nt_rf: int) -> Grouping:
    """Greedy grouping used as the covariance-EVD style reference.

    Seeds one cluster per chain with the antennas of largest ``|R_F[i, i]|``
    (equal diagonals prefer the antenna least correlated with the seeds
    already chosen), then assigns the rest in descending diagonal order to
    the cluster whose Minkowski estimate grows the most.
    """
    if not 1 <= nt_rf <= nt:
        raise ConfigError(f"need 1 <= nt_rf <= nt, got nt_rf={nt_rf}, nt={nt}")
    abs_r = np.abs(np.asarray(rF))[:nt, :nt]
    diag = np.diag(abs_r)
    scale = max(diag.max(), np.finfo(float).tiny)

    seeds: List[int] = []
    remaining = list(range(nt))
    for _ in range(nt_rf):
        top = max(diag[remaining])
        cands = [i for i in remaining if diag[i] >= top - 1e-12 * scale]
        if seeds:
            cands.sort(key=lambda i: (abs_r[i, seeds].max(), i))
        seeds.append(cands[0])
        remaining.remove(cands[0])

    clusters = [[s] for s in seeds]
    est = [float(diag[s]) for s in seeds]
    for a in sorted(remaining, key=lambda i: (-diag[i], i)):
        gains = []
        for c, members in enumerate(clusters):
            idx = members + [a]
            gains.append(abs_r[np.ix_(idx, idx)].sum() / len(idx) - est[c])
        best = int(np.argmax(gains))
        clusters[best].append(a)
        est[best] += gains[best]
    return Grouping.of(clusters)


def partition_count(nt: int, nt_rf: int) -> int:
    """Number of ways to split ``nt`` antennas into ``nt_rf`` nonempty groups."""
    if not 0 <= nt_rf <= nt:
        raise ConfigError(f"need 0 <= nt_rf <= nt, got nt_rf={nt_rf}, nt={nt}")
    total = sum((-1) ** (nt_rf - n) * comb(nt_rf, n) * n ** nt for n in range(nt_rf + 1))
    return total // factorial(nt_rf)


def iter_partitions(nt: int, k: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """All partitions of ``range(nt)`` into exactly ``k`` blocks.

    Generated as restricted growth strings, i.e. lexicographic in the block
    label of each antenna.
    """
    labels = [0] * nt

    def rec(pos: int, used: int):
        if nt - pos < k - used:
            return
        if pos == nt:
            blocks: List[List[int]] = [[] for _ in range(k)]
            for i, lab in enumerate(labels):
                blocks[lab].append(i)
            yield tuple(tuple(b) for b in blocks)
            return
        for lab in range(min(used + 1, k)):
            labels[pos] = lab
            yield from rec(pos + 1, max(used, lab + 1))

    if nt == 0 or k == 0:
        if nt == k:
            yield ()
        return
    yield from rec(0, 0)


def exhaustive_grouping(source, nt: int, nt_rf: int, objective: str = "exact",
                        budget: int = 10 ** 6) -> Tuple[Grouping, float]:
    """Optimal grouping by enumerating every partition.

    ``source`` is ``R_F`` or a :class:`FullyDigitalPrecoders`. ``objective`` is
    ``"exact"`` (sum of leading eigenvalues) or ``"minkowski"``.
    """
    count = partition_count(nt, nt_rf)
    if count > budget:
        raise BudgetExceeded(f"{count} partitions exceed the search budget of {budget}")
    rF = correlation_matrix(source) if isinstance(source, FullyDigitalPrecoders) else np.asarray(source)
    if objective == "exact":
        score = exact_objective
    elif objective == "minkowski":
        score = minkowski_objective
    else:
        raise ConfigError(f"unknown objective {objective!r}")
    best, best_val = None, -np.inf
    for part in iter_partitions(nt, nt_rf):
        val = score(rF, part)
        if val > best_val:
            best, best_val = part, val
    return Grouping.of(best), float(best_val)


def random_partition(nt: int, nt_rf: int, rng: Optional[np.random.Generator] = None) -> Grouping:
    """Uniform sample from the partitions of ``range(nt)`` into ``nt_rf`` blocks."""
    rng = np.random.default_rng() if rng is None else rng
    while True:
        labels = rng.integers(0, nt_rf, size=nt)
        if len(np.unique(labels)) == nt_rf:
            return Grouping.of([np.flatnonzero(labels == r).tolist() for r in range(nt_rf)])
