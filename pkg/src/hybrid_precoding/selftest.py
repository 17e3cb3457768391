"""Numerical identity checks on small random instances."""

from __future__ import annotations

from typing import List, NamedTuple

import numpy as np

from . import grouping as grp, precoder as pc
from .channel import generate_channel
from .config import SystemConfig


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def _instances(n: int, seed: int):
    cfg = SystemConfig(nt_v=4, nt_h=2, nr_v=2, nr_h=1, nt_rf=2, ns=2, K=16, D=4,
                       n_cl=3, n_ray=4)
    for i in range(n):
        yield cfg, generate_channel(cfg, seed + i)


def run_selftest(n_instances: int = 20, seed: int = 1234) -> List[Check]:
    """DFT-energy, power-constraint, water-filling and objective-consistency checks."""
    worst = dict(dft=0.0, power=0.0, wf=0.0, objective=0.0)
    rng = np.random.default_rng(seed)
    for cfg, ch in _instances(n_instances, seed):
        e_taps = np.sum(np.abs(ch.taps) ** 2)
        e_freq = np.sum(np.abs(ch.freq) ** 2)
        worst["dft"] = max(worst["dft"], abs(e_freq - cfg.K * e_taps) / (cfg.K * e_taps))

        fopt = pc.optimal_fully_digital(ch, cfg.ns)
        for g in (None, pc.fs_pattern("vertical", cfg.nt_v, cfg.nt_h, cfg.nt_rf)):
            f_rf, mask = pc.pca_analog_precoder(fopt, g, None, cfg.nt_rf)
            prec = pc.hybrid_precoder(ch, f_rf, mask, cfg.ns, 1.0)
            target = cfg.K * cfg.ns
            worst["power"] = max(worst["power"], abs(prec.total_power() - target) / target)

        sig = np.abs(rng.standard_normal((cfg.K, cfg.ns))) * 3
        _, alloc = pc.water_filling(sig)
        worst["wf"] = max(worst["wf"], abs(alloc.sum() - cfg.K * cfg.ns) / (cfg.K * cfg.ns))

        rF = grp.correlation_matrix(fopt)
        g = grp.random_partition(cfg.nt, cfg.nt_rf, rng)
        via_r = grp.exact_objective(rF, g)
        via_f = sum(np.linalg.svd(pc.stacked_precoders(fopt, s), compute_uv=False)[0] ** 2 for s in g)
        worst["objective"] = max(worst["objective"], abs(via_r - via_f) / via_f)

    return [
        Check("channel DFT energy identity", worst["dft"] <= 1e-8, f"max rel err {worst['dft']:.3e}"),
        Check("precoder power constraint", worst["power"] <= 1e-6, f"max rel err {worst['power']:.3e}"),
        Check("water-filling budget residual", worst["wf"] <= 1e-9, f"max rel err {worst['wf']:.3e}"),
        Check("grouping objective consistency", worst["objective"] <= 1e-9,
              f"max rel err {worst['objective']:.3e}"),
    ]
