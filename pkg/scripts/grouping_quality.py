"""Shared-AHC against exhaustive search, greedy grouping and random partitions on an 8-antenna array."""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hybrid_precoding import SystemConfig  # noqa: E402
from hybrid_precoding.channel import generate_channel  # noqa: E402
from hybrid_precoding.grouping import (  # noqa: E402
    correlation_matrix, exact_objective, exhaustive_grouping, greedy_grouping, random_partition, shared_ahc)
from hybrid_precoding.precoder import optimal_fully_digital  # noqa: E402

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--random", type=int, default=50, help="random partitions per instance")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    cfg = SystemConfig(nt_v=4, nt_h=2, nt_rf=2, ns=2, K=16, D=16)
    rng = np.random.default_rng(args.seed)
    ratio, greedy_ratio, wins = [], [], 0
    for i in range(args.instances):
        rF = correlation_matrix(optimal_fully_digital(generate_channel(cfg, args.seed + i), cfg.ns))
        _, best = exhaustive_grouping(rF, cfg.nt, cfg.nt_rf)
        ahc = exact_objective(rF, shared_ahc(rF, cfg.nt, cfg.nt_rf))
        greedy = exact_objective(rF, greedy_grouping(rF, cfg.nt, cfg.nt_rf))
        rand = np.mean([exact_objective(rF, random_partition(cfg.nt, cfg.nt_rf, rng)) for _ in range(args.random)])
        ratio.append(ahc / best)
        greedy_ratio.append(greedy / best)
        wins += ahc >= rand
    print(f"shared-AHC / optimum: mean {np.mean(ratio):.4f}, min {np.min(ratio):.4f}")
    print(f"greedy / optimum:     mean {np.mean(greedy_ratio):.4f}, min {np.min(greedy_ratio):.4f}")
    print(f"shared-AHC >= random-partition mean in {wins}/{args.instances} instances")
