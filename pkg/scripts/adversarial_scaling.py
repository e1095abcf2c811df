"""Mean regret against the horizon on the cyclic mean-switch environment, for all three policies.

    python3 scripts/adversarial_scaling.py --seeds 20 --horizons 5000 10000 20000 40000
"""
import argparse

import numpy as np

from graphbobw.environments import AdversarialEnv
from graphbobw.graph import make_graph
from graphbobw.harness import RunConfig, run_replicated


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizons", type=int, nargs="+", default=[5_000, 10_000, 20_000, 40_000])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--base-means", type=float, nargs="+", default=[0.9, 0.7, 0.5, 0.3, 0.1])
    ap.add_argument("--periods", type=int, default=10, help="number of switches over the horizon")
    ap.add_argument("--policies", nargs="+", default=["bobw", "exp3g", "uniform"])
    args = ap.parse_args()

    K = len(args.base_means)
    g = make_graph("bar_augmented", K)
    print(f"{'policy':>8} {'T':>7} {'mean':>9} {'std':>8} {'Reg/T':>8} {'detected':>8}")
    for pol in args.policies:
        for T in args.horizons:
            env = AdversarialEnv("mean_switch", base_means=tuple(args.base_means),
                                 switch_period=max(1, T // args.periods))
            agg = run_replicated(RunConfig(g, env, T, policy=pol, trace_stride=T), args.seeds)
            det = sum(r.detect_round is not None for r in agg.runs)
            print(f"{pol:>8} {T:>7} {agg.mean_final:>9.2f} {np.std(agg.final_regrets, ddof=1):>8.2f} "
                  f"{agg.mean_final / T:>8.5f} {det:>8}")


if __name__ == "__main__":
    main()
