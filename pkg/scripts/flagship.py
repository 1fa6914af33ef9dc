"""Expected waiting time before switching, no bans and no incentive, from x0 = 0.02."""

import argparse
import time

from evswitch.config import build_config
from evswitch.mc import expected_switch_time
from evswitch.solver import solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-paths", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=20190320)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    cfg = build_config(overrides={"lambda": 0.0, "incentive": 0.0, "n_paths": args.n_paths, "seed": args.seed})
    sol = solve(cfg.cost, cfg.ou)
    t0 = time.perf_counter()
    est = expected_switch_time(cfg.ou, cfg.cost, cfg.mc, threads=args.threads)
    elapsed = time.perf_counter() - t0
    print(f"x* = {sol.x_star:.6f} EUR/km")
    print(f"E[tau] = {est.mean_tau:.3f} years (SE {est.std_error:.3f}, censored {est.censored_fraction:.4%})")
    print(f"{est.n_paths} paths in {elapsed:.1f} s")


if __name__ == "__main__":
    main()
