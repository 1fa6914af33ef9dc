"""Threshold and expected switching time over a grid of ban intensities and incentives."""

import argparse

import numpy as np

from evswitch.config import build_config
from evswitch.mc import policy_surface


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-paths", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=20190320)
    ap.add_argument("--out", default="policy_surface.csv")
    args = ap.parse_args()
    cfg = build_config(overrides={"n_paths": args.n_paths, "seed": args.seed})
    surf = policy_surface(
        cfg.ou, cfg.cost, np.linspace(0, 12, 13), np.linspace(0, 6000, 13), cfg.mc
    )
    with open(args.out, "w") as fh:
        fh.write(surf.to_csv(f"config_hash={cfg.config_hash()} seed={cfg.mc.seed}"))
    tau = surf.mean_tau
    print(f"E[tau](0, 0) = {tau[0, 0]:.2f} years, surface max = {tau.max():.2f}")
    print(f"E[tau](12, 6000) = {tau[-1, -1]:.3f} years")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
