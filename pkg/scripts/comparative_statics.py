"""Sensitivities of the switching threshold and the volatility sweep."""

import numpy as np

from evswitch.config import build_config
from evswitch.sensitivity import Param, dxstar, sigma_monotonicity_check
from evswitch.solver import solve


def main():
    cfg = build_config()
    sol = solve(cfg.cost, cfg.ou)
    print(f"x* = {sol.x_star:.6f}")
    print(f"{'param':>8} {'dx*/dy':>14} {'fd check':>14} {'rel gap':>10}")
    for p in Param:
        r = dxstar(p, cfg.cost, cfg.ou, sol)
        print(f"{p.value:>8} {r.derivative:>14.6e} {r.fd_check:>14.6e} {r.rel_gap:>10.2e}")
    grid = np.linspace(0.05, 0.13, 5)
    ok, xs = sigma_monotonicity_check(cfg.cost, cfg.ou, grid)
    for s, x in zip(grid, xs):
        print(f"sigma = {s:.3f}  x* = {x:.6f}")
    print("x* increasing in sigma:", ok)


if __name__ == "__main__":
    main()
