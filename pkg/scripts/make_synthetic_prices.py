"""Generate the shipped synthetic monthly price fixture.

The opportunity cost follows the exact monthly discretisation of an OU process
with the default parameters.  Electricity prices wander slowly around
0.20 EUR/kWh and fuel prices are backed out so that
fuel * h_f - electricity * h_e equals the simulated opportunity cost.
"""

import argparse
import math

import numpy as np

from evswitch.calibration import FuelEconomy, PriceSeries, write_price_csv
from evswitch.diffusion import OUParams


def month_labels(start_year: int, start_month: int, n: int) -> list[str]:
    out = []
    y, m = start_year, start_month
    for _ in range(n):
        out.append(f"{y:04d}-{m:02d}")
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return out


def simulate_opportunity_cost(ou: OUParams, n: int, rng: np.random.Generator, dt: float = 1 / 12):
    phi = math.exp(-ou.b * dt)
    sd = ou.sigma * math.sqrt((1 - phi * phi) / (2 * ou.b))
    x = np.empty(n)
    x[0] = ou.mean_level + ou.stationary_std * rng.standard_normal()
    for t in range(1, n):
        x[t] = ou.mean_level + phi * (x[t - 1] - ou.mean_level) + sd * rng.standard_normal()
    return x


def make_series(ou: OUParams, fe: FuelEconomy, n: int, seed: int) -> PriceSeries:
    rng = np.random.default_rng(seed)
    x = simulate_opportunity_cost(ou, n, rng)
    elec = 0.20 + 0.01 * np.cumsum(rng.standard_normal(n)) / math.sqrt(n)
    fuel = (x + elec * fe.h_e) / fe.h_f
    return PriceSeries(tuple(month_labels(2010, 7, n)), np.round(fuel, 6), np.round(elec, 6))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/synthetic_prices.csv")
    ap.add_argument("--seed", type=int, default=20190320)
    ap.add_argument("--n", type=int, default=102)
    args = ap.parse_args()
    ou = OUParams.from_mean_level(0.1045, 0.5941, 0.090)
    write_price_csv(make_series(ou, FuelEconomy(), args.n, args.seed), args.out)
    print(f"wrote {args.n} months to {args.out}")


if __name__ == "__main__":
    main()
