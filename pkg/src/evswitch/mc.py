"""Seeded Monte Carlo for first-passage times of the OU opportunity cost.

Paths are sampled from the exact Gaussian transition of the OU process.
Path ``i`` draws its normals from a Philox counter-based stream keyed by
``(seed, i)``, so its trajectory does not depend on how paths are batched
or on how many worker threads run.  Per-path results are stored by index
and reduced in index order.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .diffusion import OUParams
from .errors import DomainError
from .solver import Case, CostParams, solve

__all__ = [
    "McConfig",
    "McEstimate",
    "PolicySurface",
    "simulate_ou_step",
    "simulate_paths",
    "first_passage_times",
    "hitting_time",
    "summarize",
    "expected_switch_time",
    "policy_surface",
    "laplace_mc",
    "thread_count",
    "SURFACE_COLUMNS",
]

SURFACE_COLUMNS = ("lambda", "k", "x_star", "mean_tau", "std_error", "censored_fraction")

_BLOCK = 1024  # time steps drawn per path per block
_CHUNK = 256  # paths per work unit
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 10_000
    dt: float = 1.0 / 360.0
    t_max: float = 100.0
    seed: int = 20190320
    x0: float = 0.02

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if not self.t_max >= self.dt:
            raise DomainError("t_max must be at least dt")
        if not 0 <= int(self.seed) <= _MASK64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if not math.isfinite(self.x0):
            raise DomainError("x0 must be finite")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class McEstimate:
    mean_tau: float
    std_error: float
    censored_fraction: float
    n_paths: int

    def as_dict(self) -> dict:
        return {
            "mean_tau": self.mean_tau,
            "std_error": self.std_error,
            "censored_fraction": self.censored_fraction,
            "n_paths": self.n_paths,
        }


@dataclass(frozen=True)
class PolicySurface:
    lambda_grid: np.ndarray
    k_grid: np.ndarray
    x_star_matrix: np.ndarray
    tau_matrix: tuple  # tuple of tuples of McEstimate, indexed [lambda][k]

    @property
    def mean_tau(self) -> np.ndarray:
        return np.array([[e.mean_tau for e in row] for row in self.tau_matrix])

    def rows(self):
        for i, lam in enumerate(self.lambda_grid):
            for j, k in enumerate(self.k_grid):
                e = self.tau_matrix[i][j]
                yield (float(lam), float(k), float(self.x_star_matrix[i, j]),
                       e.mean_tau, e.std_error, e.censored_fraction)

    def to_csv(self, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SURFACE_COLUMNS)
        for row in self.rows():
            w.writerow([repr(v) for v in row])
        return buf.getvalue()


def thread_count() -> int:
    """Worker threads for path simulation, capped by EVSWITCH_THREADS."""
    default = min(4, os.cpu_count() or 1)
    raw = os.environ.get("EVSWITCH_THREADS")
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"EVSWITCH_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def simulate_ou_step(ou: OUParams, x, dt: float, z):
    """Exact one-step OU transition driven by a standard normal draw z."""
    decay = math.exp(-ou.b * dt)
    sd = ou.sigma * math.sqrt(-math.expm1(-2.0 * ou.b * dt) / (2.0 * ou.b))
    m = ou.mean_level
    return m + (x - m) * decay + sd * z


def _path_rng(seed: int, index: int) -> np.random.Generator:
    key = np.array([int(seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_paths(ou: OUParams, x0: float, dt: float, n_steps: int, seed: int, indices) -> np.ndarray:
    """Full trajectories (len(indices), n_steps + 1), column 0 holding x0.

    Uses the same per-path streams as the first-passage engine, so a path
    returned here is the path the engine monitors.
    """
    indices = np.asarray(indices, dtype=np.int64)
    decay = math.exp(-ou.b * dt)
    sd = ou.sigma * math.sqrt(-math.expm1(-2.0 * ou.b * dt) / (2.0 * ou.b))
    m = ou.mean_level
    n_blocks = -(-n_steps // _BLOCK)
    z = np.empty((indices.size, n_blocks * _BLOCK))
    for r, i in enumerate(indices):
        g = _path_rng(seed, i)
        for blk in range(n_blocks):
            z[r, blk * _BLOCK:(blk + 1) * _BLOCK] = g.standard_normal(_BLOCK)
    z = z[:, :n_steps]
    zi = np.full((indices.size, 1), decay * (x0 - m))
    dev, _ = signal.lfilter([1.0], [1.0, -decay], sd * z, axis=1, zi=zi)
    out = np.empty((indices.size, n_steps + 1))
    out[:, 0] = x0
    out[:, 1:] = dev + m
    return out


def _chunk_passage(
    ou: OUParams,
    x0: float,
    thresholds: np.ndarray,
    dt: float,
    n_steps: int,
    seed: int,
    indices: np.ndarray,
    bridge: bool,
    observe_every: int,
) -> np.ndarray:
    """First-passage times for one batch of paths; thresholds sorted ascending.

    Returns (len(indices), len(thresholds)) with np.inf for censored paths.
    """
    n_paths, n_thr = indices.size, thresholds.size
    out = np.full((n_paths, n_thr), np.inf)
    immediate = thresholds <= x0
    out[:, immediate] = 0.0
    first_open = int(np.count_nonzero(immediate))
    if first_open == n_thr:
        return out

    decay = math.exp(-ou.b * dt)
    sd = ou.sigma * math.sqrt(-math.expm1(-2.0 * ou.b * dt) / (2.0 * ou.b))
    m = ou.mean_level
    bridge_scale = 2.0 / (ou.sigma**2 * dt)

    gens = [_path_rng(seed, i) for i in indices]
    dev = np.full(n_paths, x0 - m)  # current deviation from the mean
    run_max = np.full(n_paths, x0)
    resolved = np.full(n_paths, first_open)  # thresholds below this index already hit
    active = np.arange(n_paths)
    n0 = 0
    while active.size and n0 < n_steps:
        length = min(_BLOCK, n_steps - n0)
        z = np.empty((active.size, _BLOCK))
        u = np.empty((active.size, _BLOCK)) if bridge else None
        for r, p in enumerate(active):
            z[r] = gens[p].standard_normal(_BLOCK)
            if bridge:
                u[r] = gens[p].random(_BLOCK)
        z = z[:, :length]
        path, _ = signal.lfilter(
            [1.0], [1.0, -decay], sd * z, axis=1, zi=(decay * dev[active])[:, None]
        )
        start_dev = dev[active]
        dev[active] = path[:, -1]
        path += m

        if bridge:
            prev = np.concatenate([(start_dev + m)[:, None], path[:, :-1]], axis=1)
            u = u[:, :length]
            for r, p in enumerate(active):
                j = resolved[p]
                while j < n_thr:
                    y = thresholds[j]
                    gap = (y - prev[r]) * (y - path[r])
                    crossed = (path[r] >= y) | (u[r] < np.exp(-bridge_scale * np.maximum(gap, 0.0)))
                    hit = np.flatnonzero(crossed)
                    if hit.size == 0:
                        break
                    out[p, j] = (n0 + hit[0] + 0.5) * dt
                    j += 1
                resolved[p] = j
        else:
            if observe_every > 1:
                # positions whose global step number is a multiple of observe_every
                offset = (-n0 - 1) % observe_every
                obs_pos = np.arange(offset, length, observe_every)
                watched = path[:, obs_pos]
            else:
                obs_pos = None
                watched = path
            if watched.shape[1]:
                rmax = np.maximum(np.maximum.accumulate(watched, axis=1), run_max[active][:, None])
                run_max[active] = rmax[:, -1]
                next_thr = thresholds[np.minimum(resolved[active], n_thr - 1)]
                has_new = (resolved[active] < n_thr) & (rmax[:, -1] >= next_thr)
                for r in np.flatnonzero(has_new):
                    p = active[r]
                    j0 = resolved[p]
                    j1 = int(np.searchsorted(thresholds, rmax[r, -1], side="right"))
                    pos = np.searchsorted(rmax[r], thresholds[j0:j1], side="left")
                    steps = (obs_pos[pos] if obs_pos is not None else pos) + n0 + 1
                    out[p, j0:j1] = steps * dt
                    resolved[p] = j1
        n0 += length
        active = active[resolved[active] < n_thr]
    return out


def first_passage_times(
    ou: OUParams,
    x0: float,
    thresholds,
    dt: float,
    t_max: float,
    seed: int,
    n_paths: int,
    bridge: bool = False,
    observe_every: int = 1,
    threads: int | None = None,
) -> np.ndarray:
    """Upward first-passage times, shape (n_paths, len(thresholds)); np.inf when censored.

    Grid mode reports the first grid time n*dt with X >= threshold.  With
    ``bridge=True`` a crossing between grid points is also detected with the
    Brownian-bridge probability, and the time is reported at the step midpoint.
    ``observe_every`` monitors only every k-th grid point of the same paths.
    """
    thr = np.asarray(thresholds, dtype=float).ravel()
    if np.any(np.isnan(thr)):
        raise DomainError("thresholds must not be NaN")
    if int(observe_every) < 1:
        raise DomainError("observe_every must be >= 1")
    if bridge and observe_every != 1:
        raise DomainError("bridge detection monitors every step")
    order = np.argsort(thr, kind="stable")
    thr_sorted = thr[order]
    n_steps = int(round(t_max / dt))
    chunks = [np.arange(s, min(s + _CHUNK, n_paths)) for s in range(0, n_paths, _CHUNK)]

    def work(idx):
        return _chunk_passage(ou, x0, thr_sorted, dt, n_steps, seed, idx, bridge, int(observe_every))

    n_threads = thread_count() if threads is None else max(1, int(threads))
    if n_threads == 1 or len(chunks) == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(work, chunks))
    out_sorted = np.concatenate(parts, axis=0)
    out = np.empty_like(out_sorted)
    out[:, order] = out_sorted
    return out


def hitting_time(ou: OUParams, x_star: float, cfg: McConfig, path_index: int) -> float | None:
    """First grid time path ``path_index`` reaches x_star; None when censored."""
    if x_star == -math.inf or cfg.x0 >= x_star:
        return 0.0
    tau = _chunk_passage(
        ou, cfg.x0, np.array([float(x_star)]), cfg.dt, cfg.n_steps, cfg.seed,
        np.array([int(path_index)]), False, 1,
    )
    t = float(tau[0, 0])
    return None if math.isinf(t) else t


def summarize(taus, t_max: float) -> McEstimate:
    """Mean switching time with censored paths counted at t_max."""
    taus = np.asarray(taus, dtype=float)
    n = taus.size
    censored = np.isinf(taus)
    vals = np.where(censored, t_max, taus)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean, se, float(np.count_nonzero(censored)) / n, n)


def _threshold_for(cost: CostParams, ou: OUParams) -> float:
    sol = solve(cost, ou)
    if sol.case is Case.NEVER_SWITCH:
        raise DomainError("switching is never optimal: the expected switching time is infinite")
    return sol.x_star


def expected_switch_time(
    ou: OUParams, cost: CostParams, cfg: McConfig, threads: int | None = None
) -> McEstimate:
    x_star = _threshold_for(cost, ou)
    taus = first_passage_times(
        ou, cfg.x0, [x_star], cfg.dt, cfg.t_max, cfg.seed, cfg.n_paths, threads=threads
    )[:, 0]
    return summarize(taus, cfg.t_max)


def policy_surface(
    ou: OUParams,
    cost_template: CostParams,
    lambda_grid,
    k_grid,
    cfg: McConfig,
    threads: int | None = None,
) -> PolicySurface:
    """x* and E[tau*] over a (lambda, k) grid, reusing one set of simulated paths."""
    lam = np.asarray(lambda_grid, dtype=float)
    ks = np.asarray(k_grid, dtype=float)
    if lam.ndim != 1 or ks.ndim != 1 or lam.size == 0 or ks.size == 0:
        raise DomainError("lambda and k grids must be non-empty 1-d sequences")
    if np.any(np.diff(lam) <= 0) or np.any(np.diff(ks) <= 0):
        raise DomainError("grids must be strictly ascending")
    xs = np.empty((lam.size, ks.size))
    for i, l_ in enumerate(lam):
        for j, k_ in enumerate(ks):
            xs[i, j] = _threshold_for(cost_template.replace(lam=float(l_), incentive=float(k_)), ou)
    taus = first_passage_times(
        ou, cfg.x0, xs.ravel(), cfg.dt, cfg.t_max, cfg.seed, cfg.n_paths, threads=threads
    )
    ests = [summarize(taus[:, c], cfg.t_max) for c in range(taus.shape[1])]
    tau_matrix = tuple(tuple(ests[i * ks.size:(i + 1) * ks.size]) for i in range(lam.size))
    return PolicySurface(lam, ks, xs, tau_matrix)


def laplace_mc(
    ou: OUParams,
    rho: float,
    x0: float,
    targets,
    n_paths: int,
    dt: float,
    t_max: float,
    seed: int,
    bridge: bool = True,
    threads: int | None = None,
) -> list[tuple[float, float]]:
    """Monte Carlo (mean, standard error) of E_x0[exp(-rho tau_y)] per target y.

    Censored paths contribute 0; the resulting bias is at most exp(-rho t_max).
    """
    taus = first_passage_times(ou, x0, targets, dt, t_max, seed, n_paths, bridge=bridge, threads=threads)
    disc = np.where(np.isinf(taus), 0.0, np.exp(-rho * np.where(np.isinf(taus), 0.0, taus)))
    n = taus.shape[0]
    return [
        (float(np.mean(disc[:, j])), float(np.std(disc[:, j], ddof=1) / math.sqrt(n)))
        for j in range(disc.shape[1])
    ]
