"""Independent stochastic verification of coefficient-based moments.

Two routes: sampling the truncated expansion directly from Gaussian draws,
and simulating the SDE with the Euler scheme on a uniform grid.  Both rely
on counter-based substreams (Philox keyed by seed/stream, one counter block
per fixed-size path chunk), so identical ``RngSpec`` inputs reproduce
bit-identical statistics no matter how many worker threads run the chunks.
Normal variates come from the inverse CDF applied to open-interval
uniforms, keeping the draw sequence platform-independent; rejection-based
samplers are avoided on purpose.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .basis import BasisSpec, antiderivative_grid, kl_partial_grid
from .hermite import hermite_table
from .propagator import ChaosSolution, SdeModel

CHUNK = 1 << 16  # paths per substream; fixed so results never depend on threading


@dataclass(frozen=True)
class RngSpec:
    """Seed and stream id selecting a reproducible family of substreams."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= self.stream < 2 ** 64:
            raise ValueError("stream must fit in 64 bits")


def _chunk_generator(rng: RngSpec, chunk_index: int) -> np.random.Generator:
    key = rng.seed + (rng.stream << 64)
    counter = chunk_index << 128
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def normal_draws(gen: np.random.Generator, shape) -> np.ndarray:
    """Standard normals via inverse CDF of 53-bit open-interval uniforms."""
    v = gen.integers(0, 1 << 53, size=shape, dtype=np.uint64)
    u = (v.astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(u)


def _thread_count() -> int:
    env = os.environ.get("CHAOS_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(os.cpu_count() or 1, 8))


def _map_chunks(worker, n_paths: int):
    """Run ``worker(chunk_index, size)`` over all path chunks.

    Results are reduced in chunk order regardless of completion order, so
    the reduction is deterministic under any thread count.
    """
    sizes = [(i, min(CHUNK, n_paths - i * CHUNK))
             for i in range((n_paths + CHUNK - 1) // CHUNK)]
    threads = _thread_count()
    if threads == 1 or len(sizes) == 1:
        return [worker(i, s) for i, s in sizes]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, i, s) for i, s in sizes]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class SampleStats:
    """Monte Carlo summary with standard errors.

    ``third`` is the raw third moment E[X^3]; the variance standard error
    uses the fourth-moment formula  se = sqrt((m4 - m2^2) / n).
    """

    n: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    third: float
    third_se: float


def _stats_from_power_sums(n: int, s: np.ndarray) -> SampleStats:
    mean = s[0] / n
    raw = s / n
    m2 = max(raw[1] - mean ** 2, 0.0)
    # central fourth moment from raw moments
    m4 = raw[3] - 4 * mean * raw[2] + 6 * mean ** 2 * raw[1] - 3 * mean ** 4
    var_se = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    third = raw[2]
    third_se = math.sqrt(max(raw[5] - third * third, 0.0) / n)
    return SampleStats(n=n, mean=mean, mean_se=math.sqrt(m2 / n),
                       variance=m2, variance_se=var_se,
                       third=third, third_se=third_se)


def _power_sums(values: np.ndarray) -> np.ndarray:
    out = np.empty(6)
    acc = values
    for m in range(6):
        out[m] = acc.sum()
        if m < 5:
            acc = acc * values
    return out


def sample_expansion(sol: ChaosSolution, t: float, n_paths: int,
                     rng: RngSpec) -> SampleStats:
    """Sample the truncated expansion at a grid time.

    Each path draws k independent standard normals, evaluates every basis
    functional through a shared Hermite value table, and contracts with the
    coefficient vector at ``t``.
    """
    row = sol.coeffs[sol.grid_position(t)]
    indices = sol.index_set
    k = indices.k
    p_max = indices.max_order

    def worker(chunk_index: int, size: int) -> np.ndarray:
        gen = _chunk_generator(rng, chunk_index)
        xi = normal_draws(gen, (size, k))
        table = hermite_table(p_max, xi)  # (p+1, size, k)
        values = np.zeros(size)
        for n_ord, alpha in enumerate(indices):
            coeff = row[n_ord]
            if coeff == 0.0:
                continue
            term = np.full(size, coeff)
            for coord, a in alpha:
                term = term * table[a, :, coord - 1]
            values += term
        return _power_sums(values)

    partials = _map_chunks(worker, n_paths)
    total = np.zeros(6)
    for part in partials:
        total += part
    return _stats_from_power_sums(n_paths, total)


def euler_maruyama(model: SdeModel, n_steps: int, n_paths: int, rng: RngSpec,
                   t_end: float = 1.0) -> SampleStats:
    """Euler scheme on the uniform n-step grid, statistics at ``t_end``.

    Per step the coefficients are frozen at the left grid point:
    X <- X + b(t_i, X) dt + sigma(t_i, X) sqrt(dt) Z.
    """
    dt = t_end / n_steps
    sqrt_dt = math.sqrt(dt)
    drift_vals = [model.drift_at(i * dt) for i in range(n_steps)]
    diff_vals = [model.diffusion_at(i * dt) for i in range(n_steps)]

    def worker(chunk_index: int, size: int) -> np.ndarray:
        gen = _chunk_generator(rng, chunk_index)
        x = np.full(size, float(model.x0))
        for i in range(n_steps):
            b0, b1, b2 = drift_vals[i]
            g0, g1, g2 = diff_vals[i]
            z = normal_draws(gen, size)
            drift = b0 + b1 * x
            diff = g0 + g1 * x
            if b2 != 0.0 or g2 != 0.0:
                x_sq = x * x
                drift = drift + b2 * x_sq
                diff = diff + g2 * x_sq
            x = x + drift * dt + diff * (sqrt_dt * z)
        return _power_sums(x)

    partials = _map_chunks(worker, n_paths)
    total = np.zeros(6)
    for part in partials:
        total += part
    return _stats_from_power_sums(n_paths, total)


def kl_path_check(basis: BasisSpec, k: int, t_grid, n_paths: int,
                  rng: RngSpec) -> float:
    """Worst standardized deviation of the sampled partial-sum variance.

    Samples sum_{l<=k} E_l(t) xi_l over the grid and compares its sample
    variance against kl_partial(k, t); the return value is the largest
    |deviation| / se over the grid.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    E = antiderivative_grid(basis, k, t_grid)  # (G, k)
    target = kl_partial_grid(basis, k, t_grid)

    def worker(chunk_index: int, size: int) -> np.ndarray:
        gen = _chunk_generator(rng, chunk_index)
        xi = normal_draws(gen, (size, k))
        paths = xi @ E.T  # (size, G)
        return np.stack([paths.sum(axis=0), (paths ** 2).sum(axis=0),
                         (paths ** 4).sum(axis=0)])

    partials = _map_chunks(worker, n_paths)
    total = np.zeros((3, len(t_grid)))
    for part in partials:
        total += part
    mean = total[0] / n_paths
    m2 = np.maximum(total[1] / n_paths - mean ** 2, 0.0)
    # the process is centered, so the raw fourth moment is the central one
    m4 = total[2] / n_paths
    se = np.sqrt(np.maximum(m4 - m2 * m2, 1e-300) / n_paths)
    dev = np.abs(m2 - target)
    return float(np.max(np.where(dev == 0.0, 0.0, dev / se)))
