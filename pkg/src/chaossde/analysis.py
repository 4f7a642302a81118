"""Moments, error curves, and rate shapes for truncated expansions.

The first two moments of the truncation come directly from the coefficient
vector: the mean is the zero-index coefficient and the second moment is the
sum of squared coefficients (orthonormality of the basis functionals).
Higher moments need expected triple products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, tail_sum
from .errors import NonPositiveValue
from .hermite import product_expansion
from .multiindex import MultiIndex
from .propagator import ChaosSolution


@dataclass(frozen=True)
class ErrorCurve:
    """Absolute variance error over a time grid.

    ``values[m] = |exact_var[m] - approx_var[m]|``; ``error_at_T`` is the
    last value and ``error_max`` the maximum over the grid.
    """

    grid: np.ndarray
    values: np.ndarray
    exact_var: np.ndarray
    approx_var: np.ndarray

    @property
    def error_at_T(self) -> float:
        return float(self.values[-1])

    @property
    def error_max(self) -> float:
        return float(self.values.max())

    @property
    def argmax_time(self) -> float:
        return float(self.grid[int(self.values.argmax())])


def moments(sol: ChaosSolution, t: float) -> tuple[float, float]:
    """Mean and variance of the truncated expansion at a grid time.

    mean = x_0(t); variance = sum of x_a(t)^2 over non-zero indices.
    """
    m = sol.grid_position(t)
    row = sol.coeffs[m]
    zero = sol.index_set.position_of(MultiIndex.zero())
    mean = float(row[zero])
    variance = float(row @ row - mean * mean)
    return mean, max(variance, 0.0)


def moment_curves(sol: ChaosSolution) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance on the whole solution grid."""
    zero = sol.index_set.position_of(MultiIndex.zero())
    means = sol.coeffs[:, zero]
    variances = np.einsum("ij,ij->i", sol.coeffs, sol.coeffs) - means * means
    return means, np.maximum(variances, 0.0)


def third_moment(sol: ChaosSolution, t: float) -> float:
    """E[(X^{p,k}_t)^3] = sum over index triples of x_a x_b x_c E[Psi^a Psi^b Psi^c].

    Computed by expanding products Psi^b Psi^c over the index set, which
    prunes the triple sum to the parity/triangle-feasible terms; adequate
    for the moderate set sizes used in experiments.
    """
    m = sol.grid_position(t)
    x = sol.coeffs[m]
    indices = sol.index_set
    total = 0.0
    for b_ord, beta in enumerate(indices):
        for c_ord in range(b_ord, len(indices)):
            gamma = indices[c_ord]
            mult = 1.0 if b_ord == c_ord else 2.0
            pair = mult * x[b_ord] * x[c_ord]
            if pair == 0.0:
                continue
            for alpha, weight in product_expansion(beta, gamma):
                if weight and alpha in indices:
                    total += pair * weight * x[indices.position_of(alpha)]
    return float(total)


def gbm_variance_exact(mu: float, sigma: float, x0: float, t) -> np.ndarray | float:
    """Var(X_t) = x0^2 exp(2 mu t) (exp(sigma^2 t) - 1) for geometric BM."""
    t = np.asarray(t, dtype=float)
    out = x0 * x0 * np.exp(2.0 * mu * t) * (np.exp(sigma * sigma * t) - 1.0)
    return float(out) if out.ndim == 0 else out


def gbm_mean_exact(mu: float, x0: float, t) -> np.ndarray | float:
    t = np.asarray(t, dtype=float)
    out = x0 * np.exp(mu * t)
    return float(out) if out.ndim == 0 else out


def gbm_variance_order_limit(mu: float, sigma: float, x0: float, p: int, t) -> np.ndarray:
    """Variance of the order-p truncation with an exhausted basis (k -> inf).

    For geometric BM this is x0^2 exp(2 mu t) sum_{m=1..p} (sigma^2 t)^m / m!;
    the gap to the exact variance is the pure chaos-order truncation error,
    which is what remains at times the basis captures exactly.
    """
    t = np.asarray(t, dtype=float)
    s = sum((sigma * sigma * t) ** m / math.factorial(m) for m in range(1, p + 1))
    return x0 * x0 * np.exp(2.0 * mu * t) * s


def error_curve(sol: ChaosSolution, exact_var, grid=None) -> ErrorCurve:
    """Pointwise |exact - approximated| variance over ``grid``.

    ``exact_var`` is a callable of time (vectorized or scalar); ``grid``
    defaults to the full solution grid and must be a subset of it.
    """
    if grid is None:
        grid = sol.grid
        rows = np.arange(len(grid))
    else:
        grid = np.asarray(grid, dtype=float)
        rows = np.array([sol.grid_position(t) for t in grid])
    _, variances = moment_curves(sol)
    approx = variances[rows]
    try:
        exact = np.asarray(exact_var(grid), dtype=float)
        if exact.shape != grid.shape:
            raise TypeError
    except TypeError:
        exact = np.array([float(exact_var(t)) for t in grid])
    return ErrorCurve(grid=grid, values=np.abs(exact - approx),
                      exact_var=exact, approx_var=approx)


def bound_shape(basis: BasisSpec, p: int, k: int, t: float, x0: float) -> float:
    """Rate shape (1 + x0^2) (1/(p+1)! + tail_sum(k, t)) with unit constant.

    The true error bound carries a non-constructive constant, so this
    quantity is meaningful only through ratios and slopes, never as a
    certified bound.
    """
    if p < 0 or k < 1:
        raise ValueError("need p >= 0 and k >= 1")
    return (1.0 + x0 * x0) * (1.0 / math.factorial(p + 1) + tail_sum(basis, k, t))


def loglog_fit(xs, ys) -> tuple[float, float, float]:
    """Least-squares fit of log(ys) against log(xs): slope, intercept, R^2."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError("need at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise NonPositiveValue("log-log fit needs positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def rate_fit(xs, ys) -> float:
    """Fitted log-log slope of ``ys`` against ``xs``."""
    return loglog_fit(xs, ys)[0]
