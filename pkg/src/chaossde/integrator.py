"""Adaptive embedded Runge-Kutta 5(4) integrator (Dormand-Prince pair).

Explicit DOPRI5 with the classical tableau, scaled-RMS error control and
the standard quartic dense-output interpolant.  A sorted list of known
discontinuity times can be supplied; steps are then forcibly split at
those times, and the right-endpoint stages of a step that lands on one are
evaluated one ulp to the left so each smooth piece is integrated as its
own smooth extension.  Without this, an adaptive step across a jump in
the right-hand side degrades to first order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MaxStepsExceeded, StepSizeUnderflow

# Butcher tableau, Dormand & Prince (1980), 5(4) pair.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# Fifth-order weights equal the last A row (FSAL pair); error weights are
# the difference against the embedded fourth-order solution.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# Dense-output coefficients of the standard quartic interpolant.
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_EXPONENT = 0.2


@dataclass(frozen=True)
class ToleranceSpec:
    """Error-control settings; defaults mirror conventional solver defaults."""

    rtol: float = 1e-3
    atol: float = 1e-6
    max_steps: int = 10_000_000
    initial_step: float | None = None

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.initial_step is not None and self.initial_step <= 0:
            raise ValueError("initial step must be positive")


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(v * v))) if v.size else 0.0


def _initial_step(rhs, t0, y0, f0, t_end, tol: ToleranceSpec) -> float:
    span = t_end - t0
    sc = tol.atol + tol.rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = np.asarray(rhs(t0 + h0, y0 + h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _EXPONENT
    return min(100 * h0, h1, span)


def integrate(rhs, y0, t_span, output_grid, tol: ToleranceSpec | None = None,
              breakpoints=None) -> np.ndarray:
    """Integrate ``y' = rhs(t, y)`` and sample the dense output on a grid.

    Parameters
    ----------
    rhs : callable ``(t, y) -> dy/dt``
    y0 : initial state vector
    t_span : pair ``(t0, t_end)``
    output_grid : increasing times covering both endpoints of ``t_span``
    tol : :class:`ToleranceSpec`
    breakpoints : optional times at which steps are forcibly split

    Returns the array of states with shape ``(len(output_grid), len(y0))``.
    Identical inputs produce bit-identical trajectories.
    """
    tol = tol or ToleranceSpec()
    t0, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t0:
        raise ValueError("t_span must be increasing")
    grid = np.asarray(output_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("output grid must be strictly increasing")
    if grid[0] < t0 or grid[-1] > t_end or grid[0] != t0 or grid[-1] != t_end:
        raise ValueError("output grid must include both endpoints of t_span")

    y = np.array(y0, dtype=float).copy()
    n = y.size
    out = np.empty((len(grid), n))
    out[0] = y
    gi = 1

    stops: list[float] = []
    if breakpoints is not None:
        stops = sorted({float(b) for b in np.asarray(breakpoints).ravel()
                        if t0 < b < t_end})
    stops.append(t_end)
    si = 0

    t = t0
    f_now = np.asarray(rhs(t, y), dtype=float)
    if tol.initial_step is not None:
        h_prop = tol.initial_step
    else:
        h_prop = _initial_step(rhs, t0, y, f_now, t_end, tol)

    k = np.empty((7, n))
    n_attempts = 0
    while t < t_end:
        while stops[si] <= t:
            si += 1
        target = stops[si]
        if n_attempts >= tol.max_steps:
            raise MaxStepsExceeded("step budget exhausted", time=t)
        h = min(h_prop, target - t)
        if h < 1e-14 * max(abs(t), 1.0):
            raise StepSizeUnderflow("step size underflow", time=t)
        forced = h >= (target - t) * (1.0 - 1e-12)
        if forced:
            h = target - t
        t_new = target if forced else t + h

        k[0] = f_now
        for s in range(1, 7):
            ts = t + _C[s] * h
            if forced and _C[s] == 1.0 and si < len(stops) - 1:
                # keep right-endpoint stages inside the current smooth piece
                ts = math.nextafter(t_new, t)
            ys = y + h * sum(_A[s][m] * k[m] for m in range(s))
            k[s] = rhs(ts, ys)
        y_new = y + h * (_A[6][0] * k[0] + _A[6][2] * k[2] + _A[6][3] * k[3]
                         + _A[6][4] * k[4] + _A[6][5] * k[5])
        err_vec = h * (_E[0] * k[0] + _E[2] * k[2] + _E[3] * k[3]
                       + _E[4] * k[4] + _E[5] * k[5] + _E[6] * k[6])
        sc = tol.atol + tol.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / sc)
        if not math.isfinite(err):
            err = math.inf  # overflow/nan in the rhs: force a strong shrink
        n_attempts += 1

        if err <= 1.0:
            rcont = None
            while gi < len(grid) and grid[gi] <= t_new:
                g = grid[gi]
                if g == t_new:
                    out[gi] = y_new
                else:
                    if rcont is None:
                        ydiff = y_new - y
                        bspl = h * k[0] - ydiff
                        r4 = ydiff - h * k[6] - bspl
                        r5 = h * (_D[0] * k[0] + _D[2] * k[2] + _D[3] * k[3]
                                  + _D[4] * k[4] + _D[5] * k[5] + _D[6] * k[6])
                        rcont = (ydiff, bspl, r4, r5)
                    ydiff, bspl, r4, r5 = rcont
                    theta = (g - t) / h
                    theta1 = 1.0 - theta
                    out[gi] = y + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)))
                gi += 1
            t = t_new
            y = y_new
            if t < t_end:
                # FSAL: the last stage already evaluated f at the step end,
                # except when that end is a breakpoint (new smooth piece).
                f_now = np.asarray(rhs(t, y), dtype=float) if forced else k[6].copy()
            factor = _MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -_EXPONENT))
            h_prop = h * factor
        else:
            h_prop = h * max(_MIN_FACTOR, min(1.0, _SAFETY * err ** -_EXPONENT))
    return out
