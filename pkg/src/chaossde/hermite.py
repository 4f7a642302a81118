"""Normalized (probabilists') Hermite polynomials and product expectations.

``hermite_n`` evaluates H_n with E[H_n(xi)^2] = 1 for standard normal xi.
``triple_scalar``/``triple_multi`` give expectations of products of two and
three basis functionals, which drive higher-moment formulas and the Galerkin
projection of quadratic coefficients.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, OrderTooLarge
from .multiindex import MultiIndex

MAX_ORDER = 64


def hermite_n(n: int, x: float) -> float:
    """Normalized Hermite polynomial H_n(x).

    Uses the stable three-term recurrence
    H_{n+1}(x) = (x H_n(x) - sqrt(n) H_{n-1}(x)) / sqrt(n+1)
    with H_0 = 1, H_1(x) = x.  Orders above 64 are rejected.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    if n > MAX_ORDER:
        raise OrderTooLarge(f"order {n} exceeds the cap {MAX_ORDER}")
    if n == 0:
        return 1.0
    prev, cur = 1.0, x
    for m in range(1, n):
        prev, cur = cur, (x * cur - math.sqrt(m) * prev) / math.sqrt(m + 1)
    return cur


def hermite_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """Values H_0(x)..H_{n_max}(x), stacked along the first axis."""
    if n_max > MAX_ORDER:
        raise OrderTooLarge(f"order {n_max} exceeds the cap {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for m in range(1, n_max):
        out[m + 1] = (x * out[m] - math.sqrt(m) * out[m - 1]) / math.sqrt(m + 1)
    return out


def psi(alpha: MultiIndex, xi: Sequence[float]) -> float:
    """Product functional prod_i H_{a_i}(xi_i); the empty product is 1."""
    if alpha.degree > len(xi):
        raise DimensionMismatch(
            f"index touches coordinate {alpha.degree} but only {len(xi)} draws given")
    out = 1.0
    for i, a in alpha:
        out *= hermite_n(a, float(xi[i - 1]))
    return out


def triple_scalar(a: int, b: int, c: int) -> float:
    """E[H_a(xi) H_b(xi) H_c(xi)] for one standard normal xi.

    Non-zero only when s = (a+b+c)/2 is an integer with s >= max(a,b,c); the
    value is sqrt(a! b! c!) / ((s-a)! (s-b)! (s-c)!), computed in log space
    to stay finite near the order cap.
    """
    if a < 0 or b < 0 or c < 0:
        raise ValueError("orders must be non-negative")
    a, b, c = sorted((a, b, c))  # bitwise-identical under permutations
    tot = a + b + c
    if tot % 2:
        return 0.0
    s = tot // 2
    if s < c:
        return 0.0
    log_val = 0.5 * (math.lgamma(a + 1) + math.lgamma(b + 1) + math.lgamma(c + 1))
    log_val -= math.lgamma(s - a + 1) + math.lgamma(s - b + 1) + math.lgamma(s - c + 1)
    return math.exp(log_val)


def triple_multi(alpha: MultiIndex, beta: MultiIndex, gamma: MultiIndex) -> float:
    """E[Psi^a Psi^b Psi^c] = prod_i triple_scalar(a_i, b_i, c_i).

    Coordinates are independent, so the expectation factorizes.
    """
    coords = {i for i, _ in alpha} | {i for i, _ in beta} | {i for i, _ in gamma}
    out = 1.0
    for i in coords:
        out *= triple_scalar(alpha[i], beta[i], gamma[i])
        if out == 0.0:
            return 0.0
    return out


def product_expansion(beta: MultiIndex, gamma: MultiIndex):
    """Yield ``(alpha, weight)`` with Psi^b Psi^c = sum_a weight * Psi^a.

    Weights are E[Psi^b Psi^c Psi^a]; per coordinate the contributing orders
    run from |b_i - c_i| to b_i + c_i in steps of two.
    """
    coords = sorted({i for i, _ in beta} | {i for i, _ in gamma})
    choices: list[list[tuple[int, int, float]]] = []
    for i in coords:
        b, c = beta[i], gamma[i]
        opts = []
        for a in range(abs(b - c), b + c + 1, 2):
            opts.append((i, a, triple_scalar(b, c, a)))
        choices.append(opts)

    def rec(pos: int, pairs: tuple[tuple[int, int], ...], w: float):
        if w == 0.0:
            return
        if pos == len(choices):
            yield MultiIndex(pairs), w
            return
        for i, a, t in choices[pos]:
            yield from rec(pos + 1, pairs + ((i, a),) if a else pairs, w * t)

    yield from rec(0, (), 1.0)
