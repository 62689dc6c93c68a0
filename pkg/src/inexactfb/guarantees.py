"""Computable convergence bounds and the Lyapunov potential.

These serve two roles: runtime monitors (when a minimizer is known) and
independent oracles for the acceptance tests.  Every bound evaluates the
worst-case expression exactly as analyzed; none is fitted to data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linops import norm_sq

__all__ = [
    "LyapunovSnapshot",
    "lyapunov",
    "afb_growth_factor",
    "ahpe_growth_factor",
    "bound_cor1",
    "bound_cor2",
    "bound_cor3",
    "bound_ahpe",
]


@dataclass(frozen=True)
class LyapunovSnapshot:
    """One potential evaluation along a run, with the accumulated xi slack."""

    k: int
    a: float
    potential: float
    slack: float  # sum over i < k of A_{i+1} * xi_i / 2


def lyapunov(a: float, x: np.ndarray, z: np.ndarray, mu: float,
             objective: Callable[[np.ndarray], float],
             xstar: np.ndarray, fstar: float | None = None) -> float:
    """Potential ``A (F(x) - F*) + (1 + mu A)/2 |z - x*|^2``.

    ``fstar`` defaults to ``objective(xstar)``; pass a sharper value when the
    minimizer is only known approximately.
    """
    if fstar is None:
        fstar = objective(xstar)
    return a * (objective(x) - fstar) + 0.5 * (1.0 + mu * a) * norm_sq(z - xstar)


def afb_growth_factor(eta: float, mu: float) -> float:
    """Per-step lower bound on ``A_{k+1}/A_k`` for the forward-backward method.

    Equals ``1 / (1 - sqrt(eta mu / (1 + eta mu)))``; 1 when ``mu = 0``.
    """
    if eta <= 0 or mu < 0:
        raise ValueError("need eta > 0 and mu >= 0")
    return 1.0 / (1.0 - math.sqrt(eta * mu / (1.0 + eta * mu)))


def ahpe_growth_factor(lam: float, sigma: float, mu: float) -> float:
    """Per-step lower bound on ``A_{k+1}/A_k`` for the extragradient method.

    ``1 / (1 - sqrt(lam mu (2(1-sigma) + lam mu) /
    ((1+lam mu)^2 - sigma (sigma + lam mu))))``.  At ``sigma = 1`` it matches
    :func:`afb_growth_factor` with ``eta = lam``.
    """
    if lam <= 0 or mu < 0 or not (0.0 <= sigma <= 1.0):
        raise ValueError("need lam > 0, mu >= 0 and sigma in [0, 1]")
    num = lam * mu * (2.0 * (1.0 - sigma) + lam * mu)
    den = (1.0 + lam * mu) ** 2 - sigma * (sigma + lam * mu)
    return 1.0 / (1.0 - math.sqrt(num / den))


def bound_cor1(a_n: float, dist0_sq: float, weighted_xi_sum: float = 0.0) -> float:
    """Objective-gap bound ``(|x0-x*|^2 + sum_i A_{i+1} xi_i) / (2 A_N)``."""
    if a_n <= 0:
        raise ValueError("A_N must be positive")
    return (dist0_sq + weighted_xi_sum) / (2.0 * a_n)


def bound_cor2(n: int, eta: float, mu: float, c: float, rho: float,
               dist0_sq: float) -> float:
    """Linear-rate bound under constant relative errors and geometric xi.

    ``eta`` should be the smallest executed step-size product (or its
    analytic lower bound); the decay ratio of the leading term is
    ``r = 1 - sqrt(eta mu / (1 + eta mu))``.  The absolute-error tail takes
    one of three closed forms depending on the order of ``rho`` and ``r``.
    The three expressions are distinct envelopes: the bound is discontinuous
    across ``rho = r``, and for ``rho >= 1`` it evaluates as written but is
    vacuous for large ``N``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if eta <= 0 or mu <= 0:
        raise ValueError("need eta > 0 and mu > 0")
    if c < 0 or (c > 0 and rho <= 0):
        raise ValueError("need c >= 0 and rho > 0 when c > 0")
    r = 1.0 - math.sqrt(eta * mu / (1.0 + eta * mu))
    value = dist0_sq / (2.0 * eta) * r ** (n - 1)
    if c == 0:
        return value
    if rho < r:
        value += c / (2.0 * (r - rho)) * r**n
    elif rho == r:
        value += 0.5 * c * n * r ** (n - 1)
    else:
        value += c / (2.0 * (rho - r)) * rho**n
    return value


def _tail_sum(exponent: float, tol: float = 1e-12) -> float:
    """``sum_{k>=0} (k+1)**exponent`` for ``exponent < -1`` by direct summation."""
    total = 0.0
    k = 0
    while True:
        term = float(k + 1) ** exponent
        total += term
        # geometric-free stopping: compare the integral tail with the target
        tail_bound = float(k + 1) ** (exponent + 1.0) / (-exponent - 1.0)
        if tail_bound <= tol * max(total, 1.0):
            return total
        k += 1


def bound_cor3(n: int, eta_min: float, eta_max: float, c: float, q: float,
               dist0_sq: float) -> float:
    """Sublinear-rate bound ``2 |x0-x*|^2 / (eta_min N^2)`` plus the xi tail.

    The polynomial absolute-error tail ``xi_k = c (k+1)^(-q)`` contributes a
    case split at ``q = 3``; decay with ``0 <= q <= 1`` gives no finite bound
    and is rejected.  Requires the no-growth backtracking variant when
    ``c > 0``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if eta_min <= 0 or eta_max < eta_min:
        raise ValueError("need 0 < eta_min <= eta_max")
    value = 2.0 * dist0_sq / (eta_min * n**2)
    if c == 0:
        return value
    if c < 0:
        raise ValueError("c must be nonnegative")
    if q <= 1.0:
        raise ValueError("no finite bound for 0 <= q <= 1 with c > 0")
    ratio = eta_max / eta_min
    if q > 3.0:
        value += 2.0 * c * ratio * _tail_sum(2.0 - q) / n**2
    elif q == 3.0:
        value += 2.0 * c * ratio * (1.0 + math.log(n)) / n**2
    else:
        value += 2.0 * c * ratio * (1.0 / n**2 + 1.0 / ((3.0 - q) * n ** (q - 1.0)))
    return value


def bound_ahpe(a_n: float, dist0_sq: float) -> float:
    """Objective-gap bound ``|x0-x*|^2 / (2 A_N)`` for the extragradient method."""
    if a_n <= 0:
        raise ValueError("A_N must be positive")
    return dist0_sq / (2.0 * a_n)
