"""First-order and approximate-proximal oracle contracts.

A :class:`SmoothOracle` exposes value/gradient of the smooth term together
with a Lipschitz estimate (possibly a rough initial guess; the outer solver
backtracks).  A :class:`ProxFriendlyFunction` exposes the nonsmooth term's
value, its available strong convexity, and an approximate-prox procedure that
returns an :class:`ApproxProxCertificate`.

Oracles must be usable read-only from concurrent callers: evaluations never
mutate shared state, and inner-iteration counts travel inside the returned
certificate rather than a global counter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .linops import dot, norm, norm_sq

__all__ = [
    "SmoothOracle",
    "ProxFriendlyFunction",
    "ProxRequest",
    "ApproxProxCertificate",
    "ToleranceRule",
    "tolerance_met",
    "check_smoothness_inequality",
    "check_strong_convexity_inequality",
    "gradient_fd_error",
    "midpoint_convexity_defect",
]


@dataclass(frozen=True)
class SmoothOracle:
    """Value/gradient access to a smooth convex function.

    ``lipschitz_estimate`` may overestimate the true gradient Lipschitz
    constant, or be a guess to be corrected by backtracking.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz_estimate: float

    @staticmethod
    def zero(shape: tuple[int, ...]) -> "SmoothOracle":
        """The identically-zero smooth part (pure proximal minimization)."""
        return SmoothOracle(
            value=lambda x: 0.0,
            gradient=lambda x: np.zeros(shape),
            lipschitz_estimate=1.0,
        )


@dataclass(frozen=True)
class ApproxProxCertificate:
    """Output of an approximate prox call: primal, dual, witness, certified gap.

    ``gap`` is the value the emitting solver certified against the requested
    tolerance; it upper-bounds (and for exact-witness constructions equals)
    the primal-dual gap of the strong-convexity-shifted prox subproblem at
    ``(x, v)``.  ``w`` satisfies ``v - mu*x + mu*w in dg(w)`` by construction
    of the emitting solver.  ``converged`` is False when the inner budget ran
    out before the tolerance was met.
    """

    x: np.ndarray
    v: np.ndarray
    w: np.ndarray
    gap: float
    inner_iterations: int
    converged: bool = True


# A tolerance is either a fixed number or a rule evaluated on the candidate
# certificate (the relative-error criteria depend on the prox output itself).
ToleranceRule = Union[float, Callable[[ApproxProxCertificate], float]]


def _resolve_tolerance(tolerance: ToleranceRule,
                       cert: ApproxProxCertificate) -> float:
    if callable(tolerance):
        return float(tolerance(cert))
    return float(tolerance)


def tolerance_met(cert: ApproxProxCertificate, tolerance: ToleranceRule) -> bool:
    """Whether the certificate's gap meets the tolerance (ties accepted)."""
    eps = _resolve_tolerance(tolerance, cert)
    return cert.gap <= eps + 1e-12 * (1.0 + abs(eps))


@dataclass(frozen=True)
class ProxRequest:
    """Anchor, step and tolerance of one approximate-prox evaluation."""

    anchor: np.ndarray
    step: float
    tolerance: ToleranceRule = 0.0
    mu: float = 0.0
    max_inner: int = 10_000

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("prox step must be positive")
        if not callable(self.tolerance) and self.tolerance < 0:
            raise ValueError("prox tolerance must be nonnegative")

    def accepts(self, cert: ApproxProxCertificate) -> bool:
        return tolerance_met(cert, self.tolerance)


class ProxFriendlyFunction:
    """Base class for the nonsmooth term: value plus approximate prox.

    Subclasses set ``mu_total`` (the intrinsic strong convexity available to
    the outer method; a declared ``mu`` at or below it is valid) and implement
    :meth:`prox`.  ``value`` may return ``math.inf`` outside the domain.
    """

    mu_total: float = 0.0

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, request: ProxRequest) -> ApproxProxCertificate:
        raise NotImplementedError

    def _check_declared_mu(self, mu: float) -> None:
        if mu < 0:
            raise ValueError("declared strong convexity must be nonnegative")
        if mu > self.mu_total + 1e-12:
            raise ValueError(
                f"declared strong convexity {mu} exceeds the available {self.mu_total}"
            )


# ---------------------------------------------------------------------------
# Inequality checkers
# ---------------------------------------------------------------------------

def check_smoothness_inequality(f: SmoothOracle, x: np.ndarray, y: np.ndarray,
                                l_eff: float) -> bool:
    """Test the cocoercivity-type lower bound of a smooth convex function.

    True iff ``f(y) >= f(x) + <f'(x), y-x> + |f'(x)-f'(y)|^2 / (2 l_eff)``
    up to an additive slack ``1e-12 * (1 + |f(y)|)``.
    """
    if l_eff <= 0:
        raise ValueError("l_eff must be positive")
    fy = f.value(y)
    rhs = (f.value(x) + dot(f.gradient(x), y - x)
           + norm_sq(f.gradient(x) - f.gradient(y)) / (2.0 * l_eff))
    return fy >= rhs - 1e-12 * (1.0 + abs(fy))


def check_strong_convexity_inequality(g_value: Callable[[np.ndarray], float],
                                      x: np.ndarray, y: np.ndarray,
                                      subgrad_at_x: np.ndarray,
                                      mu: float) -> bool:
    """Test ``g(y) >= g(x) + <s, y-x> + mu/2 |x-y|^2`` with roundoff slack."""
    gy = g_value(y)
    rhs = g_value(x) + dot(subgrad_at_x, y - x) + 0.5 * mu * norm_sq(x - y)
    return gy >= rhs - 1e-12 * (1.0 + abs(gy))


# ---------------------------------------------------------------------------
# Audits used by the test-suite (and available to callers)
# ---------------------------------------------------------------------------

def gradient_fd_error(f: SmoothOracle, x: np.ndarray, directions: int = 50,
                      seed: int = 0, h: float = 1e-6) -> float:
    """Worst absolute defect between <f'(x), d> and a central difference.

    Normalized checks compare the result against ``tol * (1 + |f'(x)|)``.
    """
    rng = np.random.default_rng(seed)
    g = f.gradient(x)
    worst = 0.0
    for _ in range(directions):
        d = rng.standard_normal(np.shape(x))
        d /= norm(d)
        fd = (f.value(x + h * d) - f.value(x - h * d)) / (2.0 * h)
        worst = max(worst, abs(dot(g, d) - fd))
    return worst


def midpoint_convexity_defect(g_value: Callable[[np.ndarray], float],
                              x: np.ndarray, y: np.ndarray) -> float:
    """Positive part of ``g((x+y)/2) - (g(x)+g(y))/2`` (zero for convex g)."""
    mid = g_value(0.5 * (x + y))
    avg = 0.5 * (g_value(x) + g_value(y))
    return max(0.0, mid - avg)
