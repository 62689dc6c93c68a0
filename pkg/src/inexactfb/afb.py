"""Inexact accelerated forward-backward driver with backtracking.

Each outer iteration grows the scalar weight ``A_k`` by the positive root of
a step-dependent quadratic, extrapolates ``y_k`` between the primal iterate
and the momentum point ``z_k``, asks the nonsmooth oracle for an approximate
prox at ``y_k - lam_k grad_f(y_k)`` under the mixed relative/absolute
tolerance, and verifies a smoothness condition at the returned point.  If the
condition fails the step size shrinks by ``alpha`` and the iteration restarts
(the discarded inner iterations still count); on success the step size grows
by ``beta``.

The declared strong convexity ``mu`` is taken as configured, never estimated;
any under-approximation of the true value is valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .criterion import ToleranceInputs, epsilon_tolerance
from .guarantees import lyapunov
from .linops import norm_sq
from .oracles import ApproxProxCertificate, ProxRequest, SmoothOracle
from .problems import Problem
from .schedules import ToleranceSchedule

__all__ = [
    "AfbConfig",
    "SolverState",
    "IterationRecord",
    "SolveResult",
    "BacktrackingFloorError",
    "ProxToleranceError",
    "eta",
    "a_next_afb",
    "extrapolate_y",
    "update_z",
    "smooth_condition",
    "afb_step",
    "afb_solve",
]


class BacktrackingFloorError(RuntimeError):
    """Step size shrank below the configured floor: the smooth part is not
    gradient-Lipschitz on the visited segment, or the oracle is inconsistent."""


class ProxToleranceError(RuntimeError):
    """The inner solver exhausted its budget without meeting the tolerance."""


@dataclass(frozen=True)
class AfbConfig:
    """Driver parameters.

    ``mu`` is the declared strong convexity of the nonsmooth part (an
    under-approximation is fine).  ``lam_floor_factor * lam0`` converts an
    endless backtracking loop into :class:`BacktrackingFloorError`.  The
    sublinear-rate bound with a polynomial absolute-error schedule assumes
    ``beta = 1``; keep it there when that bound is to be evaluated.
    """

    lam0: float
    schedule: ToleranceSchedule = field(default_factory=ToleranceSchedule.constant)
    mu: float = 0.0
    alpha: float = 0.5
    beta: float = 1.0
    max_outer: int = 100
    max_inner: int = 10_000
    max_total_inner: int | None = None
    target_gap: float | None = None
    lam_floor_factor: float = 1e-12

    def __post_init__(self):
        if self.lam0 <= 0:
            raise ValueError("lam0 must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta < 1.0:
            raise ValueError("beta must be at least 1")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.max_outer < 0 or self.max_inner < 1:
            raise ValueError("invalid iteration budgets")


@dataclass(frozen=True)
class SolverState:
    """Per-iteration state; ``a`` is strictly increasing, ``inner_total``
    accumulates every inner iteration including discarded backtracking
    attempts."""

    k: int
    a: float
    x: np.ndarray
    z: np.ndarray
    lam: float
    inner_total: int

    @staticmethod
    def initial(x0: np.ndarray, lam0: float) -> "SolverState":
        x0 = np.asarray(x0, dtype=float)
        return SolverState(k=0, a=0.0, x=x0, z=x0.copy(), lam=lam0, inner_total=0)


@dataclass(frozen=True)
class IterationRecord:
    """Logged row: state after iteration ``k`` (``lam`` is the accepted step)."""

    k: int
    inner_cumulative: int
    objective: float
    lam: float
    a: float
    lyapunov: float | None = None
    backtracks: int = 0


@dataclass(frozen=True)
class SolveResult:
    records: list[IterationRecord]
    state: SolverState
    stop_reason: str

    @property
    def x(self) -> np.ndarray:
        return self.state.x


# ---------------------------------------------------------------------------
# Elementary updates
# ---------------------------------------------------------------------------

def eta(lam: float, zeta: float) -> float:
    """Effective step ``(1 - zeta^2) lam`` after the dual relative error."""
    if lam <= 0 or not (0.0 <= zeta < 1.0):
        raise ValueError("need lam > 0 and zeta in [0, 1)")
    return (1.0 - zeta * zeta) * lam


def a_next_afb(a: float, eta_k: float, mu: float) -> float:
    """Largest root of ``A(A - eta) = a (1 + eta mu) (2A - a)`` above ``a``.

    Closed form: ``a + (eta + 2 a mu eta + sqrt(eta^2 + 4 eta a (1 + eta mu)
    (1 + a mu))) / 2``.  All summands are nonnegative, so the evaluation is
    cancellation-free.
    """
    if a < 0 or eta_k <= 0 or mu < 0:
        raise ValueError("need a >= 0, eta > 0, mu >= 0")
    disc = eta_k * eta_k + 4.0 * eta_k * a * (1.0 + eta_k * mu) * (1.0 + a * mu)
    return a + 0.5 * (eta_k + 2.0 * a * mu * eta_k + math.sqrt(disc))


def extrapolate_y(x: np.ndarray, z: np.ndarray, a: float, a_next: float,
                  mu: float) -> np.ndarray:
    """Extrapolated point ``x + coeff (z - x)`` with
    ``coeff = (A+ - A)(A mu + 1) / (A+ + A (2 A+ - A) mu)``."""
    if a_next <= a:
        raise ValueError("a_next must exceed a")
    coeff = (a_next - a) * (a * mu + 1.0) / (a_next + a * (2.0 * a_next - a) * mu)
    return x + coeff * (z - x)


def update_z(z: np.ndarray, x_next: np.ndarray, v_next: np.ndarray,
             grad_y: np.ndarray, a: float, a_next: float,
             mu: float) -> np.ndarray:
    """Momentum update
    ``z + (A+ - A)/(1 + mu A+) (mu (x+ - z) - (v+ + grad_f(y)))``."""
    if a_next <= a:
        raise ValueError("a_next must exceed a")
    step = (a_next - a) / (1.0 + mu * a_next)
    return z + step * (mu * (x_next - z) - (v_next + grad_y))


def smooth_condition(f: SmoothOracle, y: np.ndarray, x_next: np.ndarray,
                     lam: float, sigma: float) -> bool:
    """Backtracking test
    ``f(y) >= f(x+) + <f'(x+), y - x+> + lam/(2(1-sigma^2)) |f'(y)-f'(x+)|^2``.

    Holds without backtracking whenever ``lam <= (1 - sigma^2) / L`` for an
    ``L``-smooth convex ``f``.
    """
    if not (0.0 <= sigma < 1.0):
        raise ValueError("sigma must lie in [0, 1)")
    fy = f.value(y)
    gx = f.gradient(x_next)
    rhs = (f.value(x_next) + float(np.vdot(gx, y - x_next))
           + lam / (2.0 * (1.0 - sigma * sigma))
           * norm_sq(f.gradient(y) - gx))
    return fy >= rhs - 1e-12 * (1.0 + abs(fy))


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _tolerance_rule(sigma: float, zeta: float, xi: float, lam: float,
                    mu: float, y: np.ndarray,
                    grad_y: np.ndarray) -> Callable[[ApproxProxCertificate], float]:
    def rule(cert: ApproxProxCertificate) -> float:
        t = ToleranceInputs(sigma=sigma, zeta=zeta, xi=xi, lam=lam, mu=mu,
                            x=cert.x, y=y, v=cert.v, grad_y=grad_y)
        return epsilon_tolerance(t)

    return rule


def afb_step(state: SolverState, config: AfbConfig,
             problem: Problem) -> tuple[SolverState, IterationRecord]:
    """One accepted outer iteration, including any backtracking attempts."""
    k = state.k
    config.schedule.validate_at(k)
    sigma_k = config.schedule.sigma(k)
    zeta_k = config.schedule.zeta(k)
    xi_k = config.schedule.xi(k)
    f = problem.smooth_or_zero()
    mu = config.mu

    lam = state.lam
    lam_floor = config.lam_floor_factor * config.lam0
    inner_total = state.inner_total
    backtracks = 0
    while True:
        eta_k = eta(lam, zeta_k)
        a_next = a_next_afb(state.a, eta_k, mu)
        y = extrapolate_y(state.x, state.z, state.a, a_next, mu)
        grad_y = f.gradient(y)
        anchor = y - lam * grad_y
        cert = problem.g.prox(ProxRequest(
            anchor=anchor, step=lam, mu=mu, max_inner=config.max_inner,
            tolerance=_tolerance_rule(sigma_k, zeta_k, xi_k, lam, mu, y, grad_y),
        ))
        inner_total += cert.inner_iterations
        if not cert.converged:
            raise ProxToleranceError(
                f"inner budget {config.max_inner} exhausted at outer iteration "
                f"{k} (gap {cert.gap:.3e}); tolerance infeasible at this step"
            )
        if smooth_condition(f, y, cert.x, lam, sigma_k):
            break
        lam *= config.alpha
        backtracks += 1
        if lam < lam_floor:
            raise BacktrackingFloorError(
                f"step size fell below {lam_floor:.3e} at outer iteration {k}"
            )

    z_next = update_z(state.z, cert.x, cert.v, grad_y, state.a, a_next, mu)
    new_state = SolverState(k=k + 1, a=a_next, x=cert.x, z=z_next,
                            lam=config.beta * lam, inner_total=inner_total)
    phi = None
    if problem.xstar is not None:
        phi = lyapunov(a_next, cert.x, z_next, mu, problem.objective,
                       problem.xstar, problem.fstar)
    record = IterationRecord(k=k + 1, inner_cumulative=inner_total,
                             objective=problem.objective(cert.x), lam=lam,
                             a=a_next, lyapunov=phi, backtracks=backtracks)
    return new_state, record


def afb_solve(problem: Problem, config: AfbConfig) -> SolveResult:
    """Run :func:`afb_step` until an iteration or accuracy budget is hit.

    Deterministic: identical problem and configuration produce identical
    trajectories.  ``target_gap`` needs ``problem.fstar``.
    """
    if config.target_gap is not None and problem.fstar is None:
        raise ValueError("target_gap stopping needs problem.fstar")
    state = SolverState.initial(problem.x0, config.lam0)
    records: list[IterationRecord] = []
    reason = "max_outer"
    for _ in range(config.max_outer):
        state, record = afb_step(state, config, problem)
        records.append(record)
        if (config.target_gap is not None
                and record.objective - problem.fstar <= config.target_gap):
            reason = "target_gap"
            break
        if (config.max_total_inner is not None
                and state.inner_total >= config.max_total_inner):
            reason = "max_total_inner"
            break
    return SolveResult(records=records, state=state, stop_reason=reason)
