"""Accelerated hybrid proximal extragradient method for pure proximal
minimization (no smooth part), exploiting strong convexity.

Compared with the forward-backward driver this method has its own weight
recursion, requests the approximate prox directly at the extrapolated point
``y_k``, uses the single relative tolerance
``sigma_k^2 / (2 (1 + lam_k mu)^2) |x_{k+1} - y_k|^2`` with ``sigma_k`` in
``[0, 1]``, and needs no backtracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .afb import (IterationRecord, ProxToleranceError, SolverState,
                  SolveResult, extrapolate_y)
from .guarantees import lyapunov
from .linops import norm_sq
from .oracles import ApproxProxCertificate, ProxRequest
from .problems import Problem

__all__ = ["AhpeConfig", "a_next_ahpe", "ahpe_step", "ahpe_solve"]

Rule = Union[float, Sequence[float], Callable[[int], float]]


def _as_rule(rule: Rule, name: str) -> Callable[[int], float]:
    if callable(rule):
        return rule
    if isinstance(rule, (int, float)):
        value = float(rule)
        return lambda k: value
    values = [float(v) for v in rule]

    def lookup(k: int) -> float:
        if k >= len(values):
            raise ValueError(f"{name} sequence exhausted at k={k}")
        return values[k]

    return lookup


@dataclass(frozen=True)
class AhpeConfig:
    """Step sizes ``lam_k`` (constant, list, or callable), relative tolerance
    ``sigma_k`` in [0, 1] (same forms), and declared strong convexity.

    The corner ``sigma_k = 1`` with ``lam_k * mu = 0`` makes the weight
    update's denominator vanish; it is rejected at evaluation time rather
    than silently clamped.
    """

    lam: Rule
    sigma: Rule = 0.0
    mu: float = 0.0
    max_outer: int = 100
    max_inner: int = 10_000
    max_total_inner: int | None = None
    target_gap: float | None = None

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.max_outer < 0 or self.max_inner < 1:
            raise ValueError("invalid iteration budgets")

    def lam_at(self, k: int) -> float:
        lam = float(_as_rule(self.lam, "lam")(k))
        if lam <= 0:
            raise ValueError(f"lam({k}) = {lam} must be positive")
        return lam

    def sigma_at(self, k: int) -> float:
        sigma = float(_as_rule(self.sigma, "sigma")(k))
        if not (0.0 <= sigma <= 1.0):
            raise ValueError(f"sigma({k}) = {sigma} outside [0, 1]")
        return sigma


def a_next_ahpe(a: float, lam: float, sigma: float, mu: float) -> float:
    """Weight update of the extragradient method.

    ``A + (2(1-sigma) + lam mu) lam * (1 + 2 A mu + sqrt(1 + 4 A (1 + A mu)
    ((1+lam mu)^2 - sigma(sigma+lam mu)) / ((2(1-sigma)+lam mu) lam)))
    / (2 (1 - sigma^2 + lam mu sigma))``.

    This is the larger root of the vanishing-factor quadratic; at
    ``sigma = 0`` it also satisfies the exact-prox identity
    ``A+(A+ - lam(2+lam mu)) = A (2A+ - A)(1+lam mu)^2``.
    """
    if a < 0 or lam <= 0 or mu < 0 or not (0.0 <= sigma <= 1.0):
        raise ValueError("need a >= 0, lam > 0, mu >= 0, sigma in [0, 1]")
    denom = 2.0 * (1.0 - sigma * sigma + lam * mu * sigma)
    if denom <= 0.0:
        raise ValueError(
            "weight update undefined: sigma = 1 requires lam * mu > 0"
        )
    c3 = (2.0 * (1.0 - sigma) + lam * mu) * lam
    c1 = (1.0 + lam * mu) ** 2 - sigma * (sigma + lam * mu)
    disc = 1.0 + 4.0 * a * (1.0 + a * mu) * c1 / c3
    return a + c3 * (1.0 + 2.0 * a * mu + math.sqrt(disc)) / denom


def ahpe_step(state: SolverState, config: AhpeConfig,
              problem: Problem) -> tuple[SolverState, IterationRecord]:
    """One iteration: weight growth, extrapolation, certified prox, momentum."""
    if problem.f is not None:
        raise ValueError("the extragradient method handles problems with no smooth part")
    k = state.k
    lam = config.lam_at(k)
    sigma = config.sigma_at(k)
    mu = config.mu

    a_next = a_next_ahpe(state.a, lam, sigma, mu)
    y = extrapolate_y(state.x, state.z, state.a, a_next, mu)

    # the sigma-only tolerance, valid on the whole range [0, 1]
    scale = 2.0 * (1.0 + lam * mu) ** 2

    def rule(cert: ApproxProxCertificate) -> float:
        return sigma * sigma * norm_sq(cert.x - y) / scale

    cert = problem.g.prox(ProxRequest(anchor=y, step=lam, mu=mu,
                                      max_inner=config.max_inner,
                                      tolerance=rule))
    inner_total = state.inner_total + cert.inner_iterations
    if not cert.converged:
        raise ProxToleranceError(
            f"inner budget {config.max_inner} exhausted at outer iteration "
            f"{k} (gap {cert.gap:.3e})"
        )
    step = (a_next - state.a) / (1.0 + mu * a_next)
    z_next = state.z + step * (mu * (cert.x - state.z) - cert.v)
    new_state = SolverState(k=k + 1, a=a_next, x=cert.x, z=z_next, lam=lam,
                            inner_total=inner_total)
    phi = None
    if problem.xstar is not None:
        phi = lyapunov(a_next, cert.x, z_next, mu, problem.objective,
                       problem.xstar, problem.fstar)
    record = IterationRecord(k=k + 1, inner_cumulative=inner_total,
                             objective=problem.objective(cert.x), lam=lam,
                             a=a_next, lyapunov=phi)
    return new_state, record


def ahpe_solve(problem: Problem, config: AhpeConfig) -> SolveResult:
    """Run :func:`ahpe_step` under the configured budgets (deterministic)."""
    if config.target_gap is not None and problem.fstar is None:
        raise ValueError("target_gap stopping needs problem.fstar")
    state = SolverState.initial(problem.x0, config.lam_at(0))
    records: list[IterationRecord] = []
    reason = "max_outer"
    for _ in range(config.max_outer):
        state, record = ahpe_step(state, config, problem)
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
