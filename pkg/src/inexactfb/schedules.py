"""Tolerance-parameter sequences steering relative and absolute prox errors.

Built-in rules cover the regimes with known convergence bounds: constant
``sigma``/``zeta`` in [0, 1), and ``xi`` either identically zero, geometric
``C * rho^k``, or polynomial ``C * (k+1)^(-q)``.  Arbitrary user rules enter
through the callable-based constructor.  Schedules are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

__all__ = ["ToleranceSchedule"]


def _constant_in_unit(name: str, c: float) -> Callable[[int], float]:
    if not (0.0 <= c < 1.0):
        raise ValueError(f"{name} must lie in [0, 1), got {c}")
    return lambda k: c


@dataclass(frozen=True)
class ToleranceSchedule:
    """Triple of rules ``k -> (sigma_k, zeta_k, xi_k)``.

    Invariants enforced by the factory constructors: ``sigma_k, zeta_k`` in
    ``[0, 1)`` and ``xi_k >= 0`` for every ``k``.  ``xi_kind``/``xi_params``
    describe the absolute-error rule so bound evaluators can pick the matching
    convergence-rate case; custom rules carry kind ``"custom"``.
    """

    sigma: Callable[[int], float]
    zeta: Callable[[int], float]
    xi: Callable[[int], float]
    xi_kind: str = "custom"
    xi_params: tuple[float, ...] = ()

    @staticmethod
    def constant(sigma: float = 0.0, zeta: float = 0.0) -> "ToleranceSchedule":
        """Constant relative errors, no absolute error."""
        return ToleranceSchedule(
            sigma=_constant_in_unit("sigma", sigma),
            zeta=_constant_in_unit("zeta", zeta),
            xi=lambda k: 0.0,
            xi_kind="zero",
        )

    @staticmethod
    def with_geometric_xi(c: float, rho: float, sigma: float = 0.0,
                          zeta: float = 0.0) -> "ToleranceSchedule":
        """Absolute error ``xi_k = c * rho**k`` with ``c, rho > 0``."""
        if c <= 0 or rho <= 0:
            raise ValueError("geometric xi needs c > 0 and rho > 0")
        return ToleranceSchedule(
            sigma=_constant_in_unit("sigma", sigma),
            zeta=_constant_in_unit("zeta", zeta),
            xi=lambda k: c * rho**k,
            xi_kind="geometric",
            xi_params=(c, rho),
        )

    @staticmethod
    def with_polynomial_xi(c: float, q: float, sigma: float = 0.0,
                           zeta: float = 0.0) -> "ToleranceSchedule":
        """Absolute error ``xi_k = c * (k+1)**(-q)`` with ``c, q >= 0``."""
        if c < 0 or q < 0:
            raise ValueError("polynomial xi needs c >= 0 and q >= 0")
        return ToleranceSchedule(
            sigma=_constant_in_unit("sigma", sigma),
            zeta=_constant_in_unit("zeta", zeta),
            xi=lambda k: c * float(k + 1) ** (-q),
            xi_kind="polynomial",
            xi_params=(c, q),
        )

    def validate_at(self, k: int) -> None:
        """Raise if any rule leaves its admissible range at index ``k``."""
        s, z, x = self.sigma(k), self.zeta(k), self.xi(k)
        if not (0.0 <= s < 1.0):
            raise ValueError(f"sigma({k}) = {s} outside [0, 1)")
        if not (0.0 <= z < 1.0):
            raise ValueError(f"zeta({k}) = {z} outside [0, 1)")
        if x < 0:
            raise ValueError(f"xi({k}) = {x} negative")
