"""Concrete problem instances: synthetic lasso, CUR-like factorization and
total-variation deblurring, each wiring a smooth oracle to a prox oracle.

The factorization and deblurring builders follow fixed parameter recipes
(regularization weights proportional to the smooth part's curvature, matched
row/column scaling, relative noise level) so that desk-scale synthetic
instances behave qualitatively like their full-scale counterparts.
Instances are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linops import (LinearOperator, blur_matrix, box_blur, dot, norm, norm_sq,
                     operator_from_matrix, power_iteration)
from .oracles import SmoothOracle, ProxFriendlyFunction
from .proxlib import (GroupFamily, GroupNormRegularizer, SeparableL1,
                      TvRegularizer)

__all__ = [
    "Problem",
    "build_lasso",
    "make_lasso_instance",
    "CurProblem",
    "cur_value_grad",
    "cur_lipschitz",
    "make_cur_instance",
    "TvProblem",
    "tv_value_grad",
    "make_tv_instance",
    "make_piecewise_image",
]


@dataclass(frozen=True)
class Problem:
    """A composite instance ``min f(x) + g(x)`` with optional reference data.

    ``f=None`` means no smooth part (pure proximal minimization).  ``xstar``
    and ``fstar``, when supplied, unlock Lyapunov monitoring and gap-based
    stopping; they are test/benchmark data, not solver requirements.
    """

    g: ProxFriendlyFunction
    x0: np.ndarray
    f: SmoothOracle | None = None
    xstar: np.ndarray | None = None
    fstar: float | None = None
    name: str = ""

    def smooth_or_zero(self) -> SmoothOracle:
        if self.f is not None:
            return self.f
        return SmoothOracle.zero(np.shape(self.x0))

    def objective(self, x: np.ndarray) -> float:
        smooth = self.f.value(x) if self.f is not None else 0.0
        return smooth + self.g.value(x)

    def with_reference(self, xstar: np.ndarray, fstar: float) -> "Problem":
        return Problem(g=self.g, x0=self.x0, f=self.f, xstar=xstar,
                       fstar=fstar, name=self.name)


# ---------------------------------------------------------------------------
# Lasso (synthetic test problem with closed-form-checkable optimality)
# ---------------------------------------------------------------------------

def build_lasso(design: np.ndarray, response: np.ndarray, l1_weight: float,
                mu_reg: float = 0.0, exact_prox: bool = True,
                x0: np.ndarray | None = None) -> Problem:
    """``min 0.5 |A x - b|^2 + l1_weight |x|_1 + mu_reg/2 |x|^2``.

    ``exact_prox=True`` uses the closed-form soft-threshold oracle; otherwise
    the prox is served by dual block coordinate ascent over singleton groups,
    which exercises the full certificate machinery.
    """
    a = np.asarray(design, dtype=float)
    b = np.asarray(response, dtype=float)
    if a.ndim != 2 or b.shape != (a.shape[0],):
        raise ValueError("design must be 2-D with matching response length")
    lipschitz = float(np.linalg.norm(a, 2)) ** 2

    def value(x: np.ndarray) -> float:
        return 0.5 * norm_sq(a @ x - b)

    def gradient(x: np.ndarray) -> np.ndarray:
        return a.T @ (a @ x - b)

    f = SmoothOracle(value=value, gradient=gradient, lipschitz_estimate=lipschitz)
    if exact_prox:
        g: ProxFriendlyFunction = SeparableL1(l1_weight, mu_reg)
    else:
        d = a.shape[1]
        fam = GroupFamily.from_groups([np.array([i]) for i in range(d)],
                                      weight=l1_weight)
        g = GroupNormRegularizer([fam], mu_reg=mu_reg)
    start = np.zeros(a.shape[1]) if x0 is None else np.asarray(x0, dtype=float)
    return Problem(g=g, x0=start, f=f, name="lasso")


def make_lasso_instance(d: int, n_samples: int, seed: int,
                        l1_weight: float = 0.1, mu_reg: float = 0.0,
                        exact_prox: bool = True) -> Problem:
    """Random well-conditioned lasso with a sparse planted signal."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_samples, d)) / np.sqrt(n_samples)
    signal = np.zeros(d)
    support = rng.choice(d, size=max(1, d // 4), replace=False)
    signal[support] = rng.standard_normal(support.size)
    b = a @ signal + 0.05 * rng.standard_normal(n_samples)
    return build_lasso(a, b, l1_weight, mu_reg, exact_prox)


# ---------------------------------------------------------------------------
# CUR-like factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurProblem:
    """Data for ``min 0.5 |W - W X W|_F^2 + row/col group norms + Tikhonov``."""

    w: np.ndarray
    lam_row: float
    lam_col: float
    mu_reg: float
    lipschitz: float

    def to_problem(self) -> Problem:
        w = self.w
        p, m = w.shape[1], w.shape[0]

        f = SmoothOracle(
            value=lambda x: cur_value_grad(w, x)[0],
            gradient=lambda x: cur_value_grad(w, x)[1],
            lipschitz_estimate=self.lipschitz,
        )
        idx = np.arange(p * m).reshape(p, m)
        rows = GroupFamily.from_groups([idx[i, :] for i in range(p)],
                                       weight=self.lam_row)
        cols = GroupFamily.from_groups([idx[:, j] for j in range(m)],
                                       weight=self.lam_col)
        g = GroupNormRegularizer([rows, cols], mu_reg=self.mu_reg)
        return Problem(g=g, x0=np.zeros((p, m)), f=f, name="cur")


def cur_value_grad(w: np.ndarray, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Value ``0.5 |W - W X W|_F^2`` and gradient ``-W^T (W - W X W) W^T``."""
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (w.shape[1], w.shape[0]):
        raise ValueError(f"X must have shape {(w.shape[1], w.shape[0])}, got {x.shape}")
    residual = w - w @ x @ w
    return 0.5 * norm_sq(residual), -(w.T @ residual @ w.T)


def cur_lipschitz(w: np.ndarray) -> float:
    """Curvature bound ``|W|_2^4`` via power iteration on ``W^T W``."""
    w = np.asarray(w, dtype=float)
    spectral = power_iteration(lambda u: w @ u, lambda u: w.T @ u,
                               (w.shape[1],), rel_tol=1e-12)
    return spectral**4


def make_cur_instance(w_raw: np.ndarray, lam_row: float = 2e-3,
                      mu_reg_scale: float = 2e-3,
                      normalize: bool = True) -> CurProblem:
    """Factorization instance with matched row/column regularization.

    When ``normalize`` is set, ``W`` is shifted to zero mean and scaled to
    unit Frobenius norm.  The column weight is ``sqrt(p/m)`` times the row
    weight and the Tikhonov weight is ``mu_reg_scale`` times the curvature
    bound.
    """
    w = np.asarray(w_raw, dtype=float).copy()
    if normalize:
        w -= w.mean()
        w /= norm(w)
    lipschitz = cur_lipschitz(w)
    m, p = w.shape
    lam_col = float(np.sqrt(p / m)) * lam_row
    return CurProblem(w=w, lam_row=lam_row, lam_col=lam_col,
                      mu_reg=mu_reg_scale * lipschitz, lipschitz=lipschitz)


# ---------------------------------------------------------------------------
# Total-variation deblurring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TvProblem:
    """Data for ``min 0.5 |A X - Y|_F^2 + lam_reg TV(X) + Tikhonov``."""

    observed: np.ndarray
    blur: LinearOperator
    lam_reg: float
    mu_reg: float
    lipschitz: float

    def to_problem(self) -> Problem:
        op, y = self.blur, self.observed
        f = SmoothOracle(
            value=lambda x: tv_value_grad(op, y, x)[0],
            gradient=lambda x: tv_value_grad(op, y, x)[1],
            lipschitz_estimate=self.lipschitz,
        )
        n = y.shape[0]
        g = TvRegularizer(lam_reg=self.lam_reg, mu_reg=self.mu_reg, n=n)
        return Problem(g=g, x0=y.copy(), f=f, name="tv")


def tv_value_grad(blur: LinearOperator, observed: np.ndarray,
                  x: np.ndarray) -> tuple[float, np.ndarray]:
    """Value ``0.5 |A x - Y|_F^2`` and gradient ``A^T (A x - Y)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != blur.in_shape:
        raise ValueError(f"image must have shape {blur.in_shape}, got {x.shape}")
    residual = blur.forward(x) - observed
    return 0.5 * norm_sq(residual), blur.adjoint(residual)


def make_tv_instance(clean: np.ndarray, kernel_size: int = 5,
                     noise_rel: float = 0.01, seed: int = 0,
                     lam_reg: float = 1.0, mu_reg_scale: float = 1e-2,
                     initial_l: float = 1.0) -> TvProblem:
    """Blur-plus-noise observation of a clean image.

    The observation is ``blur(clean)`` plus zero-mean Gaussian noise with
    standard deviation ``noise_rel`` times the blurred image's mean,
    deterministic for a fixed ``seed``.  The recovery problem carries
    ``lam_reg`` on the total variation, ``mu_reg_scale * initial_l`` on the
    Tikhonov term, and starts from the observed image.
    """
    clean = np.asarray(clean, dtype=float)
    if clean.ndim != 2 or clean.shape[0] != clean.shape[1]:
        raise ValueError("clean image must be square")
    n = clean.shape[0]
    blurred = box_blur(clean, kernel_size)
    noise_std = noise_rel * float(blurred.mean())
    rng = np.random.default_rng(seed)
    observed = blurred + noise_std * rng.standard_normal((n, n))
    op = operator_from_matrix(blur_matrix(n, kernel_size), (n, n), (n, n),
                              norm_bound=1.0)
    return TvProblem(observed=observed, blur=op, lam_reg=lam_reg,
                     mu_reg=mu_reg_scale * initial_l, lipschitz=initial_l)


def make_piecewise_image(n: int, seed: int = 0, blocks: int = 6) -> np.ndarray:
    """Synthetic piecewise-constant test image with values in [0, 1]."""
    rng = np.random.default_rng(seed)
    img = np.full((n, n), 0.2)
    for _ in range(blocks):
        i0, j0 = rng.integers(0, n - 2, size=2)
        h = int(rng.integers(2, max(3, n // 2)))
        w = int(rng.integers(2, max(3, n // 2)))
        img[i0:min(i0 + h, n), j0:min(j0 + w, n)] = rng.uniform(0.1, 1.0)
    return img
