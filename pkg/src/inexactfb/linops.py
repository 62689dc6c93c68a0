"""Dense array arithmetic and the structured linear operators shared by all solvers.

Vectors and matrices are plain ``numpy.float64`` arrays (row-major).  Iterates
may be of any shape; every reduction here flattens in C order, so results are
deterministic for a fixed input.  All functions are pure and safe to call from
multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "dot",
    "norm",
    "norm_sq",
    "check_finite",
    "image_gradient",
    "image_divergence",
    "box_blur",
    "blur_matrix",
    "LinearOperator",
    "operator_from_matrix",
    "power_iteration",
    "adjoint_mismatch",
    "save_matrix_csv",
    "load_matrix_csv",
]


def dot(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product of two arrays of identical shape (flattened, fixed order)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch in dot: {a.shape} vs {b.shape}")
    return float(np.vdot(a, b))


def norm(a: np.ndarray) -> float:
    """Euclidean (Frobenius) norm of the flattened array."""
    return float(np.linalg.norm(np.asarray(a, dtype=float).ravel()))


def norm_sq(a: np.ndarray) -> float:
    """Squared Euclidean norm; avoids the square root of :func:`norm`."""
    a = np.asarray(a, dtype=float)
    return float(np.vdot(a, a))


def check_finite(a: np.ndarray, what: str = "array") -> np.ndarray:
    """Return ``a`` unchanged, raising ``ValueError`` on NaN or infinity."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite values in {what}")
    return a


# ---------------------------------------------------------------------------
# Discrete image calculus
# ---------------------------------------------------------------------------

def image_gradient(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward-difference gradient of a 2-D image with Neumann boundary.

    Returns ``(gh, gv)`` where ``gh[i, j] = x[i, j+1] - x[i, j]`` (zero in the
    last column) and ``gv[i, j] = x[i+1, j] - x[i, j]`` (zero in the last row).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("image_gradient expects a 2-D array")
    gh = np.zeros_like(x)
    gv = np.zeros_like(x)
    gh[:, :-1] = x[:, 1:] - x[:, :-1]
    gv[:-1, :] = x[1:, :] - x[:-1, :]
    return gh, gv


def image_divergence(p: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Discrete divergence, the exact negative adjoint of :func:`image_gradient`.

    Satisfies ``dot(gh, ph) + dot(gv, pv) == -dot(x, image_divergence((ph, pv)))``
    for all images ``x`` with ``(gh, gv) = image_gradient(x)``.
    """
    ph, pv = p
    ph = np.asarray(ph, dtype=float)
    pv = np.asarray(pv, dtype=float)
    if ph.shape != pv.shape or ph.ndim != 2:
        raise ValueError("divergence expects two 2-D fields of equal shape")
    out = np.zeros_like(ph)
    # horizontal component: transpose of the forward column difference
    out[:, 0] += ph[:, 0]
    out[:, 1:-1] += ph[:, 1:-1] - ph[:, :-2]
    out[:, -1] += -ph[:, -2]
    # vertical component
    out[0, :] += pv[0, :]
    out[1:-1, :] += pv[1:-1, :] - pv[:-2, :]
    out[-1, :] += -pv[-2, :]
    return out


def box_blur(x: np.ndarray, kernel_size: int) -> np.ndarray:
    """Uniform box blur with symmetric (half-sample reflect) boundary padding.

    The padding mirrors edge samples (``[b, a | a, b, c, ...]``), which keeps
    the operator doubly stochastic: rows and columns of its matrix sum to one,
    hence its spectral norm never exceeds 1.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("box_blur expects a 2-D array")
    if kernel_size % 2 != 1 or kernel_size < 1:
        raise ValueError("kernel_size must be a positive odd integer")
    r = kernel_size // 2
    out = np.pad(x, r, mode="symmetric")
    # separable moving sum: cumsum with a leading zero gives window sums by slicing
    for axis in (0, 1):
        out = np.moveaxis(out, axis, 0)
        c = np.zeros((out.shape[0] + 1,) + out.shape[1:])
        np.cumsum(out, axis=0, out=c[1:])
        out = np.moveaxis(c[kernel_size:] - c[:-kernel_size], 0, axis)
    return out / float(kernel_size**2)


def blur_matrix(n: int, kernel_size: int) -> np.ndarray:
    """Dense matrix of :func:`box_blur` acting on flattened n-by-n images."""
    m = np.empty((n * n, n * n))
    basis = np.zeros((n, n))
    for j in range(n * n):
        basis.flat[j] = 1.0
        m[:, j] = box_blur(basis, kernel_size).ravel()
        basis.flat[j] = 0.0
    return m


# ---------------------------------------------------------------------------
# Linear operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearOperator:
    """A forward/adjoint map pair with a declared operator-norm upper bound."""

    forward: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    norm_bound: float
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)


def operator_from_matrix(m: np.ndarray, in_shape: tuple[int, ...],
                         out_shape: tuple[int, ...],
                         norm_bound: float | None = None) -> LinearOperator:
    """Wrap a dense matrix acting on flattened arrays as a LinearOperator."""
    m = np.asarray(m, dtype=float)
    if norm_bound is None:
        norm_bound = float(np.linalg.norm(m, 2))
    return LinearOperator(
        forward=lambda x: (m @ np.asarray(x, dtype=float).ravel()).reshape(out_shape),
        adjoint=lambda y: (m.T @ np.asarray(y, dtype=float).ravel()).reshape(in_shape),
        norm_bound=norm_bound,
        in_shape=in_shape,
        out_shape=out_shape,
    )


def power_iteration(forward: Callable[[np.ndarray], np.ndarray],
                    adjoint: Callable[[np.ndarray], np.ndarray],
                    shape: tuple[int, ...],
                    iters: int = 500,
                    rel_tol: float = 1e-10,
                    seed: int = 0) -> float:
    """Estimate the spectral norm of an operator by power iteration on A*A.

    Deterministic for fixed ``seed``.  The estimate converges from below for
    symmetric positive semidefinite ``A*A``, so it never exceeds the true norm
    by more than roundoff.
    """
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(shape)
    u /= norm(u)
    est = 0.0
    for _ in range(iters):
        w = adjoint(forward(u))
        nw = norm(w)
        if nw == 0.0:
            return 0.0
        new_est = float(np.sqrt(nw))
        u = w / nw
        if est > 0 and abs(new_est - est) <= rel_tol * est:
            est = new_est
            break
        est = new_est
    return est


def adjoint_mismatch(op: LinearOperator, probes: int = 100, seed: int = 0) -> float:
    """Max relative defect |<Au, v> - <u, A^T v>| / (|u||v|) over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        u = rng.standard_normal(op.in_shape)
        v = rng.standard_normal(op.out_shape)
        lhs = dot(op.forward(u), v)
        rhs = dot(u, op.adjoint(v))
        worst = max(worst, abs(lhs - rhs) / (norm(u) * norm(v)))
    return worst


# ---------------------------------------------------------------------------
# CSV fixtures
# ---------------------------------------------------------------------------

def save_matrix_csv(path, m: np.ndarray) -> None:
    """Write a matrix as plain comma-separated rows (17 significant digits)."""
    np.savetxt(path, np.atleast_2d(np.asarray(m, dtype=float)),
               delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix_csv`."""
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
