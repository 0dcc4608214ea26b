"""Dense brute-force references for checking the structured fast paths.

Only meant for desk-scale problems; nothing here is used by the solvers.
The linear solves use a plain Gaussian elimination so that they share no
code path with the operators they check.
"""
from __future__ import annotations

import numpy as np

from .errors import IllConditionedError, SizeError
from .linops import LinearOperator

DEFAULT_MAX_UNKNOWNS = 4096
COND_LIMIT = 1e12
LSQ_RIDGE = 1e-12


def materialize(op: LinearOperator, max_unknowns: int = DEFAULT_MAX_UNKNOWNS) -> np.ndarray:
    """Dense matrix whose column ``j`` is ``A e_j`` raveled (frame-slowest order)."""
    n = op.domain_size
    if n > max_unknowns or op.range_size > max_unknowns:
        raise SizeError(f"{op!r} too large to materialize (cap {max_unknowns})")
    out = np.empty((op.range_size, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        out[:, j] = op.apply(e.reshape(op.domain_shape)).ravel()
        e[j] = 0.0
    return out


def materialize_adjoint(op: LinearOperator, max_unknowns: int = DEFAULT_MAX_UNKNOWNS) -> np.ndarray:
    """Dense matrix of ``A^T`` built column by column from the adjoint."""
    m = op.range_size
    if m > max_unknowns or op.domain_size > max_unknowns:
        raise SizeError(f"{op!r} too large to materialize (cap {max_unknowns})")
    out = np.empty((op.domain_size, m))
    e = np.zeros(m)
    for j in range(m):
        e[j] = 1.0
        out[:, j] = op.adjoint(e.reshape(op.range_shape)).ravel()
        e[j] = 0.0
    return out


def gauss_solve(a, b) -> np.ndarray:
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError(f"incompatible system {a.shape} / {b.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) <= 1e-300 or abs(a[piv, col]) <= scale * 1e-15 * n:
            raise IllConditionedError(f"singular matrix (pivot {a[piv, col]:.3e} in column {col})")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        f = a[col + 1:, col] / a[col, col]
        a[col + 1:, col:] -= np.outer(f, a[col, col:])
        b[col + 1:] -= np.outer(f, b[col]).reshape(b[col + 1:].shape)
    x = np.empty_like(b)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x


def dense_solve_normal(m, gamma: float, b) -> np.ndarray:
    """``(I + gamma M^T M)^{-1} b`` by direct elimination."""
    m = np.asarray(m, dtype=np.float64)
    lhs = np.eye(m.shape[1]) + gamma * (m.T @ m)
    cond = np.linalg.cond(lhs)
    if not cond < COND_LIMIT:
        raise IllConditionedError(f"normal matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    return gauss_solve(lhs, np.asarray(b, dtype=np.float64))


def dense_least_squares(m, y) -> np.ndarray:
    """Minimum-norm least squares through ridge-regularized normal equations."""
    m = np.asarray(m, dtype=np.float64)
    lhs = m.T @ m + LSQ_RIDGE * np.eye(m.shape[1])
    return gauss_solve(lhs, m.T @ np.asarray(y, dtype=np.float64))


def dense_projection(m, theta, y) -> np.ndarray:
    """``theta + M^T (M M^T)^{-1} (y - M theta)``: projection onto ``{M x = y}``."""
    m = np.asarray(m, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    return theta + m.T @ gauss_solve(m @ m.T, np.asarray(y, dtype=np.float64) - m @ theta)
