"""Snapshot compressive imaging: ``nframe`` mask-modulated frames summed into one image.

Masks and scenes are stored ``(nframe, nrow, ncol)``; the measurement is
``(nrow, ncol)``. Stacking frames slowest makes the sensing matrix the
block row ``[D_1, ..., D_nframe]`` of diagonal matrices ``D_k = diag(M_k)``,
so ``A A^T`` is diagonal with entries ``sum_k M_k^2``.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeError, SizeError
from .linops import LinearOperator
from .volume import check_finite

__all__ = [
    "SciOperator",
    "sci_forward",
    "sci_adjoint",
    "gram_diagonal",
    "sci_gap_x_update",
    "sci_admm_x_update",
    "woodbury_check",
]


def _check_masks(masks):
    masks = check_finite(np.asarray(masks, dtype=np.float64), "masks")
    if masks.ndim != 3:
        raise ShapeError(f"masks must be 3D (nframe, nrow, ncol), got shape {masks.shape}")
    return masks


def sci_forward(masks, x):
    """``y = sum_k M_k * x_k``."""
    masks = _check_masks(masks)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != masks.shape:
        raise ShapeError(f"scene shape {x.shape} != mask shape {masks.shape}")
    return np.sum(masks * x, axis=0)


def sci_adjoint(masks, y):
    """Frame ``k`` of the result is ``M_k * y``."""
    masks = _check_masks(masks)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != masks.shape[1:]:
        raise ShapeError(f"measurement shape {y.shape} != mask frame shape {masks.shape[1:]}")
    return masks * y[np.newaxis]


def gram_diagonal(masks):
    """Per-pixel ``sum_k M_k^2``: the diagonal of ``A A^T``."""
    masks = _check_masks(masks)
    return np.sum(masks ** 2, axis=0)


class SciOperator(LinearOperator):
    """SCI sensing operator with the diagonal ``A A^T`` fast paths.

    ``phi_sum`` has zero entries (pixels no mask ever opens) replaced by 1,
    as a safe divisor; ``phi_sum_raw`` keeps the true values and
    ``zero_count`` how many were replaced.
    """

    has_normal_solve = True
    has_gram_diag = True

    def __init__(self, masks):
        masks = _check_masks(masks)
        super().__init__(masks.shape, masks.shape[1:])
        self.masks = masks
        self.phi_sum_raw = gram_diagonal(masks)
        zero = self.phi_sum_raw == 0
        self.zero_count = int(zero.sum())
        self.phi_sum = np.where(zero, 1.0, self.phi_sum_raw)

    @property
    def nframe(self) -> int:
        return self.masks.shape[0]

    @property
    def compression_ratio(self) -> float:
        return self.range_size / self.domain_size

    def _apply(self, x):
        return np.sum(self.masks * x, axis=0)

    def _adjoint(self, y):
        return self.masks * y[np.newaxis]

    def gram_diag(self):
        return self.phi_sum.copy()

    def normal_solve(self, b, gamma):
        """Woodbury: ``b - gamma A^T[(A b) / (1 + gamma phi)]``."""
        b = self._check_domain(b)
        return b - gamma * self._adjoint(self._apply(b) / (1.0 + gamma * self.phi_sum_raw))


def sci_gap_x_update(op: SciOperator, theta, y_eff):
    """Euclidean projection of ``theta`` onto ``{x : A x = y_eff}``."""
    theta = np.asarray(theta, dtype=np.float64)
    return theta + op.adjoint((np.asarray(y_eff, dtype=np.float64) - op.apply(theta)) / op.phi_sum)


def sci_admm_x_update(op: SciOperator, z, s, y, gamma: float):
    """``(I + gamma A^T A)^{-1}(z - s + gamma A^T y)`` with per-pixel divisor ``gamma phi + 1``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    v = np.asarray(z, dtype=np.float64) - np.asarray(s, dtype=np.float64)
    return v + gamma * op.adjoint((np.asarray(y, dtype=np.float64) - op.apply(v)) / (gamma * op.phi_sum_raw + 1.0))


def woodbury_check(op: LinearOperator, gamma: float, probe, max_unknowns: int = 512) -> float:
    """Max-abs gap between ``(I + g A^T A)^{-1} v`` and ``(I - g A^T (I + g A A^T)^{-1} A) v``.

    Both sides are evaluated from the dense materialized matrix.
    """
    from . import oracle

    if op.domain_size > max_unknowns:
        raise SizeError(f"woodbury_check is for desk scale (<= {max_unknowns} unknowns), got {op.domain_size}")
    m = oracle.materialize(op)
    v = np.asarray(probe, dtype=np.float64).ravel()
    lhs = oracle.dense_solve_normal(m, gamma, v)
    small = np.eye(m.shape[0]) + gamma * (m @ m.T)
    rhs = v - gamma * (m.T @ oracle.gauss_solve(small, m @ v))
    return float(np.max(np.abs(lhs - rhs)))
