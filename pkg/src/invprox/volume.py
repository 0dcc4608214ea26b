"""Dense sample grids and the basic arithmetic every other module leans on.

A volume is a float64 :class:`numpy.ndarray`. Single images are stored as
``(nrow, ncol)`` and stacks of frames as ``(nframe, nrow, ncol)`` so that a
C-order ravel is row-major with the frame index slowest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonFiniteError, ShapeError

__all__ = [
    "Shape",
    "as_volume",
    "check_finite",
    "check_same_shape",
    "elementwise",
    "inner",
    "norm2_sq",
    "psnr",
]


@dataclass(frozen=True)
class Shape:
    """Extents of a volume in pixels; ``nframe == 1`` means a plain image."""

    nrow: int
    ncol: int
    nframe: int = 1

    def __post_init__(self):
        for name in ("nrow", "ncol", "nframe"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ShapeError(f"{name} must be a positive integer, got {v!r}")

    @property
    def size(self) -> int:
        return self.nrow * self.ncol * self.nframe

    @property
    def dims(self) -> tuple[int, ...]:
        """numpy array shape for this volume."""
        if self.nframe == 1:
            return (self.nrow, self.ncol)
        return (self.nframe, self.nrow, self.ncol)

    @classmethod
    def of(cls, arr: np.ndarray) -> "Shape":
        if arr.ndim == 2:
            return cls(int(arr.shape[0]), int(arr.shape[1]))
        if arr.ndim == 3:
            return cls(int(arr.shape[1]), int(arr.shape[2]), int(arr.shape[0]))
        raise ShapeError(f"volumes are 2D or 3D, got ndim={arr.ndim}")


def check_finite(x: np.ndarray, name: str = "volume") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        idx = int(np.flatnonzero(~np.isfinite(np.ravel(x)))[0])
        raise NonFiniteError(f"{name} has a non-finite sample at flat index {idx}")
    return x


def as_volume(x, name: str = "volume") -> np.ndarray:
    """Coerce to a float64 array and reject NaN/Inf."""
    arr = np.asarray(x, dtype=np.float64)
    return check_finite(arr, name)


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "operands"):
    if np.shape(a) != np.shape(b):
        raise ShapeError(f"{what} differ in shape: {np.shape(a)} vs {np.shape(b)}")


_KINDS = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.divide,
}


def elementwise(a, b, kind: str) -> np.ndarray:
    """Apply ``add``, ``sub``, ``mul`` or ``div`` sample by sample."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape(a, b)
    try:
        fn = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown elementwise kind {kind!r}; expected one of {sorted(_KINDS)}") from None
    if kind == "div":
        zero = np.flatnonzero(np.ravel(b) == 0)
        if zero.size:
            raise DomainError(f"division by zero at flat index {int(zero[0])}")
    return check_finite(fn(a, b), f"elementwise {kind} result")


def inner(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


def norm2_sq(a) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    return float(np.dot(a, a))


def psnr(reference, estimate, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` when the inputs coincide."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    check_same_shape(reference, estimate)
    if peak <= 0:
        raise DomainError(f"peak must be positive, got {peak}")
    mse = float(np.mean((reference - estimate) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)
