"""Synthetic ground truths and random sampling patterns."""
from __future__ import annotations

import numpy as np

from .errors import DomainError


def moving_square(nrow: int, ncol: int, nframe: int, background: float = 0.1, level: float = 0.9):
    """Square of side ``ncol // 4`` moving one pixel right per frame (wrapping)."""
    side = max(1, ncol // 4)
    r0 = (nrow - side) // 2
    c0 = (ncol - side) // 2 - nframe // 2
    vol = np.full((nframe, nrow, ncol), background)
    for k in range(nframe):
        cols = (np.arange(side) + c0 + k) % ncol
        vol[k, r0:r0 + side, cols] = level
    return vol


def cartoon(nrow: int, ncol: int):
    """Piecewise-constant image: background, a bright rectangle and a darker disc."""
    img = np.full((nrow, ncol), 0.2)
    img[nrow // 4: nrow // 2 + nrow // 8, ncol // 8: ncol // 2] = 0.8
    rr, cc = np.mgrid[:nrow, :ncol]
    disc = (rr - 0.65 * nrow) ** 2 + (cc - 0.65 * ncol) ** 2 <= (0.2 * min(nrow, ncol)) ** 2
    img[disc] = 0.5
    return img


def binary_masks(shape, density: float, seed: int):
    """Bernoulli(``density``) 0/1 masks."""
    if not 0.0 < density <= 1.0:
        raise DomainError(f"mask density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    return (rng.random(shape) < density).astype(np.float64)
