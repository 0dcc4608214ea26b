"""Proximal maps ``prox_{tau r}(z) = argmin_x 0.5||x - z||^2 + tau r(x)``.

``tau`` is always supplied at call time and is the *full* weight: solvers
pass the product of their step size and the regularization weight.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainError
from .linops import Gradient, forward_diff, forward_diff_adjoint

__all__ = [
    "ProximalMap",
    "prox_l1",
    "prox_l2sq",
    "prox_tv",
    "prox_nonneg",
    "prox_conjugate",
    "tv_value",
    "tv_dual_objective",
    "TV_STEP",
]

#: dual step of the TV projection, 1/||D||^2 for circular forward differences
TV_STEP = 1.0 / 8.0


def _check_tau(tau):
    if tau < 0:
        raise DomainError(f"prox weight must be nonnegative, got {tau}")


def prox_l1(z, tau: float):
    """Soft thresholding."""
    _check_tau(tau)
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def prox_l2sq(z, tau: float):
    """Prox of ``0.5||x||^2``."""
    _check_tau(tau)
    return np.asarray(z, dtype=np.float64) / (1.0 + tau)


def prox_nonneg(z, tau: float = 0.0):
    """Projection on the nonnegative orthant; ``tau`` is irrelevant for an indicator."""
    return np.maximum(np.asarray(z, dtype=np.float64), 0.0)


def tv_value(x, isotropic: bool = True) -> float:
    """Total variation with circular forward differences, summed over frames."""
    x = np.asarray(x, dtype=np.float64)
    return _tv_norm(Gradient(x.shape)._apply(x), isotropic)


def _project_dual(p, isotropic):
    if isotropic:
        mag = np.maximum(1.0, np.sqrt(p[0] ** 2 + p[1] ** 2))
        return p / mag
    return np.clip(p, -1.0, 1.0)


def _tv_norm(d, isotropic):
    if isotropic:
        return float(np.sqrt(d[0] ** 2 + d[1] ** 2).sum())
    return float(np.abs(d).sum())


def prox_tv(z, tau: float, inner_iters: int = 30, isotropic: bool = True, tol: float = 0.0):
    """TV prox by projected gradient on the dual.

    Solves ``min_{|p| <= 1} 0.5||z - tau D^T p||^2`` with the fixed step 1/8;
    each dual iterate gives a primal candidate ``z - tau D^T p``. The
    candidate with the lowest primal objective is returned, which makes the
    result monotone in ``inner_iters``. The dual ball is pointwise Euclidean
    for isotropic TV and a box for anisotropic TV; frames are independent.
    Iteration stops early once no dual sample moves by more than ``tol``.
    """
    _check_tau(tau)
    if inner_iters < 1:
        raise ValueError("inner_iters must be >= 1")
    z = np.asarray(z, dtype=np.float64)
    if tau == 0.0:
        return z.copy()
    step = TV_STEP / tau
    if not np.isfinite(step):
        return z.copy()  # tau below float resolution: prox is the identity
    p = np.zeros((2,) + z.shape)
    p_new = np.empty_like(p)
    gx = np.empty_like(p)
    dtp = np.empty_like(z)
    x = z.copy()
    best, best_obj = z.copy(), np.inf
    for it in range(inner_iters + 1):
        if it:
            forward_diff_adjoint(p, dtp)
            np.multiply(dtp, -tau, out=x)
            x += z
        forward_diff(x, gx)
        r = x - z
        obj = 0.5 * float(np.vdot(r, r)) + tau * _tv_norm(gx, isotropic)
        if obj < best_obj:
            best_obj = obj
            best[...] = x
        if it == inner_iters:
            break
        np.multiply(gx, step, out=p_new)
        p_new += p
        p_new = _project_dual(p_new, isotropic)
        moved = float(np.max(np.abs(p_new - p)))
        p, p_new = p_new, p
        if moved <= tol:
            x = z - tau * forward_diff_adjoint(p, dtp)
            r = x - z
            if 0.5 * float(np.vdot(r, r)) + tau * tv_value(x, isotropic) < best_obj:
                best = x
            break
    return best


def tv_dual_objective(z, tau, p):
    """Dual value at ``p``; the primal objective is bounded below by it."""
    grad = Gradient(np.shape(z))
    x = z - tau * grad._adjoint(p)
    return 0.5 * (np.vdot(z, z) - np.vdot(x, x))


_KINDS = ("l1", "l2sq", "tv_iso", "tv_aniso", "nonneg", "denoiser_adapter")


@dataclass(frozen=True)
class ProximalMap:
    """A regularizer ``r`` that knows its prox and, when finite, its value.

    ``denoiser_adapter`` wraps any denoiser ``d(v, sigma)`` so that it can
    stand in for a prox; the call-time weight is then passed as ``sigma``
    unless ``sigma`` is fixed at construction.
    """

    kind: str
    inner_iters: int = 30
    inner_tol: float = 0.0
    denoiser: Any = None
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown prox kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "denoiser_adapter" and self.denoiser is None:
            raise ValueError("denoiser_adapter needs a denoiser")

    def __call__(self, z, tau: float):
        k = self.kind
        if k == "l1":
            return prox_l1(z, tau)
        if k == "l2sq":
            return prox_l2sq(z, tau)
        if k == "nonneg":
            return prox_nonneg(z)
        if k == "tv_iso":
            return prox_tv(z, tau, self.inner_iters, True, self.inner_tol)
        if k == "tv_aniso":
            return prox_tv(z, tau, self.inner_iters, False, self.inner_tol)
        _check_tau(tau)
        return self.denoiser(z, tau if self.sigma is None else self.sigma)

    def value(self, x) -> float | None:
        """``r(x)``, or ``None`` when not available (denoiser adapters)."""
        x = np.asarray(x, dtype=np.float64)
        k = self.kind
        if k == "l1":
            return float(np.abs(x).sum())
        if k == "l2sq":
            return 0.5 * float(np.vdot(x, x))
        if k == "nonneg":
            return 0.0 if np.all(x >= 0) else float("inf")
        if k == "tv_iso":
            return tv_value(x, isotropic=True)
        if k == "tv_aniso":
            return tv_value(x, isotropic=False)
        return None

    def conjugate(self, x, sigma: float, weight: float = 1.0):
        """``prox_{sigma (weight r)^*}(x)`` through the Moreau identity."""
        return prox_conjugate(self, x, sigma, weight)


def prox_conjugate(p: ProximalMap, x, sigma: float, weight: float = 1.0):
    """Moreau identity: ``prox_{sigma f*}(x) = x - sigma prox_{f/sigma}(x/sigma)``.

    ``f = weight * r``, so the inner prox is called with weight ``weight/sigma``.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=np.float64)
    return x - sigma * p(x / sigma, weight / sigma)
