"""Classical denoisers ``D_sigma(v)`` for plug-and-play and RED.

A denoiser is any callable ``d(v, sigma) -> array`` of the same shape.
``sigma`` lives on the internal [0, 1] sample scale. Frames of a 3D
volume are denoised independently.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DomainError, ShapeError
from .linops import BlurKernel, _circ_conv
from .prox import ProximalMap, prox_tv

__all__ = [
    "Denoiser",
    "GaussianFilter",
    "TVDenoiser",
    "MedianFilter",
    "LinearSymmetric",
    "ProxDenoiser",
    "IdentityDenoiser",
    "make_denoiser",
    "denoise",
    "red_regularizer_value",
    "red_gradient",
    "local_homogeneity_defect",
    "as_prox",
]


class Denoiser:
    kind = "abstract"

    def __call__(self, v, sigma: float):
        if sigma < 0:
            raise DomainError(f"denoising strength must be nonnegative, got {sigma}")
        v = np.asarray(v, dtype=np.float64)
        out = self._denoise(v, float(sigma))
        if out.shape != v.shape:
            raise ShapeError(f"{type(self).__name__} changed shape {v.shape} -> {out.shape}")
        return out

    def _denoise(self, v, sigma):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


def _per_frame_sigma(v, s):
    return (0.0,) * (v.ndim - 2) + (s, s)


class GaussianFilter(Denoiser):
    """Circular Gaussian smoothing with std ``scale * sigma`` pixels, cut at 3 std."""

    kind = "gaussian_filter"

    def __init__(self, scale: float = 1.0):
        self.scale = float(scale)

    def _denoise(self, v, sigma):
        std = self.scale * sigma
        if std == 0.0:
            return v.copy()
        return ndimage.gaussian_filter(v, _per_frame_sigma(v, std), mode="wrap", truncate=3.0)


class TVDenoiser(Denoiser):
    """Isotropic TV prox with weight ``weight * sigma``."""

    kind = "tv_denoiser"

    def __init__(self, weight: float = 1.0, inner_iters: int = 30, isotropic: bool = True):
        self.weight = float(weight)
        self.inner_iters = int(inner_iters)
        self.isotropic = isotropic

    def _denoise(self, v, sigma):
        return prox_tv(v, self.weight * sigma, self.inner_iters, self.isotropic)


class MedianFilter(Denoiser):
    """Windowed median with circular boundary. Ignores ``sigma``."""

    kind = "median_filter"

    def __init__(self, size: int = 3):
        self.size = int(size)

    def _denoise(self, v, sigma):
        size = (1,) * (v.ndim - 2) + (self.size, self.size)
        return ndimage.median_filter(v, size=size, mode="wrap")


class LinearSymmetric(Denoiser):
    """``f(x) = W x`` with ``W`` a circular convolution whose matrix is symmetric.

    A symmetric ``W`` needs a point-symmetric kernel (``h[-i, -j] == h[i, j]``).
    Ignores ``sigma``; this is the regime where the RED gradient rule is exact.
    """

    kind = "linear_symmetric"

    def __init__(self, kernel=None):
        if kernel is None:
            kernel = np.array([[0.0, 0.125, 0.0], [0.125, 0.5, 0.125], [0.0, 0.125, 0.0]])
        self.kernel = BlurKernel(kernel)
        if not np.allclose(self.kernel.taps, self.kernel.taps[::-1, ::-1], rtol=0, atol=1e-15):
            raise DomainError("linear_symmetric kernel must be point-symmetric")

    def _denoise(self, v, sigma):
        return _circ_conv(v, self.kernel)


class IdentityDenoiser(Denoiser):
    kind = "identity"

    def _denoise(self, v, sigma):
        return v.copy()


class ProxDenoiser(Denoiser):
    """A prox map posing as a denoiser: ``D(v) = prox(v, weight)``; ignores ``sigma``."""

    kind = "prox_adapter"

    def __init__(self, prox: ProximalMap, weight: float):
        self.prox = prox
        self.weight = float(weight)

    def _denoise(self, v, sigma):
        return self.prox(v, self.weight)


def make_denoiser(kind: str, **params) -> Denoiser:
    table = {
        "gaussian_filter": GaussianFilter,
        "tv_denoiser": TVDenoiser,
        "median_filter": MedianFilter,
        "linear_symmetric": LinearSymmetric,
        "identity": IdentityDenoiser,
    }
    try:
        return table[kind](**params)
    except KeyError:
        raise ValueError(f"unknown denoiser {kind!r}; expected one of {sorted(table)}") from None


def denoise(d, v, sigma: float):
    return d(v, sigma)


def as_prox(d, sigma: float | None = None) -> ProximalMap:
    """Wrap a denoiser as a prox map (``sigma=None`` forwards the call-time weight)."""
    return ProximalMap("denoiser_adapter", denoiser=d, sigma=sigma)


def red_regularizer_value(d, x, lam: float, sigma: float = 0.0) -> float:
    """``(lam/2) x^T (x - f(x))``."""
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * lam * float(np.vdot(x, x - d(x, sigma)))


def red_gradient(d, x, lam: float, sigma: float = 0.0):
    """``lam (x - f(x))``, the RED gradient rule."""
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    return lam * (x - d(x, sigma))


def local_homogeneity_defect(d, x, eps: float, sigma: float = 0.0) -> float:
    """``||(1+eps) f(x) - f((1+eps) x)|| / ||f(x)||``; zero for homogeneous ``f``."""
    if not 0 < abs(eps) <= 1e-2:
        raise DomainError(f"eps must satisfy 0 < |eps| <= 1e-2, got {eps}")
    x = np.asarray(x, dtype=np.float64)
    fx = d(x, sigma)
    nfx = float(np.linalg.norm(fx))
    if nfx == 0.0:
        raise DomainError("denoiser output is zero; defect undefined")
    return float(np.linalg.norm((1 + eps) * fx - d((1 + eps) * x, sigma))) / nfx
