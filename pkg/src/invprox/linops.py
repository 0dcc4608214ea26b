"""Forward operators ``A`` with adjoints and optional closed-form fast paths.

Every operator maps arrays of ``domain_shape`` to ``range_shape``. Two
capability flags advertise structure that solvers may exploit:

``has_normal_solve``
    ``normal_solve(b, gamma)`` evaluates ``(I + gamma A^T A)^{-1} b`` exactly.
``has_gram_diag``
    ``A A^T`` is diagonal and ``gram_diag()`` returns it (range-shaped).

Solvers fall back to conjugate gradients when a flag is absent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError
from .volume import check_finite

__all__ = [
    "LinearOperator",
    "Identity",
    "Mask",
    "Convolution",
    "SuperResolution",
    "Composition",
    "MatrixOperator",
    "Gradient",
    "BlurKernel",
    "make_identity",
    "make_mask",
    "make_conv",
    "make_superres",
    "make_gradient",
    "compose",
    "power_iteration_norm",
    "gaussian_kernel",
    "box_kernel",
]


class LinearOperator:
    """Base class; subclasses implement ``_apply`` and ``_adjoint``."""

    has_normal_solve = False
    has_gram_diag = False

    def __init__(self, domain_shape, range_shape):
        self.domain_shape = tuple(int(s) for s in domain_shape)
        self.range_shape = tuple(int(s) for s in range_shape)

    @property
    def domain_size(self) -> int:
        return int(np.prod(self.domain_shape))

    @property
    def range_size(self) -> int:
        return int(np.prod(self.range_shape))

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.domain_shape:
            raise ShapeError(f"{type(self).__name__}.apply expects {self.domain_shape}, got {x.shape}")
        return self._apply(x)

    def adjoint(self, y):
        y = np.asarray(y, dtype=np.float64)
        if y.shape != self.range_shape:
            raise ShapeError(f"{type(self).__name__}.adjoint expects {self.range_shape}, got {y.shape}")
        return self._adjoint(y)

    __call__ = apply

    def normal_solve(self, b, gamma: float):
        raise NotImplementedError(f"{type(self).__name__} has no closed-form normal solve")

    def gram_diag(self):
        raise NotImplementedError(f"{type(self).__name__} has no diagonal Gram matrix")

    def _check_domain(self, b):
        b = np.asarray(b, dtype=np.float64)
        if b.shape != self.domain_shape:
            raise ShapeError(f"expected domain shape {self.domain_shape}, got {b.shape}")
        return b

    def _apply(self, x):
        raise NotImplementedError

    def _adjoint(self, y):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.domain_shape} -> {self.range_shape})"


class Identity(LinearOperator):
    """``c * I``; ``c = 1`` is the denoising forward model."""

    has_normal_solve = True
    has_gram_diag = True

    def __init__(self, shape, scale: float = 1.0):
        super().__init__(shape, shape)
        self.scale = float(scale)

    def _apply(self, x):
        return x.copy() if self.scale == 1.0 else self.scale * x

    _adjoint = _apply

    def normal_solve(self, b, gamma):
        b = self._check_domain(b)
        return b / (1.0 + gamma * self.scale ** 2)

    def gram_diag(self):
        return np.full(self.range_shape, self.scale ** 2)


class Mask(LinearOperator):
    """Diagonal 0/1 sampling matrix of the inpainting model."""

    has_normal_solve = True
    has_gram_diag = True

    def __init__(self, mask):
        mask = check_finite(np.asarray(mask, dtype=np.float64), "mask")
        bad = np.flatnonzero((mask != 0) & (mask != 1))
        if bad.size:
            raise DomainError(f"mask must be binary; sample {int(bad[0])} is {mask.ravel()[bad[0]]!r}")
        super().__init__(mask.shape, mask.shape)
        self.mask = mask

    def _apply(self, x):
        return self.mask * x

    _adjoint = _apply

    def normal_solve(self, b, gamma):
        b = self._check_domain(b)
        return b / (1.0 + gamma * self.mask)

    def gram_diag(self):
        return self.mask.copy()


@dataclass(frozen=True)
class BlurKernel:
    taps: np.ndarray
    normalization: float = field(init=False)

    def __post_init__(self):
        taps = check_finite(np.array(self.taps, dtype=np.float64), "kernel")
        if taps.ndim != 2 or taps.shape[0] % 2 == 0 or taps.shape[1] % 2 == 0:
            raise ShapeError(f"kernel must be 2D with odd extents, got {taps.shape}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "normalization", float(taps.sum()))

    @property
    def center(self):
        return self.taps.shape[0] // 2, self.taps.shape[1] // 2

    def offsets(self):
        """Yield ``(weight, (drow, dcol))`` for every nonzero tap."""
        cr, cc = self.center
        for (a, b), w in np.ndenumerate(self.taps):
            if w != 0.0:
                yield float(w), (a - cr, b - cc)


def _as_kernel(kernel) -> BlurKernel:
    return kernel if isinstance(kernel, BlurKernel) else BlurKernel(kernel)


def gaussian_kernel(std: float, radius: int | None = None) -> np.ndarray:
    """Normalized separable Gaussian taps truncated at ``radius`` (default 3 std)."""
    if radius is None:
        radius = max(1, int(np.ceil(3 * std)))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (t / std) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


def box_kernel(size: int = 3) -> np.ndarray:
    return np.full((size, size), 1.0 / size ** 2)


def _circ_conv(x, kernel: BlurKernel):
    out = np.zeros_like(x)
    for w, shift in kernel.offsets():
        out += w * np.roll(x, shift, axis=(-2, -1))
    return out


def _circ_corr(y, kernel: BlurKernel):
    out = np.zeros_like(y)
    for w, (dr, dc) in kernel.offsets():
        out += w * np.roll(y, (-dr, -dc), axis=(-2, -1))
    return out


class Convolution(LinearOperator):
    """Per-frame 2D circular convolution ``h * x``."""

    has_normal_solve = True

    def __init__(self, kernel, shape):
        kernel = _as_kernel(kernel)
        shape = tuple(shape)
        if len(shape) not in (2, 3):
            raise ShapeError(f"convolution acts on 2D or 3D volumes, got {shape}")
        if kernel.taps.shape[0] > shape[-2] or kernel.taps.shape[1] > shape[-1]:
            raise ShapeError(f"kernel {kernel.taps.shape} larger than image {shape[-2:]}")
        super().__init__(shape, shape)
        self.kernel = kernel
        psf = np.zeros(shape[-2:])
        for w, (dr, dc) in kernel.offsets():
            psf[dr % shape[-2], dc % shape[-1]] += w
        self._otf = np.fft.fft2(psf)

    def _apply(self, x):
        return _circ_conv(x, self.kernel)

    def _adjoint(self, y):
        return _circ_corr(y, self.kernel)

    def normal_solve(self, b, gamma):
        b = self._check_domain(b)
        denom = 1.0 + gamma * np.abs(self._otf) ** 2
        return np.real(np.fft.ifft2(np.fft.fft2(b, axes=(-2, -1)) / denom, axes=(-2, -1)))


class SuperResolution(LinearOperator):
    """``S B``: circular blur, then keep every ``factor``-th row and column."""

    def __init__(self, kernel, hi_shape, factor: int):
        hi_shape = tuple(hi_shape)
        if factor < 1 or int(factor) != factor:
            raise ShapeError(f"factor must be a positive integer, got {factor!r}")
        factor = int(factor)
        if hi_shape[-2] % factor or hi_shape[-1] % factor:
            raise ShapeError(f"image extents {hi_shape[-2:]} not divisible by factor {factor}")
        lo_shape = hi_shape[:-2] + (hi_shape[-2] // factor, hi_shape[-1] // factor)
        super().__init__(hi_shape, lo_shape)
        self.blur = Convolution(kernel, hi_shape)
        self.factor = factor

    def _apply(self, x):
        f = self.factor
        return self.blur._apply(x)[..., ::f, ::f].copy()

    def _adjoint(self, y):
        f = self.factor
        up = np.zeros(self.domain_shape)
        up[..., ::f, ::f] = y
        return self.blur._adjoint(up)


class Composition(LinearOperator):
    """``outer ∘ inner``; closed-form capabilities are not inherited."""

    def __init__(self, outer: LinearOperator, inner: LinearOperator):
        if inner.range_shape != outer.domain_shape:
            raise ShapeError(f"cannot compose: inner range {inner.range_shape} != outer domain {outer.domain_shape}")
        super().__init__(inner.domain_shape, outer.range_shape)
        self.outer = outer
        self.inner = inner

    def _apply(self, x):
        return self.outer._apply(self.inner._apply(x))

    def _adjoint(self, y):
        return self.inner._adjoint(self.outer._adjoint(y))


class MatrixOperator(LinearOperator):
    """Explicit dense matrix acting on raveled arrays."""

    has_normal_solve = True

    def __init__(self, matrix, domain_shape=None, range_shape=None):
        m = check_finite(np.array(matrix, dtype=np.float64), "matrix")
        if m.ndim != 2:
            raise ShapeError("matrix must be 2D")
        domain_shape = (m.shape[1],) if domain_shape is None else tuple(domain_shape)
        range_shape = (m.shape[0],) if range_shape is None else tuple(range_shape)
        if int(np.prod(domain_shape)) != m.shape[1] or int(np.prod(range_shape)) != m.shape[0]:
            raise ShapeError(f"shapes {domain_shape}->{range_shape} do not fit matrix {m.shape}")
        super().__init__(domain_shape, range_shape)
        self.matrix = m

    def _apply(self, x):
        return (self.matrix @ x.ravel()).reshape(self.range_shape)

    def _adjoint(self, y):
        return (self.matrix.T @ y.ravel()).reshape(self.domain_shape)

    def normal_solve(self, b, gamma):
        b = self._check_domain(b)
        n = self.matrix.shape[1]
        lhs = np.eye(n) + gamma * (self.matrix.T @ self.matrix)
        return np.linalg.solve(lhs, b.ravel()).reshape(self.domain_shape)


class Gradient(LinearOperator):
    """Forward differences with circular boundary along rows and columns.

    The range stacks the two difference images on a new leading axis.
    Its squared norm is at most 8.
    """

    def __init__(self, shape):
        shape = tuple(shape)
        super().__init__(shape, (2,) + shape)

    def _apply(self, x):
        return forward_diff(x, np.empty(self.range_shape))

    def _adjoint(self, p):
        return forward_diff_adjoint(p, np.empty(self.domain_shape))


def forward_diff(x, out):
    """Circular forward differences of ``x`` into ``out[0]`` (rows) and ``out[1]`` (cols)."""
    d0, d1 = out[0], out[1]
    np.subtract(x[..., 1:, :], x[..., :-1, :], out=d0[..., :-1, :])
    np.subtract(x[..., :1, :], x[..., -1:, :], out=d0[..., -1:, :])
    np.subtract(x[..., :, 1:], x[..., :, :-1], out=d1[..., :, :-1])
    np.subtract(x[..., :, :1], x[..., :, -1:], out=d1[..., :, -1:])
    return out


def forward_diff_adjoint(p, out):
    """Transpose of :func:`forward_diff` (a negative divergence)."""
    p0, p1 = p[0], p[1]
    np.subtract(p0[..., -1:, :], p0[..., :1, :], out=out[..., :1, :])
    np.subtract(p0[..., :-1, :], p0[..., 1:, :], out=out[..., 1:, :])
    out[..., :, :1] += p1[..., :, -1:] - p1[..., :, :1]
    out[..., :, 1:] += p1[..., :, :-1] - p1[..., :, 1:]
    return out


def make_identity(shape, scale: float = 1.0) -> Identity:
    return Identity(shape, scale)


def make_mask(mask) -> Mask:
    return Mask(mask)


def make_conv(kernel, shape, boundary: str = "circular") -> Convolution:
    if boundary != "circular":
        raise ValueError(f"only circular boundaries are supported, got {boundary!r}")
    return Convolution(kernel, shape)


def make_superres(kernel, hi_shape, factor: int) -> SuperResolution:
    return SuperResolution(kernel, hi_shape, factor)


def make_gradient(shape) -> Gradient:
    return Gradient(shape)


def compose(outer: LinearOperator, inner: LinearOperator) -> Composition:
    return Composition(outer, inner)


def power_iteration_norm(op: LinearOperator, iters: int = 100, seed: int = 0) -> float:
    """Estimate the largest eigenvalue of ``A^T A`` (the squared operator norm).

    Returns the Rayleigh quotient of the last iterate, which never
    decreases from one iteration to the next.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.domain_shape)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        ax = op.apply(x)
        est = float(np.vdot(ax, ax))
        w = op.adjoint(ax)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        x = w / nw
    return est
