"""Proximal-splitting solvers for linear imaging inverse problems."""
from .errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    FormatError,
    IllConditionedError,
    InvproxError,
    NonFiniteError,
    ShapeError,
    SizeError,
)
from .volume import Shape, elementwise, inner, norm2_sq, psnr

__version__ = "0.1.0"
