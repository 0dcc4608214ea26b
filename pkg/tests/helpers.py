"""Shared problem builders for the test suite."""
import numpy as np

from invprox.linops import gaussian_kernel, make_conv, make_mask, power_iteration_norm
from invprox.phantoms import binary_masks, cartoon, moving_square
from invprox.sci import SciOperator
from invprox.solvers import Problem


def deblur8(noise=0.01, seed=0, **kw):
    x = cartoon(8, 8)
    op = make_conv(gaussian_kernel(0.7, 1), x.shape)
    y = op.apply(x) + noise * np.random.default_rng(seed).standard_normal(x.shape)
    return Problem(op, y, ground_truth=x, **kw)


def inpaint(n=8, density=0.5, seed=1, noise=0.0, **kw):
    x = cartoon(n, n)
    op = make_mask(binary_masks((n, n), density, seed))
    y = op.apply(x) + noise * np.random.default_rng(seed).standard_normal(x.shape)
    return Problem(op, y, ground_truth=x, **kw)


def sci(nrow=8, ncol=8, nframe=4, seed=7, **kw):
    x = moving_square(nrow, ncol, nframe)
    op = SciOperator(binary_masks(x.shape, 0.5, seed))
    return Problem(op, op.apply(x), ground_truth=x, **kw)


def lipschitz(p):
    return power_iteration_norm(p.op, 200, 0)


def collect(run, *args):
    """Run a solver and return (x, trace, list of iterates)."""
    its = []
    x, tr = run(*args, callback=lambda k, v: its.append(v.copy()))
    return x, tr, its
