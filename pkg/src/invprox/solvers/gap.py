"""Generalized alternating projection, plain and accelerated."""
from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .base import Monitor, Problem, SolverConfig, reg_value, solve_gram


def _gram_inverse(p: Problem, cfg: SolverConfig):
    """Return ``r -> (A A^T)^{-1} r`` using the diagonal when available."""
    op = p.op
    if op.has_gram_diag:
        diag = op.gram_diag()
        zero = np.flatnonzero(diag.ravel() == 0)
        if zero.size:
            raise DomainError(
                f"A A^T has a zero diagonal entry at flat index {int(zero[0])}; no frame covers that measurement"
            )
        return lambda r: r / diag
    return lambda r: solve_gram(op, r, cfg.cg_tol, cfg.cg_max_iter)


def _run(name, p, prox, cfg, callback, accelerate):
    mon = Monitor(name, p, cfg, callback)
    zero_count = getattr(p.op, "zero_count", None)
    if zero_count is not None:
        mon.trace.notes["phi_sum_zero_count"] = zero_count
    inv = _gram_inverse(p, cfg)
    w = cfg.gamma * cfg.tau
    y = p.measurement
    ynorm = float(np.linalg.norm(y))
    y_acc = y.copy()
    theta = p.x0()
    x = theta
    done = False
    for k in range(1, cfg.max_iters + 1):
        a_theta = p.op.apply(theta)
        x_new = theta + p.op.adjoint(inv(y_acc - a_theta))
        if accelerate:
            y_acc = y_acc + (y - a_theta)
        theta = prox(x_new, w)
        resid = p.op.apply(x_new) - y
        rn = float(np.linalg.norm(resid))
        done = mon.record(
            k, x_new, x, residual=resid,
            regularizer=reg_value(prox, x_new, cfg.tau),
            constraint_residual=rn / ynorm if ynorm > 0 else rn,
        )
        x = x_new
        if done:
            break
    mon.trace.notes["theta"] = theta
    return x, mon.finish(done)


def run_gap(p: Problem, prox, cfg: SolverConfig, callback=None):
    """``x = theta + A^T (A A^T)^{-1}(y - A theta)``, ``theta = prox_{gamma tau r}(x)``.

    Returns the last projection ``x`` (feasible by construction); the last
    ``theta`` is kept in ``trace.notes["theta"]``. The trace's
    ``constraint_residual`` is relative: ``||A x - y|| / ||y||``.
    """
    return _run("gap", p, prox, cfg, callback, accelerate=False)


def run_gap_accelerated(p: Problem, prox, cfg: SolverConfig, callback=None):
    """GAP with a running measurement ``y_k = y_{k-1} + (y - A theta_{k-1})``.

    The x-step uses ``y_{k-1}``, so the first iteration matches plain GAP.
    """
    return _run("gap_accelerated", p, prox, cfg, callback, accelerate=True)
