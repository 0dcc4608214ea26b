"""Primal-dual hybrid gradient iteration for ``g(x) + tau r(D x)``."""
from __future__ import annotations

import numpy as np

from ..linops import Gradient, LinearOperator, power_iteration_norm
from .base import Monitor, Problem, SolverConfig, reg_value


def run_primal_dual(p: Problem, d_op: LinearOperator | None, prox_r_conj_base, cfg: SolverConfig, callback=None):
    """Primal-dual hybrid gradient with an explicit gradient step on ``g``.

    ``cfg.gamma`` is the primal step, ``cfg.sigma_pd`` the dual step and
    ``cfg.tau`` the weight of ``r``. The dual prox of ``tau r`` comes from
    the Moreau identity applied to ``prox_r_conj_base``. ``cfg.beta``
    (default 0) relaxes both variables toward their previous values:
    ``x_k = (1 - beta) xhat_k + beta x_{k-1}``.

    A step product ``gamma * sigma_pd * ||D||^2 >= 1`` is noted in
    ``trace.warnings`` but does not stop the run.
    """
    if d_op is None:
        d_op = Gradient(p.op.domain_shape)
    mon = Monitor("primal_dual", p, cfg, callback)
    t, sig, w = cfg.gamma, cfg.sigma_pd, cfg.tau
    beta = 0.0 if cfg.beta is None else cfg.beta
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"primal-dual relaxation beta must lie in [0, 1], got {beta}")
    dnorm2 = power_iteration_norm(d_op, 100, cfg.seed)
    mon.trace.notes["d_norm_sq"] = dnorm2
    if t * sig * dnorm2 >= 1.0:
        mon.trace.warnings.append(
            f"step product gamma*sigma*||D||^2 = {t * sig * dnorm2:.4g} >= 1; convergence not guaranteed"
        )
    x = p.x0()
    zd = np.zeros(d_op.range_shape)
    done = False
    for k in range(1, cfg.max_iters + 1):
        x_hat = x - t * p.grad(x) - t * d_op.adjoint(zd)
        z_hat = prox_r_conj_base.conjugate(zd + sig * d_op.apply(2.0 * x_hat - x), sig, w)
        zd_old = zd
        if beta:
            x_new = (1.0 - beta) * x_hat + beta * x
            zd = (1.0 - beta) * z_hat + beta * zd
        else:
            x_new, zd = x_hat, z_hat
        done = mon.record(
            k, x_new, x,
            regularizer=reg_value(prox_r_conj_base, d_op.apply(x_new), w),
            extras={"dual_sup": float(np.max(np.abs(zd))) if zd.size else 0.0},
            aux=((zd, zd_old),),
        )
        x = x_new
        if done:
            break
    mon.trace.notes["dual"] = zd
    return x, mon.finish(done)
