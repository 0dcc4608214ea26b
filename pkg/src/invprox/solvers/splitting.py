"""Variable-splitting solvers: ADMM, HQS, PnP-ADMM and RED-ADMM.

All of them need ``(I + gamma A^T A)^{-1}``; operators with a closed form
supply it, the rest go through conjugate gradients.
"""
from __future__ import annotations

import numpy as np

from .base import Monitor, Problem, SolverConfig, reg_value, solve_normal


def _normal(p: Problem, cfg: SolverConfig, b):
    return solve_normal(p.op, b, cfg.gamma, cfg.cg_tol, cfg.cg_max_iter)


def run_admm(p: Problem, prox, cfg: SolverConfig, callback=None):
    """Scaled-dual ADMM on the split ``x = z``.

    x-step ``(I + gamma A^T A)^{-1}(z - s + gamma A^T y)``, z-step
    ``prox_{gamma tau r}(x + s)``, dual step ``s += x - z``.
    """
    mon = Monitor("admm", p, cfg, callback)
    g, w = cfg.gamma, cfg.gamma * cfg.tau
    aty = g * p.op.adjoint(p.measurement)
    x = p.x0()
    z = x.copy()
    s = np.zeros_like(x)
    done = False
    for k in range(1, cfg.max_iters + 1):
        x_new = _normal(p, cfg, z - s + aty)
        z_old, s_old = z, s
        z = prox(x_new + s, w)
        s = s + (x_new - z)
        done = mon.record(
            k, x_new, x,
            regularizer=reg_value(prox, x_new, cfg.tau),
            primal_residual=float(np.linalg.norm(x_new - z)),
            aux=((z, z_old), (s, s_old)),
        )
        x = x_new
        if done:
            break
    return x, mon.finish(done)


def run_hqs(p: Problem, prox, cfg: SolverConfig, callback=None):
    """Half-quadratic splitting: ADMM without the dual variable.

    Each record carries ``penalized_objective`` in its extras:
    ``g(x) + tau r(z) + ||x - z||^2 / (2 gamma)``.
    """
    mon = Monitor("hqs", p, cfg, callback)
    g, w = cfg.gamma, cfg.gamma * cfg.tau
    aty = g * p.op.adjoint(p.measurement)
    x = p.x0()
    z = x.copy()
    done = False
    for k in range(1, cfg.max_iters + 1):
        x_new = _normal(p, cfg, z + aty)
        z_old = z
        z = prox(x_new, w)
        resid = p.residual(x_new)
        gap = float(np.vdot(x_new - z, x_new - z))
        rz = reg_value(prox, z, cfg.tau)
        extras = {}
        if rz is not None:
            extras["penalized_objective"] = 0.5 * float(np.vdot(resid, resid)) + rz + gap / (2.0 * g)
        done = mon.record(
            k, x_new, x, residual=resid,
            regularizer=reg_value(prox, x_new, cfg.tau),
            primal_residual=gap ** 0.5,
            extras=extras,
            aux=((z, z_old),),
        )
        x = x_new
        if done:
            break
    return x, mon.finish(done)


def run_pnp_admm(p: Problem, denoiser, cfg: SolverConfig, callback=None):
    """Plug-and-play ADMM in the ordering where the data prox comes first.

    ``z = prox_{gamma g}(x - s)``, ``x = D_sigma(z + s)``, ``s += z - x``.
    """
    mon = Monitor("pnp_admm", p, cfg, callback)
    aty = cfg.gamma * p.op.adjoint(p.measurement)
    x = p.x0()
    s = np.zeros_like(x)
    done = False
    for k in range(1, cfg.max_iters + 1):
        sigma = cfg.sigma_at(k)
        z = _normal(p, cfg, x - s + aty)
        x_new = denoiser(z + s, sigma)
        s_old = s
        s = s + (z - x_new)
        done = mon.record(
            k, x_new, x, primal_residual=float(np.linalg.norm(z - x_new)),
            extras={"sigma": sigma}, aux=((s, s_old),),
        )
        x = x_new
        if done:
            break
    return x, mon.finish(done)


def red_admm_z_update(x, s, fz, gamma: float, lam: float):
    """One fixed-point step for ``0 = lam (z - f(z)) - (x - z + s) / gamma`` with ``f`` frozen."""
    return (gamma / (1.0 + gamma * lam)) * (lam * fz + (x + s) / gamma)


def run_red_admm(p: Problem, denoiser, cfg: SolverConfig, callback=None):
    """ADMM on the RED energy with a single fixed-point z-step per iteration."""
    mon = Monitor("red_admm", p, cfg, callback)
    g, lam = cfg.gamma, cfg.lam
    aty = g * p.op.adjoint(p.measurement)
    x = p.x0()
    z = x.copy()
    s = np.zeros_like(x)
    done = False
    for k in range(1, cfg.max_iters + 1):
        sigma = cfg.sigma_at(k)
        x_new = _normal(p, cfg, z - s + aty)
        z_old, s_old = z, s
        z = red_admm_z_update(x_new, s, denoiser(z, sigma), g, lam)
        s = s + (x_new - z)
        reg = 0.5 * lam * float(np.vdot(x_new, x_new - denoiser(x_new, sigma)))
        done = mon.record(
            k, x_new, x, regularizer=reg,
            primal_residual=float(np.linalg.norm(x_new - z)),
            extras={"sigma": sigma},
            aux=((z, z_old), (s, s_old)),
        )
        x = x_new
        if done:
            break
    return x, mon.finish(done)
