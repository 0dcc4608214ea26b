"""Gradient-type solvers: ISTA, FISTA, TwIST, AMP, PnP-PGM and RED-GD."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConvergenceError
from .base import Monitor, Problem, SolverConfig, reg_value


def fista_q(q_prev: float) -> float:
    """Momentum sequence ``q_k = (1 + sqrt(1 + 4 q_{k-1}^2)) / 2``."""
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * q_prev * q_prev))


def run_ista(p: Problem, prox, cfg: SolverConfig, callback=None):
    """``x <- prox_{gamma tau r}(x - gamma A^T(Ax - y))``."""
    mon = Monitor("ista", p, cfg, callback)
    g, w = cfg.gamma, cfg.gamma * cfg.tau
    x = p.x0()
    done = False
    for k in range(1, cfg.max_iters + 1):
        x_new = prox(x - g * p.grad(x), w)
        done = mon.record(k, x_new, x, regularizer=reg_value(prox, x_new, cfg.tau))
        x = x_new
        if done:
            break
    return x, mon.finish(done)


def run_fista(p: Problem, prox, cfg: SolverConfig, callback=None):
    """ISTA with momentum; ``cfg.accelerate=False`` pins ``q_k = 1`` and gives ISTA.

    The gradient is taken at the extrapolated point ``s``.
    """
    mon = Monitor("fista", p, cfg, callback)
    g, w = cfg.gamma, cfg.gamma * cfg.tau
    x = p.x0()
    s = x
    q = 1.0
    done = False
    for k in range(1, cfg.max_iters + 1):
        x_new = prox(s - g * p.grad(s), w)
        if cfg.accelerate:
            q_new = fista_q(q)
            s = x_new + ((q - 1.0) / q_new) * (x_new - x)
            q = q_new
        else:
            s = x_new
        done = mon.record(k, x_new, x, regularizer=reg_value(prox, x_new, cfg.tau))
        x = x_new
        if done:
            break
    return x, mon.finish(done)


def run_twist(p: Problem, prox, cfg: SolverConfig, callback=None):
    """Two-step IST: ``(1-a) x_{k-2} + (a-b) x_{k-1} + b prox(x_{k-1} - gamma grad)``.

    Starts from ``x_{-1} = x_0``; ``alpha = beta = 1`` reproduces ISTA.
    """
    mon = Monitor("twist", p, cfg, callback)
    g, w = cfg.gamma, cfg.gamma * cfg.tau
    a = cfg.alpha
    b = 1.0 if cfg.beta is None else cfg.beta
    if a <= 0 or b <= 0:
        raise ValueError(f"TwIST needs alpha, beta > 0, got {a}, {b}")
    x = p.x0()
    x_old = x
    done = False
    for k in range(1, cfg.max_iters + 1):
        step = prox(x - g * p.grad(x), w)
        x_new = (1.0 - a) * x_old + (a - b) * x + b * step
        done = mon.record(k, x_new, x, regularizer=reg_value(prox, x_new, cfg.tau))
        x_old, x = x, x_new
        if done:
            break
    return x, mon.finish(done)


def mc_divergence(denoiser, r, sigma: float, rng: np.random.Generator, max_tries: int = 3) -> float:
    """Single-probe Monte Carlo estimate of ``sum_i d D_i / d r_i``.

    Uses ``b^T (D(r + eps b) - D(r)) / eps`` with a Gaussian probe ``b``;
    a degenerate (all-zero) probe is redrawn up to ``max_tries`` times.
    """
    eps = float(np.max(np.abs(r))) / 1000.0 + 1e-12
    base = denoiser(r, sigma)
    for _ in range(max_tries):
        b = rng.standard_normal(np.shape(r))
        if np.any(b):
            return float(np.vdot(b, denoiser(r + eps * b, sigma) - base)) / eps
    raise ConvergenceError(f"divergence probe was zero {max_tries} times")


def run_amp(p: Problem, denoiser, cfg: SolverConfig, callback=None):
    """Denoising AMP.

    ``x_k = D(x_{k-1} + gamma A^T z_{k-1})`` and
    ``z_k = y - A x_k + z_{k-1} * delta * div_k / n`` where ``delta = n/m``
    and ``div_k`` is the Monte Carlo divergence of the denoiser. The
    Onsager factor therefore equals ``div_k / m``.
    """
    mon = Monitor("amp", p, cfg, callback)
    n, m = p.op.domain_size, p.op.range_size
    delta = n / m if cfg.delta is None else cfg.delta
    rng = np.random.default_rng(cfg.seed)
    y = p.measurement
    x = p.x0()
    z = y - p.op.apply(x)
    done = False
    for k in range(1, cfg.max_iters + 1):
        sigma = cfg.sigma_at(k)
        r = x + cfg.gamma * p.op.adjoint(z)
        x_new = denoiser(r, sigma)
        div = mc_divergence(denoiser, r, sigma, rng)
        onsager = delta * div / n
        resid = p.op.apply(x_new) - y
        z = -resid + onsager * z
        done = mon.record(
            k, x_new, x, residual=resid,
            constraint_residual=float(np.linalg.norm(resid)),
            extras={"onsager": onsager, "sigma": sigma},
        )
        x = x_new
        if done:
            break
    return x, mon.finish(done)


def run_pnp_pgm(p: Problem, denoiser, cfg: SolverConfig, callback=None):
    """Plug-and-play proximal gradient with optional momentum (PnP-APGM)."""
    mon = Monitor("pnp_pgm", p, cfg, callback)
    g = cfg.gamma
    x = p.x0()
    s = x
    q = 1.0
    done = False
    for k in range(1, cfg.max_iters + 1):
        sigma = cfg.sigma_at(k)
        x_new = denoiser(s - g * p.grad(s), sigma)
        if cfg.accelerate:
            q_new = fista_q(q)
            s = x_new + ((q - 1.0) / q_new) * (x_new - x)
            q = q_new
        else:
            s = x_new
        done = mon.record(k, x_new, x, extras={"sigma": sigma})
        x = x_new
        if done:
            break
    return x, mon.finish(done)


def red_energy(p: Problem, denoiser, x, lam: float, sigma: float) -> tuple:
    """``(fidelity, regularizer)`` of ``E(x) = g(x) + (lam/2) x^T (x - f(x))``."""
    reg = 0.5 * lam * float(np.vdot(x, x - denoiser(x, sigma)))
    return p.fidelity(x), reg


def run_red_gd(p: Problem, denoiser, cfg: SolverConfig, callback=None):
    """Steepest descent on the RED energy, one denoiser call per step."""
    mon = Monitor("red_gd", p, cfg, callback)
    mu, lam = cfg.mu_step, cfg.lam
    x = p.x0()
    fx = denoiser(x, cfg.sigma_at(1))
    done = False
    for k in range(1, cfg.max_iters + 1):
        sigma = cfg.sigma_at(k)
        if k > 1 and cfg.sigma_at(k - 1) != sigma:
            fx = denoiser(x, sigma)
        x_new = x - mu * (p.grad(x) + lam * (x - fx))
        fx = denoiser(x_new, sigma)
        reg = 0.5 * lam * float(np.vdot(x_new, x_new - fx))
        done = mon.record(k, x_new, x, regularizer=reg, extras={"sigma": sigma})
        x = x_new
        if done:
            break
    return x, mon.finish(done)
