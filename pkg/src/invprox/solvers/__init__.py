"""Iterative solvers sharing the ``run_*(problem, regularizer, cfg)`` interface."""
from .base import (
    CSV_COLUMNS,
    IterationTrace,
    IterRecord,
    Problem,
    SolverConfig,
    STOP_CONVERGED,
    STOP_DIVERGED,
    STOP_MAX_ITERS,
    conjugate_gradient,
    grad_g,
    solve_normal,
)
from .gap import run_gap, run_gap_accelerated
from .pgm import fista_q, mc_divergence, red_energy, run_amp, run_fista, run_ista, run_pnp_pgm, run_red_gd, run_twist
from .primal_dual import run_primal_dual
from .splitting import red_admm_z_update, run_admm, run_hqs, run_pnp_admm, run_red_admm

#: solvers taking a prox map
PROX_SOLVERS = {
    "ista": run_ista,
    "fista": run_fista,
    "twist": run_twist,
    "admm": run_admm,
    "hqs": run_hqs,
    "gap": run_gap,
    "gap_accelerated": run_gap_accelerated,
}

#: solvers taking a denoiser
DENOISER_SOLVERS = {
    "amp": run_amp,
    "pnp_pgm": run_pnp_pgm,
    "pnp_admm": run_pnp_admm,
    "red_gd": run_red_gd,
    "red_admm": run_red_admm,
}

SOLVER_NAMES = sorted([*PROX_SOLVERS, *DENOISER_SOLVERS, "primal_dual"])
