"""Named benchmark instances and the side-by-side solver report."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .denoisers import make_denoiser
from .errors import InvproxError
from .linops import LinearOperator, gaussian_kernel, make_conv, make_identity, make_mask, make_superres, power_iteration_norm
from .phantoms import binary_masks, cartoon, moving_square
from .prox import ProximalMap
from .sci import SciOperator
from .solvers import DENOISER_SOLVERS, PROX_SOLVERS, Problem, SolverConfig, run_primal_dual
from .volume import psnr

MODALITIES = ("identity", "inpaint", "deblur", "superres", "sci")
PROX_KINDS = {"l1": "l1", "l2sq": "l2sq", "tv": "tv_iso", "tv_iso": "tv_iso", "tv_aniso": "tv_aniso", "nonneg": "nonneg"}
DENOISER_KINDS = {
    "gaussian": "gaussian_filter",
    "gaussian_filter": "gaussian_filter",
    "tv": "tv_denoiser",
    "tv_denoiser": "tv_denoiser",
    "median": "median_filter",
    "median_filter": "median_filter",
    "linear_symmetric": "linear_symmetric",
    "identity": "identity",
}


@dataclass
class Instance:
    name: str
    op: LinearOperator
    truth: np.ndarray
    measurement: np.ndarray
    prox: str = "tv_aniso"
    tau: float = 0.02
    denoiser: str = "tv_denoiser"
    sigma255: float = 5.0
    extras: dict = field(default_factory=dict)


def build_operator(modality: str, shape, *, masks=None, kernel=None, factor: int = 2) -> LinearOperator:
    if modality == "identity":
        return make_identity(shape)
    if modality == "inpaint":
        return make_mask(masks)
    if modality == "deblur":
        return make_conv(kernel, shape)
    if modality == "superres":
        return make_superres(kernel, shape, factor)
    if modality == "sci":
        return SciOperator(masks)
    raise ValueError(f"unknown modality {modality!r}; expected one of {MODALITIES}")


def make_instance(name: str, seed: int = 0, noise_sigma: Optional[float] = None) -> Instance:
    """Built-in desk-scale problems: denoise8, deblur8, inpaint8, superres8, sci16.

    deblur8 is regularized with l1, the others with TV.
    """
    rng = np.random.default_rng(seed)
    if name == "sci16":
        x = moving_square(16, 16, 4)
        op = SciOperator(binary_masks(x.shape, 0.5, 7 if seed == 0 else seed))
        inst = Instance(name, op, x, op.apply(x), prox="tv_iso", tau=0.04, sigma255=10.0)
        noise = 0.0 if noise_sigma is None else noise_sigma
    else:
        x = cartoon(8, 8)
        k = gaussian_kernel(0.7, 1)
        if name == "denoise8":
            op, tau, noise = make_identity(x.shape), 0.05, 0.05
        elif name == "deblur8":
            op, tau, noise = make_conv(k, x.shape), 0.02, 0.01
        elif name == "inpaint8":
            op, tau, noise = make_mask(binary_masks(x.shape, 0.5, seed + 1)), 0.02, 0.01
        elif name == "superres8":
            op, tau, noise = make_superres(k, x.shape, 2), 0.01, 0.01
        else:
            raise ValueError(f"unknown instance {name!r}; expected one of {INSTANCE_NAMES}")
        if noise_sigma is not None:
            noise = noise_sigma
        inst = Instance(name, op, x, op.apply(x), prox="l1" if name == "deblur8" else "tv_aniso", tau=tau)
    if noise:
        inst.measurement = inst.measurement + noise * rng.standard_normal(inst.measurement.shape)
    return inst


INSTANCE_NAMES = ("denoise8", "deblur8", "inpaint8", "superres8", "sci16")


def default_config(solver: str, op: LinearOperator, seed: int = 0, **overrides) -> SolverConfig:
    """Step sizes that are safe for ``op`` when the caller does not choose them."""
    L = power_iteration_norm(op, 100, seed)
    L = max(L, 1e-12)
    params = dict(max_iters=300, tol=1e-6, seed=seed)
    if solver in ("ista", "fista", "twist", "pnp_pgm"):
        params["gamma"] = 0.9 / L
    elif solver == "amp":
        params["gamma"] = 1.0 / L
    elif solver == "primal_dual":
        params["sigma_pd"] = 0.5
        params["gamma"] = 0.9 / (0.5 * L + 8.0 * 0.5)
    else:
        params["gamma"] = 1.0
    lam = overrides.get("lam")
    params["mu_step"] = 0.9 / (L + (lam or 0.0))
    params.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**params)


def run_solver(solver: str, problem: Problem, cfg: SolverConfig, prox: Optional[ProximalMap] = None, denoiser=None):
    """Dispatch one run, validating the regularizer pairing."""
    if solver in DENOISER_SOLVERS:
        if denoiser is None:
            raise ValueError(f"solver {solver!r} needs a denoiser, not a prox")
        return DENOISER_SOLVERS[solver](problem, denoiser, cfg)
    if solver == "primal_dual":
        if denoiser is not None:
            raise ValueError("primal_dual needs a convex prox (l1, l2sq or nonneg), not a denoiser")
        prox = prox or ProximalMap("l1")
        if prox.kind not in ("l1", "l2sq", "nonneg"):
            raise ValueError(f"primal_dual composes r with the image gradient; prox {prox.kind!r} is not supported")
        return run_primal_dual(problem, None, prox, cfg)
    if solver in PROX_SOLVERS:
        if denoiser is not None and prox is not None:
            raise ValueError("give either a prox or a denoiser, not both")
        if denoiser is not None:
            sigma = cfg.sigma_at(1) if cfg.sigma_schedule else None
            prox = ProximalMap("denoiser_adapter", denoiser=denoiser, sigma=sigma)
        return PROX_SOLVERS[solver](problem, prox or ProximalMap("l1"), cfg)
    raise ValueError(f"unknown solver {solver!r}")


BENCH_COLUMNS = ["instance", "solver", "psnr", "iterations", "wall_time", "objective", "stop_reason"]


def bench(instances, solvers, seed: int = 0, max_iters: int = 300, tol: float = 1e-6, timing: bool = True):
    """Run every solver on every instance; failures are recorded, not raised."""
    rows = []
    for iname in sorted(instances):
        inst = make_instance(iname, seed)
        for sname in sorted(solvers):
            row = {"instance": iname, "solver": sname}
            try:
                uses_denoiser = sname in DENOISER_SOLVERS
                cfg = default_config(
                    sname, inst.op, seed, tau=inst.tau, max_iters=max_iters, tol=tol,
                    sigma_schedule=(inst.sigma255 / 255.0,) if uses_denoiser else (),
                    lam=0.1 if sname.startswith("red") else None,
                )
                prob = Problem(inst.op, inst.measurement, ground_truth=inst.truth)
                prox = None if uses_denoiser else ProximalMap("l1" if sname == "primal_dual" else inst.prox, inner_iters=50)
                den = make_denoiser(inst.denoiser) if uses_denoiser else None
                t0 = time.perf_counter()
                x, trace = run_solver(sname, prob, cfg, prox, den)
                row.update(
                    psnr=psnr(inst.truth, x),
                    iterations=len(trace),
                    wall_time=time.perf_counter() - t0 if timing else None,
                    objective=trace.last.objective,
                    stop_reason=trace.stop_reason,
                )
            except (InvproxError, ValueError, ArithmeticError) as exc:
                row.update(stop_reason=f"error: {exc}")
            rows.append(row)
    return rows


def report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        out = []
        for c in BENCH_COLUMNS:
            v = r.get(c)
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()
