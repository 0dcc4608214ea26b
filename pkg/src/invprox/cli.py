"""Command-line entry point: ``invprox {simulate,reconstruct,bench,verify,info}``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key=value`` lines, then command-line flags (later wins).

Exit codes: 0 success or convergence, 1 usage/IO error, 2 stopped at the
iteration cap, 3 divergence.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import __version__
from .bench import (
    DENOISER_KINDS, INSTANCE_NAMES, MODALITIES, PROX_KINDS,
    bench, build_operator, default_config, report_csv, run_solver,
)
from .denoisers import make_denoiser
from .errors import DivergenceError, InvproxError
from .io import atomic_write_bytes, read_kernel, read_volume, write_ivol
from .linops import gaussian_kernel
from .phantoms import binary_masks, cartoon, moving_square
from .prox import ProximalMap
from .solvers import DENOISER_SOLVERS, SOLVER_NAMES, STOP_CONVERGED, Problem
from .verify import run_checks
from .volume import psnr

EXIT_OK, EXIT_USAGE, EXIT_MAX_ITERS, EXIT_DIVERGED = 0, 1, 2, 3
SIGMA_SCALE = 255.0  # CLI sigma is given on the 8-bit intensity scale


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    task: str = "info"
    modality: str = "sci"
    phantom: Optional[str] = None
    shape: Optional[str] = None
    density: float = 0.5
    kernel_std: float = 0.7
    kernel: Optional[str] = None
    factor: int = 2
    noise_sigma: float = 0.0
    solver: str = "gap"
    prox: Optional[str] = None
    denoiser: Optional[str] = None
    gamma: Optional[float] = None
    tau: float = 0.0
    iters: Optional[int] = None
    tol: float = 1e-6
    sigma: float = 0.0
    lam: float = 0.0
    mu: Optional[float] = None
    alpha: float = 1.0
    beta: Optional[float] = None
    sigma_pd: float = 0.5
    accelerate: bool = True
    inner_iters: int = 30
    seed: int = 0
    input: Optional[str] = None
    mask: Optional[str] = None
    output: Optional[str] = None
    trace: Optional[str] = None
    ground_truth: Optional[str] = None
    instances: Optional[str] = None
    solvers: Optional[str] = None
    scale: int = 4
    timing: bool = True


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, text: str):
    kind = _FIELD_TYPES[key]
    text = text.strip()
    if "Optional" in kind and text.lower() in ("", "none"):
        return None
    if "bool" in kind:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {text!r}")
    try:
        if "int" in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {text!r}") from None
    return text


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _FIELD_TYPES or key == "task":
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="key=value settings file; flags override it")
    common.add_argument("--seed", type=int)

    problem = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    problem.add_argument("--modality", help=f"one of {', '.join(MODALITIES)}")
    problem.add_argument("--kernel", help="blur kernel file (IVOL, PGM or text)")
    problem.add_argument("--kernel-std", type=float, dest="kernel_std")
    problem.add_argument("--factor", type=int, help="superresolution decimation factor")
    problem.add_argument("--mask", help="mask stack or kernel IVOL (written by simulate)")
    problem.add_argument("--output", "-o")
    problem.add_argument("--ground-truth", dest="ground_truth")

    solve = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    solve.add_argument("--solver", help=f"one of {', '.join(SOLVER_NAMES)}")
    solve.add_argument("--prox", help=f"one of {', '.join(sorted(PROX_KINDS))}")
    solve.add_argument("--denoiser", help=f"one of {', '.join(sorted(DENOISER_KINDS))}")
    solve.add_argument("--gamma", type=float)
    solve.add_argument("--tau", type=float)
    solve.add_argument("--iters", type=int)
    solve.add_argument("--tol", type=float)
    solve.add_argument("--sigma", type=float, help="denoiser strength on the [0, 255] scale")
    solve.add_argument("--lambda", type=float, dest="lam")
    solve.add_argument("--mu", type=float, help="RED gradient step")
    solve.add_argument("--alpha", type=float)
    solve.add_argument("--beta", type=float)
    solve.add_argument("--sigma-pd", type=float, dest="sigma_pd")
    solve.add_argument("--no-accelerate", action="store_false", dest="accelerate")
    solve.add_argument("--inner-iters", type=int, dest="inner_iters")

    ap = _Parser(prog="invprox", description="Proximal and plug-and-play solvers for imaging inverse problems.")
    ap.add_argument("--version", action="version", version=f"invprox {__version__}")
    sub = ap.add_subparsers(dest="task", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", argument_default=argparse.SUPPRESS, parents=[common, problem], help="make a phantom, its masks and a noisy measurement")
    p.add_argument("--phantom", help="moving_square or cartoon")
    p.add_argument("--shape", help="NROWxNCOL[xNFRAME]")
    p.add_argument("--density", type=float)
    p.add_argument("--noise-sigma", type=float, dest="noise_sigma")

    p = sub.add_parser("reconstruct", argument_default=argparse.SUPPRESS, parents=[common, problem, solve], help="run a solver on a measurement")
    p.add_argument("--input", "-i")
    p.add_argument("--trace")

    p = sub.add_parser("bench", argument_default=argparse.SUPPRESS, parents=[common], help="compare solvers on built-in instances")
    p.add_argument("--instances", help=f"comma list from {', '.join(INSTANCE_NAMES)}")
    p.add_argument("--solvers", help="comma list of solver names")
    p.add_argument("--iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--output", "-o")
    p.add_argument("--no-timing", action="store_false", dest="timing", help="leave wall_time empty")

    p = sub.add_parser("verify", argument_default=argparse.SUPPRESS, parents=[common], help="run the dense-oracle self checks")
    p.add_argument("--scale", type=int)

    p = sub.add_parser("info", argument_default=argparse.SUPPRESS, parents=[common], help="list components or describe a volume file")
    p.add_argument("--input", "-i")
    return ap


def resolve_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    merged = {}
    if "config" in ns:
        merged.update(read_config_file(ns.pop("config")))
    merged.update(ns)
    return RunConfig(**merged)


def parse_shape(text: str) -> tuple:
    try:
        dims = tuple(int(t) for t in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"shape must look like 16x16 or 16x16x4, got {text!r}") from None
    if len(dims) not in (2, 3) or min(dims) < 1:
        raise UsageError(f"shape must look like 16x16 or 16x16x4, got {text!r}")
    return dims


def _need(cfg: RunConfig, name: str):
    v = getattr(cfg, name)
    if v is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for {cfg.task}")
    return v


def _kernel(cfg: RunConfig):
    if cfg.kernel:
        return read_kernel(cfg.kernel)
    return gaussian_kernel(cfg.kernel_std)


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.modality not in MODALITIES:
        raise UsageError(f"unknown modality {cfg.modality!r}; valid: {', '.join(MODALITIES)}")
    if not 0.0 < cfg.density <= 1.0:
        raise UsageError(f"density must lie in (0, 1], got {cfg.density}")
    out = _need(cfg, "output")
    dims = parse_shape(cfg.shape or ("16x16x4" if cfg.modality == "sci" else "8x8"))
    phantom = cfg.phantom or ("moving_square" if len(dims) == 3 else "cartoon")
    if phantom == "moving_square":
        if len(dims) != 3:
            raise UsageError("moving_square needs a 3D shape NROWxNCOLxNFRAME")
        x = moving_square(*dims)
    elif phantom == "cartoon":
        if len(dims) != 2:
            raise UsageError("cartoon needs a 2D shape NROWxNCOL")
        x = cartoon(*dims)
    else:
        raise UsageError(f"unknown phantom {phantom!r}; valid: moving_square, cartoon")

    masks = kernel = None
    if cfg.modality == "sci":
        if x.ndim != 3:
            raise UsageError("sci needs a video phantom (3D shape)")
        masks = binary_masks(x.shape, cfg.density, cfg.seed)
    elif cfg.modality == "inpaint":
        masks = binary_masks(x.shape, cfg.density, cfg.seed)
    elif cfg.modality in ("deblur", "superres"):
        kernel = _kernel(cfg)
    op = build_operator(cfg.modality, x.shape, masks=masks, kernel=kernel, factor=cfg.factor)
    y = op.apply(x)
    if cfg.noise_sigma:
        y = y + cfg.noise_sigma * np.random.default_rng([cfg.seed, 1]).standard_normal(y.shape)

    write_ivol(out, y)
    side = masks if masks is not None else kernel
    if cfg.mask and side is not None:
        write_ivol(cfg.mask, side)
    if cfg.ground_truth:
        write_ivol(cfg.ground_truth, x)
    print(f"simulate: {cfg.modality} {x.shape} -> measurement {y.shape}")
    return EXIT_OK


def _load_operator(cfg: RunConfig, y):
    if cfg.modality not in MODALITIES:
        raise UsageError(f"unknown modality {cfg.modality!r}; valid: {', '.join(MODALITIES)}")
    if cfg.modality in ("sci", "inpaint"):
        masks = read_volume(_need(cfg, "mask"))
        return build_operator(cfg.modality, masks.shape, masks=masks)
    if cfg.modality in ("deblur", "superres"):
        kernel = read_volume(cfg.mask) if cfg.mask else _kernel(cfg)
        if cfg.modality == "deblur":
            return build_operator("deblur", y.shape, kernel=kernel)
        hi = tuple(y.shape[:-2]) + (y.shape[-2] * cfg.factor, y.shape[-1] * cfg.factor)
        return build_operator("superres", hi, kernel=kernel, factor=cfg.factor)
    return build_operator("identity", y.shape)


def _regularizer(cfg: RunConfig):
    solver = cfg.solver
    if solver not in SOLVER_NAMES:
        raise UsageError(f"unknown solver {solver!r}; valid solvers: {', '.join(SOLVER_NAMES)}")
    if cfg.prox is not None and cfg.denoiser is not None:
        raise UsageError("give either --prox or --denoiser, not both")
    if solver in DENOISER_SOLVERS:
        if cfg.prox is not None:
            raise UsageError(f"solver {solver} needs --denoiser, not --prox")
        name = cfg.denoiser or "tv"
    elif cfg.denoiser is not None:
        if solver == "primal_dual":
            raise UsageError("primal_dual needs a convex --prox (l1, l2sq or nonneg)")
        name = cfg.denoiser
    else:
        name = None
    if name is not None:
        if name not in DENOISER_KINDS:
            raise UsageError(f"unknown denoiser {name!r}; valid: {', '.join(sorted(DENOISER_KINDS))}")
        return None, make_denoiser(DENOISER_KINDS[name])
    pname = cfg.prox or ("l1" if solver == "primal_dual" else "tv")
    if pname not in PROX_KINDS:
        raise UsageError(f"unknown prox {pname!r}; valid: {', '.join(sorted(PROX_KINDS))}")
    return ProximalMap(PROX_KINDS[pname], inner_iters=cfg.inner_iters), None


def cmd_reconstruct(cfg: RunConfig) -> int:
    prox, den = _regularizer(cfg)
    out = _need(cfg, "output")
    y = read_volume(_need(cfg, "input"))
    op = _load_operator(cfg, y)
    truth = read_volume(cfg.ground_truth) if cfg.ground_truth else None
    problem = Problem(op, y, ground_truth=truth)
    scfg = default_config(
        cfg.solver, op, cfg.seed,
        gamma=cfg.gamma, tau=cfg.tau, max_iters=cfg.iters or 100, tol=cfg.tol,
        alpha=cfg.alpha, beta=cfg.beta, sigma_pd=cfg.sigma_pd, lam=cfg.lam,
        mu_step=cfg.mu, accelerate=cfg.accelerate,
        sigma_schedule=(cfg.sigma / SIGMA_SCALE,) if den is not None else (),
    )
    try:
        x, trace = run_solver(cfg.solver, problem, scfg, prox, den)
    except DivergenceError as exc:
        trace = getattr(exc, "trace", None)
        if cfg.trace and trace is not None:
            atomic_write_bytes(cfg.trace, trace.to_csv().encode())
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    write_ivol(out, x)
    if cfg.trace:
        atomic_write_bytes(cfg.trace, trace.to_csv().encode())
    for w in trace.warnings:
        print(f"warning: {w}", file=sys.stderr)
    msg = f"{cfg.solver}: {trace.stop_reason} after {len(trace)} iterations"
    if truth is not None:
        msg += f", psnr {psnr(truth, x):.4f} dB"
    print(msg)
    return EXIT_OK if trace.stop_reason == STOP_CONVERGED else EXIT_MAX_ITERS


def _names(text, valid, what):
    if text is None:
        return list(valid)
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise UsageError(f"{what} list is empty")
    bad = [n for n in names if n not in valid]
    if bad:
        raise UsageError(f"unknown {what} {', '.join(bad)}; valid: {', '.join(valid)}")
    return names


def cmd_bench(cfg: RunConfig) -> int:
    instances = _names(cfg.instances, INSTANCE_NAMES, "instance")
    solvers = _names(cfg.solvers, SOLVER_NAMES, "solver")
    rows = bench(instances, solvers, seed=cfg.seed, max_iters=cfg.iters or 300, tol=cfg.tol, timing=cfg.timing)
    text = report_csv(rows)
    if cfg.output:
        atomic_write_bytes(cfg.output, text.encode())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    checks = run_checks(cfg.scale, cfg.seed)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_USAGE


def cmd_info(cfg: RunConfig) -> int:
    if cfg.input:
        v = read_volume(cfg.input)
        print(f"{cfg.input}: shape {v.shape}, min {v.min():.6g}, max {v.max():.6g}, mean {v.mean():.6g}")
        return EXIT_OK
    print(f"invprox {__version__}")
    print("modalities: " + ", ".join(MODALITIES))
    print("solvers:    " + ", ".join(SOLVER_NAMES))
    print("prox maps:  " + ", ".join(sorted(PROX_KINDS)))
    print("denoisers:  " + ", ".join(sorted(DENOISER_KINDS)))
    print("instances:  " + ", ".join(INSTANCE_NAMES))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "bench": cmd_bench,
    "verify": cmd_verify,
    "info": cmd_info,
}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        return COMMANDS[cfg.task](cfg)
    except UsageError as exc:
        print(f"invprox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvproxError, ValueError, ArithmeticError, OSError) as exc:
        print(f"invprox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
