"""Objective and PSNR traces of several solvers on one built-in instance.

    python3 scripts/compare_solvers.py --instance deblur8 --solvers ista,fista,admm --iters 500
"""
import argparse
import csv
import sys
from dataclasses import dataclass, field

from invprox.bench import INSTANCE_NAMES, default_config, make_instance, run_solver
from invprox.denoisers import make_denoiser
from invprox.prox import ProximalMap
from invprox.solvers import DENOISER_SOLVERS, Problem


@dataclass
class CompareConfig:
    instance: str = "deblur8"
    solvers: list = field(default_factory=lambda: ["ista", "fista", "twist", "admm", "hqs"])
    iters: int = 300
    tol: float = 0.0
    seed: int = 0
    inner_iters: int = 50
    trace: str | None = None


def compare(cfg: CompareConfig):
    inst = make_instance(cfg.instance, cfg.seed)
    prob = Problem(inst.op, inst.measurement, ground_truth=inst.truth)
    traces = {}
    for name in cfg.solvers:
        den = name in DENOISER_SOLVERS
        scfg = default_config(
            name, inst.op, cfg.seed, tau=inst.tau, max_iters=cfg.iters, tol=cfg.tol,
            sigma_schedule=(inst.sigma255 / 255,) if den else (), lam=0.1 if name.startswith("red") else None,
        )
        prox = None if den else ProximalMap("l1" if name == "primal_dual" else inst.prox, inner_iters=cfg.inner_iters)
        _, tr = run_solver(name, prob, scfg, prox, make_denoiser(inst.denoiser) if den else None)
        traces[name] = tr
    return traces


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = CompareConfig()
    ap.add_argument("--instance", choices=INSTANCE_NAMES, default=d.instance)
    ap.add_argument("--solvers", default=",".join(d.solvers))
    ap.add_argument("--iters", type=int, default=d.iters)
    ap.add_argument("--tol", type=float, default=d.tol)
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--inner-iters", type=int, default=d.inner_iters)
    ap.add_argument("--trace", help="write a long-format CSV (solver, iter, objective, psnr)")
    args = vars(ap.parse_args(argv))
    args["solvers"] = [s for s in args["solvers"].split(",") if s]
    cfg = CompareConfig(**args)
    traces = compare(cfg)
    print(f"{'solver':16s} {'iters':>6s} {'objective':>12s} {'psnr':>7s}  stop")
    for name, tr in traces.items():
        obj = tr.last.objective
        print(f"{name:16s} {len(tr):6d} {obj if obj is not None else float('nan'):12.6f} {tr.last.psnr:7.2f}  {tr.stop_reason}")
    if cfg.trace:
        with open(cfg.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["solver", "iter", "objective", "psnr"])
            for name, tr in traces.items():
                for r in tr.records:
                    w.writerow([name, r.iter, r.objective, r.psnr])
    return 0


if __name__ == "__main__":
    sys.exit(main())
