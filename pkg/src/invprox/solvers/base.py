"""Shared solver plumbing: configuration, problem, trace and linear solves."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Optional

import numpy as np

from ..errors import ConvergenceError, DivergenceError, ShapeError
from ..linops import LinearOperator
from ..volume import check_finite, psnr

STOP_CONVERGED = "converged"
STOP_MAX_ITERS = "max_iters"
STOP_DIVERGED = "diverged"


@dataclass
class SolverConfig:
    """Parameters for every solver; each solver reads the fields it needs.

    ``gamma`` is the step size (PGM family), the penalty (ADMM, HQS) or the
    prox weight multiplier (GAP); for primal-dual it is the primal step.
    ``tau`` weights the regularizer, so prox maps receive ``gamma * tau``.
    ``beta`` defaults to 1 for TwIST and 0 (no relaxation) for primal-dual.
    ``sigma_schedule[k]`` is the denoiser strength at iteration ``k + 1``;
    the last entry repeats.
    """

    gamma: float = 1.0
    tau: float = 0.0
    max_iters: int = 100
    tol: float = 0.0
    alpha: float = 1.0
    beta: Optional[float] = None
    sigma_pd: float = 0.5
    lam: float = 0.0
    mu_step: float = 0.1
    delta: Optional[float] = None
    sigma_schedule: tuple = ()
    accelerate: bool = True
    seed: int = 0
    divergence_limit: float = 1e12
    cg_tol: float = 1e-10
    cg_max_iter: Optional[int] = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be an integer >= 1, got {self.max_iters}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not self.mu_step > 0 or not self.sigma_pd > 0:
            raise ValueError("mu_step and sigma_pd must be > 0")
        self.sigma_schedule = tuple(float(s) for s in self.sigma_schedule)

    def sigma_at(self, k: int) -> float:
        if not self.sigma_schedule:
            raise ValueError("sigma_schedule must be nonempty when a denoiser is used")
        return self.sigma_schedule[min(k - 1, len(self.sigma_schedule) - 1)]


@dataclass
class Problem:
    """Least-squares data term ``g(x) = 0.5||A x - y||^2`` plus optional extras."""

    op: LinearOperator
    measurement: np.ndarray
    init: Optional[np.ndarray] = None
    ground_truth: Optional[np.ndarray] = None
    peak: float = 1.0

    def __post_init__(self):
        self.measurement = check_finite(np.asarray(self.measurement, dtype=np.float64), "measurement")
        if self.measurement.shape != self.op.range_shape:
            raise ShapeError(f"measurement shape {self.measurement.shape} != operator range {self.op.range_shape}")
        if self.init is not None:
            self.init = check_finite(np.asarray(self.init, dtype=np.float64), "init")
            if self.init.shape != self.op.domain_shape:
                raise ShapeError(f"init shape {self.init.shape} != operator domain {self.op.domain_shape}")
        if self.ground_truth is not None:
            self.ground_truth = np.asarray(self.ground_truth, dtype=np.float64)
            if self.ground_truth.shape != self.op.domain_shape:
                raise ShapeError("ground truth shape does not match operator domain")

    def x0(self) -> np.ndarray:
        if self.init is not None:
            return self.init.copy()
        return self.op.adjoint(self.measurement)

    def residual(self, x):
        return self.op.apply(x) - self.measurement

    def fidelity(self, x) -> float:
        r = self.residual(x)
        return 0.5 * float(np.vdot(r, r))

    def grad(self, x):
        return self.op.adjoint(self.residual(x))


def grad_g(p: Problem, x):
    """``A^T (A x - y)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != p.op.domain_shape:
        raise ShapeError(f"x shape {x.shape} != operator domain {p.op.domain_shape}")
    return p.grad(x)


def conjugate_gradient(apply_fn: Callable, b, tol: float, max_iter: int, x0=None):
    """CG for a symmetric positive (semi)definite operator; raises on stall."""
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_fn(x) if x0 is not None else b.copy()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b)
    p = r.copy()
    rs = float(np.vdot(r, r))
    for _ in range(max_iter):
        if math.sqrt(rs) <= tol * bnorm:
            return x
        ap = apply_fn(p)
        alpha = rs / float(np.vdot(p, ap))
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    if math.sqrt(rs) <= tol * bnorm:
        return x
    raise ConvergenceError(
        f"CG stopped at relative residual {math.sqrt(rs) / bnorm:.3e} after {max_iter} iterations (target {tol:.1e})"
    )


def solve_normal(op: LinearOperator, b, gamma: float, tol: float = 1e-10, max_iter: Optional[int] = None):
    """``(I + gamma A^T A)^{-1} b`` by the operator's closed form, else by CG."""
    if op.has_normal_solve:
        return op.normal_solve(b, gamma)
    n = op.domain_size
    return conjugate_gradient(
        lambda v: v + gamma * op.adjoint(op.apply(v)),
        np.asarray(b, dtype=np.float64),
        tol,
        10 * n if max_iter is None else max_iter,
    )


def solve_gram(op: LinearOperator, r, tol: float = 1e-12, max_iter: Optional[int] = None):
    """``(A A^T)^{-1} r`` by CG for operators without a diagonal Gram matrix."""
    m = op.range_size
    return conjugate_gradient(
        lambda v: op.apply(op.adjoint(v)), np.asarray(r, dtype=np.float64), tol, 10 * m if max_iter is None else max_iter
    )


@dataclass
class IterRecord:
    iter: int
    fidelity: float
    regularizer: Optional[float] = None
    objective: Optional[float] = None
    rel_change: Optional[float] = None
    primal_residual: Optional[float] = None
    constraint_residual: Optional[float] = None
    psnr: Optional[float] = None
    extras: dict = field(default_factory=dict, repr=False)


CSV_COLUMNS = [f.name for f in fields(IterRecord) if f.name != "extras"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


@dataclass
class IterationTrace:
    """Append-only per-iteration log of a solver run."""

    solver: str = ""
    records: list = field(default_factory=list)
    stop_reason: Optional[str] = None
    warnings: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def append(self, rec: IterRecord):
        if self.records and rec.iter <= self.records[-1].iter:
            raise ValueError("trace indices must increase strictly")
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def last(self) -> Optional[IterRecord]:
        return self.records[-1] if self.records else None

    def column(self, name: str) -> np.ndarray:
        if name in CSV_COLUMNS:
            vals = [getattr(r, name) for r in self.records]
        else:
            vals = [r.extras.get(name) for r in self.records]
        return np.array([np.nan if v is None else v for v in vals], dtype=np.float64)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _rel_change(new, old) -> float:
    prev_norm = float(np.linalg.norm(old))
    change = float(np.linalg.norm(new - old))
    return change / prev_norm if prev_norm > 0 else change


class Monitor:
    """Builds trace records, enforces the divergence guard and the stop rule."""

    def __init__(self, name: str, problem: Problem, cfg: SolverConfig, callback: Optional[Callable] = None):
        self.problem = problem
        self.cfg = cfg
        self.callback = callback
        self.trace = IterationTrace(solver=name)

    def record(self, k: int, x, x_prev, *, regularizer=None, primal_residual=None,
               constraint_residual=None, extras=None, residual=None, aux=None) -> bool:
        """Log iteration ``k``; return True when the relative change is below ``tol``.

        ``aux`` lists ``(new, old)`` pairs of auxiliary state (split or dual
        variables). The stop rule then requires every one of them to have
        settled as well, so a splitting method whose first x-step happens to
        reproduce its start does not stop early. ``rel_change`` in the trace
        always refers to ``x``.
        """
        cfg, p = self.cfg, self.problem
        xnorm = float(np.linalg.norm(x))
        if not math.isfinite(xnorm) or xnorm > cfg.divergence_limit:
            self._diverge(k, f"iterate norm {xnorm:.3e}")
        if residual is None:
            residual = p.residual(x)
        fid = 0.5 * float(np.vdot(residual, residual))
        obj = fid if regularizer is None else fid + regularizer
        if not math.isfinite(obj) or obj > cfg.divergence_limit:
            self._diverge(k, f"objective {obj:.3e}")
        rel = _rel_change(x, x_prev)
        stop_rel = rel
        for new, old in aux or ():
            stop_rel = max(stop_rel, _rel_change(new, old))
        rec = IterRecord(
            iter=k,
            fidelity=fid,
            regularizer=regularizer,
            objective=obj,
            rel_change=rel,
            primal_residual=primal_residual,
            constraint_residual=constraint_residual,
            psnr=psnr(p.ground_truth, x, p.peak) if p.ground_truth is not None else None,
            extras=extras or {},
        )
        self.trace.append(rec)
        if self.callback is not None:
            self.callback(k, x)
        return stop_rel < cfg.tol

    def _diverge(self, k, what):
        self.trace.stop_reason = STOP_DIVERGED
        err = DivergenceError(
            f"{self.trace.solver} diverged at iteration {k} ({what}); "
            f"try a smaller step (gamma={self.cfg.gamma}, mu_step={self.cfg.mu_step})"
        )
        err.trace = self.trace
        raise err

    def finish(self, converged: bool) -> IterationTrace:
        self.trace.stop_reason = STOP_CONVERGED if converged else STOP_MAX_ITERS
        return self.trace


def reg_value(prox, x, weight: float) -> Optional[float]:
    value = getattr(prox, "value", None)
    if value is None:
        return None
    v = value(x)
    if v is None:
        return None
    if getattr(prox, "kind", None) == "nonneg":
        # indicator: the weight does not apply, and an infeasible iterate
        # (e.g. ADMM's x before projection) has no finite value to report
        return v if v == 0.0 else None
    return weight * v
