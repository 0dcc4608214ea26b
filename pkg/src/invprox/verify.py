"""Oracle-backed self checks: every structured fast path against dense arithmetic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracle
from .errors import SizeError
from .linops import Gradient, compose, gaussian_kernel, make_conv, make_identity, make_mask, make_superres, power_iteration_norm
from .phantoms import binary_masks
from .prox import ProximalMap
from .sci import SciOperator, gram_diagonal, sci_adjoint, sci_admm_x_update, sci_forward, sci_gap_x_update, woodbury_check

MAX_SCALE = 16  # n x n x 2 SCI stays within 512 unknowns


@dataclass
class Check:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.limit)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<32s} {self.value:.3e} (limit {self.limit:.0e})"


def registered_operators(n: int, seed: int = 0):
    """One instance of every operator family at image size ``n x n``."""
    rng = np.random.default_rng(seed)
    k = gaussian_kernel(0.8, 1)
    m2 = binary_masks((n, n), 0.5, seed)
    conv = make_conv(k, (n, n))
    return {
        "identity": make_identity((n, n), 1.5),
        "mask": make_mask(m2),
        "conv": conv,
        "superres": make_superres(k, (n, n), 2),
        "compose": compose(make_mask(m2), conv),
        "gradient": Gradient((n, n)),
        "sci": SciOperator(rng.random((2, n, n))),
    }


def adjoint_gap(op, pairs: int = 100, seed: int = 0) -> float:
    """Worst relative mismatch of ``<Ax, y>`` and ``<x, A^T y>`` over random pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        x = rng.standard_normal(op.domain_shape)
        y = rng.standard_normal(op.range_shape)
        lhs = float(np.vdot(op.apply(x), y))
        rhs = float(np.vdot(x, op.adjoint(y)))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return worst


def run_checks(scale: int = 4, seed: int = 0) -> list[Check]:
    if not 2 <= scale <= MAX_SCALE:
        raise SizeError(f"verify scale must lie in [2, {MAX_SCALE}] (oracle cap), got {scale}")
    n = scale
    rng = np.random.default_rng(seed)
    ops = registered_operators(n, seed)
    checks = [Check(f"adjoint/{name}", adjoint_gap(op, 100, seed), 1e-10) for name, op in ops.items()]
    for name, op in ops.items():
        m = oracle.materialize(op)
        mt = oracle.materialize_adjoint(op)
        checks.append(Check(f"transpose/{name}", float(np.max(np.abs(m - mt.T))), 1e-12))

    # closed-form normal solves
    for name in ("identity", "mask", "conv", "sci"):
        op = ops[name]
        b = rng.standard_normal(op.domain_shape)
        dense = oracle.dense_solve_normal(oracle.materialize(op), 0.7, b.ravel())
        checks.append(Check(f"normal_solve/{name}", float(np.max(np.abs(op.normal_solve(b, 0.7).ravel() - dense))), 1e-8))

    # SCI structured paths, with a pixel no mask covers
    masks = binary_masks((2, n, n), 0.5, seed + 7)
    masks[:, 0, 0] = 0.0
    sci = SciOperator(masks)
    m = oracle.materialize(sci)
    x = rng.standard_normal(sci.domain_shape)
    y = rng.standard_normal(sci.range_shape)
    checks.append(Check("sci/forward", float(np.max(np.abs(sci_forward(masks, x).ravel() - m @ x.ravel()))), 1e-12))
    checks.append(Check("sci/adjoint", float(np.max(np.abs(sci_adjoint(masks, y).ravel() - m.T @ y.ravel()))), 1e-12))
    gram = m @ m.T
    checks.append(Check("sci/gram_diagonal", float(np.max(np.abs(gram_diagonal(masks).ravel() - np.diag(gram)))), 0.0))
    checks.append(Check("sci/gram_offdiagonal", float(np.max(np.abs(gram - np.diag(np.diag(gram))))), 0.0))
    live = sci.phi_sum_raw.ravel() > 0
    y_live = y.ravel().copy()
    y_live[~live] = 0.0
    proj = sci_gap_x_update(sci, x, y_live.reshape(sci.range_shape)).ravel()
    dense = oracle.dense_projection(m[live], x.ravel(), y_live[live])
    checks.append(Check("sci/gap_projection", float(np.max(np.abs(proj - dense))), 1e-8))
    z, s = rng.standard_normal((2,) + sci.domain_shape)
    got = sci_admm_x_update(sci, z, s, y, 1.3).ravel()
    want = oracle.dense_solve_normal(m, 1.3, (z - s).ravel() + 1.3 * m.T @ y.ravel())
    checks.append(Check("sci/admm_x_update", float(np.max(np.abs(got - want))), 1e-8))
    small = SciOperator(rng.random((2, 3, 3)))
    for g in (0.5, 1.0, 5.0):
        probe = rng.standard_normal(small.domain_shape)
        checks.append(Check(f"woodbury/gamma={g:g}", woodbury_check(small, g, probe), 1e-10))

    # Moreau identity
    for kind in ("l1", "l2sq", "nonneg"):
        p = ProximalMap(kind)
        worst = 0.0
        for sig in (0.5, 1.0, 2.0):
            v = 3.0 * rng.standard_normal(100)
            worst = max(worst, float(np.max(np.abs(p.conjugate(v, sig) + sig * p(v / sig, 1.0 / sig) - v))))
        checks.append(Check(f"moreau/{kind}", worst, 1e-12))

    # operator norm estimate
    for name in ("conv", "superres", "sci"):
        op = ops[name]
        m = oracle.materialize(op)
        exact = float(np.linalg.eigvalsh(m.T @ m).max())
        est = power_iteration_norm(op, 500, seed)
        checks.append(Check(f"power_iteration/{name}", abs(est - exact) / exact, 1e-6))
    return checks
