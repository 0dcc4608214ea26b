import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from invprox.denoisers import IdentityDenoiser
from invprox.errors import DomainError
from invprox.prox import ProximalMap, prox_conjugate, prox_l1, prox_l2sq, prox_nonneg, prox_tv, tv_value

vec = arrays(np.float64, (12,), elements=st.floats(-5, 5))
CLOSED = ["l1", "l2sq", "nonneg"]


def step_image():
    z = np.zeros((8, 8))
    z[:, 4:] = 1.0
    return z


def prox_objective(x, z, tau, isotropic=True):
    return 0.5 * float(np.sum((x - z) ** 2)) + tau * tv_value(x, isotropic)


def reference_tv(z, tau, iters=5000):
    """Plain projected-gradient dual iteration with circular forward differences."""
    p = np.zeros((2,) + z.shape)
    for _ in range(iters):
        div = (p[0] - np.roll(p[0], 1, 0)) + (p[1] - np.roll(p[1], 1, 1))
        u = div - z / tau
        g = np.stack([np.roll(u, -1, 0) - u, np.roll(u, -1, 1) - u])
        p = p + g / 8.0
        p /= np.maximum(1.0, np.sqrt(p[0] ** 2 + p[1] ** 2))
    div = (p[0] - np.roll(p[0], 1, 0)) + (p[1] - np.roll(p[1], 1, 1))
    return z + tau * div


def grid_argmin(fn, lo, hi, step=1e-4):
    grid = np.arange(lo, hi + step / 2, step)
    return grid[np.argmin(fn(grid))]


class TestL1:
    def test_examples(self):
        assert prox_l1(np.array([2.0]), 0.5)[0] == 1.5
        assert prox_l1(np.array([0.3]), 0.5)[0] == 0.0
        assert prox_l1(np.array([-1.0]), 0.25)[0] == -0.75

    def test_grid_search(self):
        x = grid_argmin(lambda t: 0.5 * (t + 1.0) ** 2 + 0.25 * np.abs(t), -2, 0)
        assert abs(x - prox_l1(np.array([-1.0]), 0.25)[0]) <= 1e-3

    def test_negative_tau(self):
        with pytest.raises(DomainError):
            prox_l1(np.ones(2), -0.1)


class TestL2sq:
    def test_examples(self):
        z = np.array([2.0, -3.0])
        np.testing.assert_array_equal(prox_l2sq(z, 0.0), z)
        assert prox_l2sq(np.array([2.0]), 1.0)[0] == 1.0

    def test_grid_search(self):
        x = grid_argmin(lambda t: 0.5 * (t - 2.0) ** 2 + 0.7 * 0.5 * t ** 2, -1, 3)
        assert abs(x - prox_l2sq(np.array([2.0]), 0.7)[0]) <= 1e-3

    def test_negative_tau(self):
        with pytest.raises(DomainError):
            prox_l2sq(np.ones(2), -1.0)


class TestNonneg:
    def test_examples(self):
        z = np.array([0.5, 2.0])
        np.testing.assert_array_equal(prox_nonneg(z), z)
        assert prox_nonneg(np.array([-1.0]))[0] == 0.0

    @given(vec)
    def test_idempotent(self, z):
        np.testing.assert_array_equal(prox_nonneg(prox_nonneg(z)), prox_nonneg(z))


class TestTV:
    def test_tau_zero_exact(self):
        z = np.random.default_rng(0).random((6, 7))
        np.testing.assert_array_equal(prox_tv(z, 0.0), z)

    def test_constant_unchanged(self):
        z = 0.3 * np.ones((6, 6))
        np.testing.assert_allclose(prox_tv(z, 0.5), z, atol=1e-14)

    def test_step_image_vs_long_reference(self):
        z, tau = step_image(), 0.25
        ref = prox_objective(reference_tv(z, tau), z, tau)
        got = prox_objective(prox_tv(z, tau, inner_iters=100), z, tau)
        assert got <= ref + 1e-4

    @pytest.mark.parametrize("isotropic", [True, False])
    def test_objective_nonincreasing_in_inner_iters(self, isotropic):
        z = np.random.default_rng(3).random((8, 8))
        vals = [prox_objective(prox_tv(z, 0.2, it, isotropic), z, 0.2, isotropic) for it in range(1, 60)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    def test_per_frame(self):
        rng = np.random.default_rng(1)
        stack = rng.random((3, 6, 6))
        out = prox_tv(stack, 0.1, 20)
        for k in range(3):
            np.testing.assert_allclose(out[k], prox_tv(stack[k], 0.1, 20), atol=1e-14)

    def test_early_stop_tolerance(self):
        z = np.random.default_rng(2).random((8, 8))
        loose = prox_tv(z, 0.2, 5000, tol=1e-3)
        tight = prox_tv(z, 0.2, 5000, tol=1e-12)
        assert prox_objective(tight, z, 0.2) <= prox_objective(loose, z, 0.2) + 1e-15

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            prox_tv(np.ones((3, 3)), -1.0)
        with pytest.raises(ValueError):
            prox_tv(np.ones((3, 3)), 1.0, inner_iters=0)


def _prox_for(kind):
    return ProximalMap(kind, inner_iters=3000) if kind.startswith("tv") else ProximalMap(kind)


@pytest.mark.parametrize("kind", CLOSED + ["tv_iso", "tv_aniso"])
def test_prox_optimality_against_perturbations(kind):
    rng = np.random.default_rng(11)
    p = _prox_for(kind)
    z = rng.standard_normal((4, 4))
    tau = 0.3
    x = p(z, tau)

    def obj(v):
        r = p.value(v)
        return 0.5 * float(np.sum((v - z) ** 2)) + (r if kind == "nonneg" else tau * r)

    base = obj(x)
    for eps in (1e-3, 1e-2):
        for _ in range(500):
            u = rng.standard_normal(z.shape)
            assert base <= obj(x + eps * u / np.linalg.norm(u)) + 1e-8


@pytest.mark.parametrize("kind", CLOSED + ["tv_iso"])
def test_nonexpansive(kind):
    rng = np.random.default_rng(5)
    p = _prox_for(kind) if kind in CLOSED else ProximalMap(kind, inner_iters=2000, inner_tol=1e-13)
    for _ in range(100 if kind in CLOSED else 10):
        a, b = rng.standard_normal((2, 5, 5))
        assert np.linalg.norm(p(a, 0.4) - p(b, 0.4)) <= np.linalg.norm(a - b) + 1e-10


@pytest.mark.parametrize("kind", ["l1", "l2sq"])
@given(a=vec, b=vec, tau=st.floats(0, 3))
def test_separable(kind, a, b, tau):
    p = ProximalMap(kind)
    np.testing.assert_array_equal(p(np.concatenate([a, b]), tau), np.concatenate([p(a, tau), p(b, tau)]))


class TestConjugate:
    @pytest.mark.parametrize("kind", CLOSED + ["tv_iso"])
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_moreau_reconstruction(self, kind, sigma):
        p = ProximalMap(kind)
        rng = np.random.default_rng(0)
        for _ in range(100 if kind in CLOSED else 5):
            x = 3 * rng.standard_normal((4, 4))
            np.testing.assert_allclose(p.conjugate(x, sigma) + sigma * p(x / sigma, 1 / sigma), x, atol=1e-12, rtol=0)

    def test_l1_is_box_projection(self):
        x = np.linspace(-3, 3, 25)
        np.testing.assert_allclose(prox_conjugate(ProximalMap("l1"), x, 1.0), np.clip(x, -1, 1), atol=1e-15)

    def test_weighted_l1_box(self):
        x = np.linspace(-3, 3, 25)
        np.testing.assert_allclose(ProximalMap("l1").conjugate(x, 0.7, weight=0.2), np.clip(x, -0.2, 0.2), atol=1e-15)

    def test_l2sq_against_sup_grid(self):
        sigma, xval = 0.8, 1.7
        xs = np.arange(-10, 10, 1e-3)
        mus = np.arange(-5, 5, 1e-3)
        conj = np.array([np.max(xs * mu - 0.5 * xs ** 2) for mu in mus])
        grid = mus[np.argmin(0.5 * (mus - xval) ** 2 + sigma * conj)]
        got = ProximalMap("l2sq").conjugate(np.array([xval]), sigma)[0]
        assert abs(got - grid) <= 1e-3

    def test_sigma_positive(self):
        with pytest.raises(DomainError):
            ProximalMap("l1").conjugate(np.ones(2), 0.0)


class TestProximalMap:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ProximalMap("huber")

    def test_values(self):
        x = np.array([[1.0, -2.0], [0.0, 3.0]])
        assert ProximalMap("l1").value(x) == 6.0
        assert ProximalMap("l2sq").value(x) == 7.0
        assert ProximalMap("nonneg").value(x) == np.inf
        assert ProximalMap("nonneg").value(np.abs(x)) == 0.0
        assert ProximalMap("tv_aniso").value(x) == tv_value(x, False)

    def test_denoiser_adapter(self):
        p = ProximalMap("denoiser_adapter", denoiser=IdentityDenoiser())
        z = np.random.default_rng(0).random((3, 3))
        np.testing.assert_array_equal(p(z, 0.3), z)
        assert p.value(z) is None
        with pytest.raises(ValueError):
            ProximalMap("denoiser_adapter")
