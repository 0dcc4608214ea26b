import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invprox import oracle
from invprox.denoisers import (
    GaussianFilter, IdentityDenoiser, LinearSymmetric, MedianFilter, ProxDenoiser, TVDenoiser,
    as_prox, denoise, local_homogeneity_defect, make_denoiser, red_gradient, red_regularizer_value,
)
from invprox.errors import DomainError
from invprox.linops import make_conv
from invprox.prox import ProximalMap

DC_KINDS = ["gaussian_filter", "tv_denoiser", "linear_symmetric"]
ALL_KINDS = DC_KINDS + ["median_filter", "identity"]


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_shape_preserved(kind):
    v = np.random.default_rng(0).random((2, 6, 7))
    assert denoise(make_denoiser(kind), v, 0.1).shape == v.shape


@pytest.mark.parametrize("kind", DC_KINDS)
@given(c=st.floats(-2, 2), sigma=st.floats(0, 0.3))
def test_constant_fixed_point(kind, c, sigma):
    v = c * np.ones((6, 6))
    np.testing.assert_allclose(make_denoiser(kind)(v, sigma), v, atol=1e-10)


@pytest.mark.parametrize("kind", ["tv_denoiser", "gaussian_filter"])
def test_sigma_zero_is_identity(kind):
    v = np.random.default_rng(1).random((5, 5))
    np.testing.assert_array_equal(make_denoiser(kind)(v, 0.0), v)


def test_negative_sigma():
    with pytest.raises(DomainError):
        make_denoiser("tv_denoiser")(np.ones((3, 3)), -0.1)


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_denoiser("bm3d")


def test_gaussian_mass_preserved():
    v = np.zeros((15, 15))
    v[7, 7] = 1.0
    out = GaussianFilter()(v, 1.5)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)
    assert out[7, 7] < 1.0


def test_gaussian_strength_grows_with_sigma():
    v = np.random.default_rng(2).random((12, 12))
    d = GaussianFilter()
    assert np.std(d(v, 2.0)) < np.std(d(v, 0.5)) < np.std(v)


def test_tv_denoiser_frames_independent():
    rng = np.random.default_rng(3)
    v = rng.random((2, 6, 6))
    d = TVDenoiser(weight=1.0, inner_iters=20)
    np.testing.assert_allclose(d(v, 0.1)[1], d(v[1], 0.1), atol=1e-14)


@pytest.mark.parametrize("d", [GaussianFilter(), MedianFilter(3)])
@given(seed=st.integers(0, 2**16), sigma=st.floats(0.1, 3.0))
def test_max_principle(d, seed, sigma):
    v = np.random.default_rng(seed).uniform(-1, 2, (7, 7))
    out = d(v, sigma)
    assert out.min() >= v.min() - 1e-12 and out.max() <= v.max() + 1e-12


def test_median_removes_impulse():
    v = np.zeros((5, 5))
    v[2, 2] = 10.0
    np.testing.assert_array_equal(MedianFilter(3)(v, 0.0), 0.0)


class TestLinearSymmetric:
    def test_requires_point_symmetry(self):
        with pytest.raises(DomainError):
            LinearSymmetric(np.array([[0, 0, 0], [0, 0.5, 0.5], [0, 0, 0]]))

    def test_matrix_is_symmetric(self):
        d = LinearSymmetric()
        w = oracle.materialize(make_conv(d.kernel.taps, (4, 4)))
        np.testing.assert_allclose(w, w.T, atol=0)


class TestRed:
    def test_value_examples(self):
        x = np.random.default_rng(0).random((3, 3))
        assert red_regularizer_value(LinearSymmetric(), np.zeros((3, 3)), 1.3) == 0.0
        assert red_regularizer_value(IdentityDenoiser(), x, 2.0) == 0.0

    def test_value_dense_quadratic_form(self):
        d = LinearSymmetric()
        x = np.random.default_rng(0).random((3, 3))
        w = oracle.materialize(make_conv(d.kernel.taps, (3, 3)))
        v = x.ravel()
        dense = 0.5 * 0.7 * v @ ((np.eye(9) - w) @ v)
        assert abs(red_regularizer_value(d, x, 0.7) - dense) <= 1e-10

    def test_gradient_examples(self):
        x = np.random.default_rng(1).random((4, 4))
        np.testing.assert_array_equal(red_gradient(IdentityDenoiser(), x, 1.0), 0.0)
        d = LinearSymmetric()
        np.testing.assert_allclose(red_gradient(d, x, 1.4), 2 * red_gradient(d, x, 0.7), atol=1e-15)

    def test_gradient_finite_differences(self):
        rng = np.random.default_rng(2)
        d, lam, h = LinearSymmetric(), 0.8, 1e-4
        x = rng.random((8, 8))
        g = red_gradient(d, x, lam)
        for idx in rng.choice(64, 20, replace=False):
            e = np.zeros(64)
            e[idx] = h
            e = e.reshape(8, 8)
            fd = (red_regularizer_value(d, x + e, lam) - red_regularizer_value(d, x - e, lam)) / (2 * h)
            assert abs(fd - g.ravel()[idx]) <= 1e-5

    def test_negative_lambda(self):
        with pytest.raises(DomainError):
            red_regularizer_value(LinearSymmetric(), np.ones((3, 3)), -1.0)


class TestHomogeneity:
    def test_linear_kinds(self):
        x = np.random.default_rng(0).random((8, 8))
        assert local_homogeneity_defect(LinearSymmetric(), x, 1e-3) <= 1e-12
        assert local_homogeneity_defect(GaussianFilter(), x, 1e-3, sigma=1.0) <= 1e-12

    def test_median_diagnostic(self):
        x = np.random.default_rng(0).random((8, 8))
        assert local_homogeneity_defect(MedianFilter(), x, 1e-3) >= 0.0

    def test_errors(self):
        with pytest.raises(DomainError):
            local_homogeneity_defect(LinearSymmetric(), np.ones((3, 3)), 0.1)
        with pytest.raises(DomainError):
            local_homogeneity_defect(LinearSymmetric(), np.zeros((3, 3)), 1e-3)


def test_prox_denoiser_and_adapter():
    p = ProximalMap("l1")
    v = np.linspace(-1, 1, 9).reshape(3, 3)
    np.testing.assert_array_equal(ProxDenoiser(p, 0.3)(v, 5.0), p(v, 0.3))
    ad = as_prox(LinearSymmetric())
    np.testing.assert_array_equal(ad(v, 0.2), LinearSymmetric()(v, 0.2))
