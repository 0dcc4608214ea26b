import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invprox import oracle
from invprox.errors import DomainError, ShapeError
from invprox.linops import (
    BlurKernel, MatrixOperator, box_kernel, compose, gaussian_kernel, make_conv, make_gradient,
    make_identity, make_mask, make_superres, power_iteration_norm,
)
from invprox.sci import SciOperator
from invprox.verify import adjoint_gap

DELTA = np.array([[0.0, 0, 0], [0, 1, 0], [0, 0, 0]])


def random_matrix_op(seed=0):
    return MatrixOperator(np.random.default_rng(seed).standard_normal((4, 6)))


def all_ops(n=6):
    rng = np.random.default_rng(5)
    k = gaussian_kernel(0.9, 1)
    mask = (rng.random((n, n)) < 0.5).astype(float)
    return {
        "identity": make_identity((n, n)),
        "scaled_identity": make_identity((n, n), 2.5),
        "mask": make_mask(mask),
        "conv": make_conv(k, (n, n)),
        "conv3d": make_conv(rng.random((3, 5)), (2, n, n)),
        "superres": make_superres(k, (n, n), 2),
        "compose": compose(make_mask(mask), make_conv(k, (n, n))),
        "gradient": make_gradient((n, n)),
        "matrix": random_matrix_op(),
        "sci": SciOperator(rng.random((3, n, n))),
    }


OPS = all_ops()


@pytest.mark.parametrize("name", sorted(OPS))
def test_adjoint_identity(name):
    assert adjoint_gap(OPS[name], 100, seed=1) <= 1e-10


@pytest.mark.parametrize("name", sorted(OPS))
def test_dense_transpose_consistency(name):
    op = OPS[name]
    np.testing.assert_allclose(oracle.materialize_adjoint(op), oracle.materialize(op).T, atol=1e-12)


@pytest.mark.parametrize("name", sorted(OPS))
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2**16))
def test_linearity(name, a, b, seed):
    op = OPS[name]
    rng = np.random.default_rng(seed)
    x1, x2 = rng.standard_normal((2,) + op.domain_shape)
    np.testing.assert_allclose(op.apply(a * x1 + b * x2), a * op.apply(x1) + b * op.apply(x2), atol=1e-12 * 10)


@pytest.mark.parametrize("name", [n for n in sorted(OPS) if OPS[n].has_normal_solve])
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_normal_solve_matches_dense(name, gamma):
    op = OPS[name]
    b = np.random.default_rng(2).standard_normal(op.domain_shape)
    dense = oracle.dense_solve_normal(oracle.materialize(op), gamma, b.ravel())
    np.testing.assert_allclose(op.normal_solve(b, gamma).ravel(), dense, atol=1e-8)


@pytest.mark.parametrize("name", [n for n in sorted(OPS) if OPS[n].has_gram_diag])
def test_gram_diag_matches_dense(name):
    op = OPS[name]
    m = oracle.materialize(op)
    np.testing.assert_allclose(op.gram_diag().ravel(), np.diag(m @ m.T), atol=1e-12)


def test_shape_errors():
    op = make_identity((3, 3))
    with pytest.raises(ShapeError):
        op.apply(np.zeros((3, 4)))
    with pytest.raises(ShapeError):
        op.adjoint(np.zeros(9))


class TestIdentity:
    def test_examples(self):
        v = np.random.default_rng(0).random((3, 4))
        op = make_identity(v.shape)
        np.testing.assert_array_equal(op.apply(v), v)
        np.testing.assert_array_equal(op.adjoint(v), v)
        np.testing.assert_allclose(op.normal_solve(v, 1.0), v / 2)
        np.testing.assert_array_equal(op.gram_diag(), np.ones(v.shape))


class TestMask:
    def test_examples(self):
        v = np.random.default_rng(0).random((4, 4))
        np.testing.assert_array_equal(make_mask(np.ones((4, 4))).apply(v), v)
        np.testing.assert_array_equal(make_mask(np.zeros((4, 4))).apply(v), 0)
        m = make_mask(np.random.default_rng(1).random((4, 4)) < 0.5)
        np.testing.assert_array_equal(m.apply(m.apply(v)), m.apply(v))
        np.testing.assert_array_equal(m.adjoint(v), m.apply(v))

    def test_normal_solve_dense_4x4(self):
        m = make_mask(np.random.default_rng(1).random((4, 4)) < 0.5)
        b = np.random.default_rng(2).standard_normal((4, 4))
        dense = oracle.dense_solve_normal(oracle.materialize(m), 0.7, b.ravel())
        np.testing.assert_allclose(m.normal_solve(b, 0.7).ravel(), dense, atol=1e-12)

    def test_nonbinary_rejected(self):
        with pytest.raises(DomainError):
            make_mask(np.array([[0.0, 0.5]]))


class TestConv:
    def test_delta_is_identity(self):
        v = np.random.default_rng(0).random((5, 6))
        np.testing.assert_allclose(make_conv(DELTA, v.shape).apply(v), v, atol=0)

    def test_dc_preserved(self):
        op = make_conv(gaussian_kernel(1.0, 2), (6, 6))
        np.testing.assert_allclose(op.apply(3.0 * np.ones((6, 6))), 3.0, atol=1e-14)

    def test_shift_kernel_is_circular(self):
        k = np.zeros((3, 3))
        k[1, 0] = 1.0  # picks the left neighbour in correlation terms
        v = np.arange(12.0).reshape(3, 4)
        out = make_conv(k, v.shape).apply(v)
        assert sorted(out.ravel()) == sorted(v.ravel())
        assert not np.array_equal(out, v)

    def test_adjoint_dense_5x5(self):
        op = make_conv(np.random.default_rng(3).random((3, 3)), (5, 5))
        m = oracle.materialize(op)
        y = np.random.default_rng(4).standard_normal((5, 5))
        np.testing.assert_allclose(op.adjoint(y).ravel(), m.T @ y.ravel(), atol=1e-12)

    def test_kernel_too_large(self):
        with pytest.raises(ShapeError):
            make_conv(np.ones((5, 5)), (3, 8))

    def test_only_circular(self):
        with pytest.raises(ValueError):
            make_conv(DELTA, (4, 4), boundary="reflect")

    def test_kernel_validation(self):
        with pytest.raises(ShapeError):
            BlurKernel(np.ones((2, 3)))
        k = BlurKernel(box_kernel(3))
        assert k.normalization == pytest.approx(1.0)


class TestSuperres:
    def test_factor_one_delta(self):
        v = np.random.default_rng(0).random((4, 4))
        np.testing.assert_allclose(make_superres(DELTA, v.shape, 1).apply(v), v)

    def test_pure_decimation(self):
        v = np.arange(16.0).reshape(4, 4)
        out = make_superres(DELTA, (4, 4), 2).apply(v)
        np.testing.assert_array_equal(out, [[v[0, 0], v[0, 2]], [v[2, 0], v[2, 2]]])

    def test_adjoint_50_pairs(self):
        assert adjoint_gap(make_superres(gaussian_kernel(0.7, 1), (6, 8), 2), 50) <= 1e-10

    def test_nondivisible(self):
        with pytest.raises(ShapeError):
            make_superres(DELTA, (5, 4), 2)

    def test_equals_composition(self):
        k = gaussian_kernel(0.7, 1)
        sub = make_superres(DELTA, (4, 4), 2)
        blur = make_conv(k, (4, 4))
        v = np.random.default_rng(1).random((4, 4))
        np.testing.assert_allclose(compose(sub, blur).apply(v), make_superres(k, (4, 4), 2).apply(v), atol=1e-12)
        m = oracle.materialize(compose(sub, blur))
        y = np.random.default_rng(2).random((2, 2))
        np.testing.assert_allclose(compose(sub, blur).adjoint(y).ravel(), m.T @ y.ravel(), atol=1e-12)


class TestCompose:
    def test_identity_outer(self):
        op = random_matrix_op()
        c = compose(make_identity(op.range_shape), op)
        x = np.random.default_rng(0).standard_normal(6)
        np.testing.assert_allclose(c.apply(x), op.apply(x))
        assert not c.has_normal_solve and not c.has_gram_diag

    def test_chain_mismatch(self):
        with pytest.raises(ShapeError):
            compose(make_identity((3, 3)), make_identity((4, 4)))

    def test_associative(self):
        rng = np.random.default_rng(0)
        a, b, c = (make_conv(rng.random((3, 3)), (5, 5)) for _ in range(3))
        x = rng.random((5, 5))
        np.testing.assert_allclose(compose(a, compose(b, c)).apply(x), compose(compose(a, b), c).apply(x), atol=1e-12)


class TestMatrixOperator:
    def test_matches_dense(self):
        op = random_matrix_op()
        x = np.random.default_rng(1).standard_normal(6)
        np.testing.assert_allclose(op.apply(x), oracle.materialize(op) @ x, atol=1e-12)


class TestPowerIteration:
    def test_identity_and_scaled(self):
        assert power_iteration_norm(make_identity((4, 4)), 10) == pytest.approx(1.0, abs=1e-9)
        assert power_iteration_norm(make_identity((4, 4), 3.0), 10) == pytest.approx(9.0, abs=1e-6)

    def test_random_matrix_vs_dense(self):
        op = random_matrix_op(3)
        m = oracle.materialize(op)
        exact = np.linalg.eigvalsh(m.T @ m).max()
        assert abs(power_iteration_norm(op, 200) - exact) <= 1e-6 * exact

    def test_zero_operator(self):
        assert power_iteration_norm(MatrixOperator(np.zeros((3, 4))), 20) == 0.0

    def test_deterministic_and_monotone(self):
        op = make_conv(np.random.default_rng(0).random((3, 3)), (6, 6))
        vals = [power_iteration_norm(op, it, seed=4) for it in (1, 2, 5, 10, 40)]
        assert vals == [power_iteration_norm(op, it, seed=4) for it in (1, 2, 5, 10, 40)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_gradient_norm(self):
        assert power_iteration_norm(make_gradient((8, 8)), 300) == pytest.approx(8.0, rel=1e-6)
