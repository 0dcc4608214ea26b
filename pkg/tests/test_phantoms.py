import numpy as np
import pytest

from invprox.errors import DomainError
from invprox.phantoms import binary_masks, cartoon, moving_square


def test_moving_square():
    v = moving_square(16, 16, 4)
    assert v.shape == (4, 16, 16)
    assert set(np.unique(v)) == {0.1, 0.9}
    side = 16 // 4
    assert (v[0] == 0.9).sum() == side * side
    cols = [np.flatnonzero((v[k] == 0.9).any(axis=0)) for k in range(4)]
    assert all(cols[k + 1][0] == cols[k][0] + 1 for k in range(3))


def test_cartoon_piecewise_constant():
    c = cartoon(8, 8)
    assert c.shape == (8, 8)
    assert 2 <= len(np.unique(c)) <= 6
    assert c.min() >= 0 and c.max() <= 1


def test_binary_masks():
    m = binary_masks((4, 16, 16), 0.5, 7)
    assert set(np.unique(m)) <= {0.0, 1.0}
    assert abs(m.mean() - 0.5) < 0.1
    np.testing.assert_array_equal(m, binary_masks((4, 16, 16), 0.5, 7))
    assert not np.array_equal(m, binary_masks((4, 16, 16), 0.5, 8))
    np.testing.assert_array_equal(binary_masks((3, 3), 1.0, 0), 1.0)


@pytest.mark.parametrize("density", [0.0, -0.1, 1.5])
def test_bad_density(density):
    with pytest.raises(DomainError):
        binary_masks((4, 4), density, 0)
