import numpy as np
import pytest

from superchain.graded import GradedSpace, flip
from superchain.rmatrix import (
    anti_r_residuals,
    fused_r,
    fused_ybe_residual,
    fusion_product_check,
    inversion_residual,
    r_eval,
    unitarity_residual,
    ybe_residual,
)

SHAPES = [(1, 0), (2, 0), (1, 1), (0, 2), (2, 1), (1, 2)]


def test_r_matrix_is_u_plus_flip():
    V = GradedSpace.standard(1, 1)
    u = 0.3 + 0.4j
    assert np.allclose(r_eval(V, u), u * np.eye(4) + flip(V, V).entries)


@pytest.mark.parametrize("m,n", SHAPES)
def test_yang_baxter_and_unitarity(m, n):
    V = GradedSpace.standard(m, n)
    assert ybe_residual(V, 0.37 + 0.2j, -0.81 + 0.5j) < 1e-12
    assert unitarity_residual(V, 0.61 - 0.3j) < 1e-12


@pytest.mark.parametrize("m,n", [(2, 0), (1, 1), (2, 1), (1, 2)])
@pytest.mark.parametrize("k", [2, 3])
def test_antisymmetrizer_products(m, n, k):
    res = anti_r_residuals(k, GradedSpace.standard(m, n))
    assert max(res.values()) < 1e-12


def test_fused_r_trivial_case():
    V = GradedSpace.standard(1, 1)
    u = 0.2 + 0.7j
    assert np.allclose(fused_r(1, 1, V, u), r_eval(V, u))


@pytest.mark.parametrize("m,n", [(1, 1), (2, 1)])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_fusion_identities(m, n, k):
    res = fusion_product_check(k, GradedSpace.standard(m, n))
    assert max(res.values()) < 1e-10, res


def test_fused_yang_baxter():
    V = GradedSpace.standard(1, 1)
    for k, l in [(1, 2), (2, 1), (2, 2)]:
        assert fused_ybe_residual(k, l, V, 0.3 + 0.5j, -0.4 + 0.2j) < 1e-10


def test_inversion_identity_higher_wedge():
    V = GradedSpace.standard(1, 1)
    for k in (2, 3):
        assert inversion_residual(k, V, 0.4 + 0.3j) < 1e-12
