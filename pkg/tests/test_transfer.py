import numpy as np
import pytest

from conftest import make_chain
from superchain.transfer import (
    asymptotic_supertrace,
    berezinian_series_check,
    cartan_invariance_residual,
    commutator_norm,
    dlq_expected,
    dlq_operator,
    factorial_ratio,
    gen_binomial,
    gl_invariance_residual,
    s_transfer_relation_residual,
    transfer_antisym,
    transfer_antisym_tensor,
    transfer_sym,
)


def test_gen_binomial():
    assert gen_binomial(5, 2) == 10
    assert gen_binomial(-1, 3) == -1
    assert gen_binomial(0, 2) == 0
    assert gen_binomial(2.5, -1) == 0


def test_factorial_ratio_zero_superdimension():
    # (0 - k)! / ((0 - l)! (l - k)!) read as a falling factorial; k=0, l=2 gives C(0, 2) = 0
    assert factorial_ratio(0, 0, 2) == 0
    assert factorial_ratio(0, 1, 2) == -1
    assert factorial_ratio(-1, 0, 1) == -1


def test_first_transfer_matrix_one_site():
    q = np.array([1.3, 0.4])
    c = make_chain(1, 1, ["vector"], [0.2], q)
    mono = c.monodromy()
    u = 0.7 + 0.5j
    want = q[0] * mono.entry(0, 0, u) - q[1] * mono.entry(1, 1, u)
    assert np.allclose(transfer_antisym(mono, 1, u, q), want)


def test_zeroth_transfer_is_identity(gl11_chain):
    assert np.allclose(transfer_antisym(gl11_chain, 0, 0.3), np.eye(4))
    assert np.allclose(transfer_sym(gl11_chain, 0, 0.3), np.eye(4))


def test_sym_and_antisym_agree_at_k1(gl21_chain):
    u = 0.3 + 0.6j
    assert np.allclose(transfer_sym(gl21_chain, 1, u), transfer_antisym(gl21_chain, 1, u))


def test_wedge_restriction_matches_tensor_form(gl11_chain):
    u = -0.4 + 0.8j
    assert np.allclose(transfer_antisym(gl11_chain, 2, u), transfer_antisym_tensor(gl11_chain, 2, u))


def test_large_u_limit(gl11_chain):
    u = 1e6
    for k in (1, 2):
        target = asymptotic_supertrace(gl11_chain.twist, k, gl11_chain.aux)
        assert np.allclose(transfer_antisym(gl11_chain, k, u), target * np.eye(4), atol=1e-4)


@pytest.mark.parametrize("fixture", ["gl11_chain", "gl21_chain"])
def test_commutativity(fixture, request):
    c = request.getfixturevalue(fixture)
    u, v = 0.3 + 0.4j, -0.7 + 0.2j
    ops = [transfer_antisym(c, k, u) for k in (1, 2)] + [transfer_antisym(c, k, v) for k in (1, 2)]
    ops += [transfer_sym(c, k, v) for k in (1, 2)]
    for A in ops:
        for B in ops:
            assert commutator_norm(A, B) < 1e-12


def test_cartan_and_gl_invariance(gl21_chain):
    assert cartan_invariance_residual(gl21_chain, 2, 0.2 + 0.9j) < 1e-12
    assert gl_invariance_residual(gl21_chain, 2, 0.2 + 0.9j) < 1e-12


def test_transfer_not_gl_invariant_with_generic_twist(gl21_chain):
    T = transfer_antisym(gl21_chain, 1, 0.2 + 0.9j)
    assert commutator_norm(T, gl21_chain.gl_action(0, 1)) > 1e-3


def test_berezinian_convolution(gl11_chain):
    assert max(berezinian_series_check(gl11_chain, 3, 0.4 + 0.6j)) < 1e-12


@pytest.mark.parametrize("l", [1, 2, 3])
def test_difference_operator_coefficients(gl11_chain, l):
    got = dlq_operator(gl11_chain, l, 0.5 + 0.3j)
    want = dlq_expected(gl11_chain, l, 0.5 + 0.3j)
    for g, w in zip(got, want):
        assert np.allclose(g, w, atol=1e-12)


def test_first_difference_operator_explicit(gl21_chain):
    u = 0.1 + 0.4j
    c0, c1 = dlq_operator(gl21_chain, 1, u)
    assert np.allclose(c0, 1 * np.eye(gl21_chain.dim))  # superdimension 2 - 1
    assert np.allclose(c1, -transfer_antisym(gl21_chain, 1, u))


def test_s_transfer_binomial_relation(gl21_chain):
    assert s_transfer_relation_residual(gl21_chain, 2, 0.3 + 0.3j) < 1e-12
