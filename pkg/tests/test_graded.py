import itertools

import numpy as np
import pytest

from superchain.graded import (
    GradedSpace,
    SuperOp,
    embed,
    flip,
    kron_graded,
    partial_supertrace,
    permutation_operator,
    projectors,
    supercommutator,
    supertrace,
    supertranspose,
    tensor_spaces,
    wedge_indices,
)
from superchain.transfer import asymptotic_supertrace


def random_homogeneous(V, parity, rng):
    X = rng.normal(size=(V.dim, V.dim)) + 1j * rng.normal(size=(V.dim, V.dim))
    deg = (V.array[:, None] + V.array[None, :]) % 2
    return SuperOp(np.where(deg == parity, X, 0), V)


def basis(V, i):
    e = np.zeros(V.dim, dtype=complex)
    e[i] = 1
    return e


def test_standard_space():
    V = GradedSpace.standard(2, 1)
    assert V.parities == (0, 0, 1)
    assert (V.m, V.n, V.sdim) == (2, 1, 1)
    with pytest.raises(ValueError):
        GradedSpace.standard(0, 0)
    with pytest.raises(ValueError):
        GradedSpace((0, 2))


def test_tensor_parities():
    V = GradedSpace.standard(1, 1)
    assert tensor_spaces(V, V).parities == (0, 1, 1, 0)


def test_supertrace_of_identity_is_superdimension():
    for m, n in [(1, 1), (2, 1), (1, 2), (0, 3)]:
        V = GradedSpace.standard(m, n)
        assert supertrace(SuperOp.identity(V)) == pytest.approx(m - n)


def test_supertrace_cyclic_for_even(rng):
    V = GradedSpace.standard(2, 2)
    A, B = random_homogeneous(V, 0, rng), random_homogeneous(V, 0, rng)
    assert abs(supertrace(A @ B) - supertrace(B @ A)) < 1e-12


def test_supertrace_vanishes_on_supercommutator_of_odd(rng):
    V = GradedSpace.standard(1, 2)
    A, B = random_homogeneous(V, 1, rng), random_homogeneous(V, 1, rng)
    assert abs(supertrace(supercommutator(A, B))) < 1e-12


def test_parity_detection(rng):
    V = GradedSpace.standard(1, 1)
    assert random_homogeneous(V, 1, rng).parity == 1
    assert random_homogeneous(V, 0, rng).parity == 0
    mixed = SuperOp(np.ones((2, 2)), V)
    assert mixed.parity is None


def test_flip_koszul_sign():
    V = GradedSpace.standard(1, 1)
    P = flip(V, V).entries
    for i, j in itertools.product(range(2), repeat=2):
        lhs = P @ np.kron(basis(V, i), basis(V, j))
        sign = (-1) ** (V.parities[i] * V.parities[j])
        assert np.allclose(lhs, sign * np.kron(basis(V, j), basis(V, i)))


def test_flip_is_involution():
    V = GradedSpace.standard(2, 1)
    P = flip(V, V).entries
    assert np.allclose(P @ P, np.eye(9))


def test_kron_graded_interchange(rng):
    # (A ⊗ B)(C ⊗ D) = (-1)^{|B||C|} AC ⊗ BD
    V = GradedSpace.standard(1, 2)
    for pb, pc in itertools.product((0, 1), repeat=2):
        A, B = random_homogeneous(V, 0, rng), random_homogeneous(V, pb, rng)
        C, D = random_homogeneous(V, pc, rng), random_homogeneous(V, 1, rng)
        lhs = (kron_graded(A, B) @ kron_graded(C, D)).entries
        rhs = (-1) ** (pb * pc) * kron_graded(A @ C, B @ D).entries
        assert np.allclose(lhs, rhs)


def test_partial_supertrace_matches_definition(rng):
    aux, rest = GradedSpace.standard(1, 2), GradedSpace.standard(1, 1)
    D = aux.dim * rest.dim
    X = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    # even operator on aux ⊗ rest
    par = tensor_spaces(aux, rest).array
    X = np.where((par[:, None] + par[None, :]) % 2 == 0, X, 0)
    got = partial_supertrace(X, aux, rest)
    # str_1(Σ E_ab ⊗ X_ab) = Σ_a (-1)^{|a|} X_aa with X_aa read through the Koszul convention
    d = rest.dim
    want = sum((-1) ** aux.parities[a] * X[a * d : (a + 1) * d, a * d : (a + 1) * d] * (
        np.where((rest.array[:, None] + rest.array[None, :]) % 2 == 0, 1.0, -1.0) if aux.parities[a] else 1.0)
        for a in range(aux.dim))
    assert np.allclose(got, want)
    # total supertrace factorizes
    assert abs(np.sum(np.diag(got) * np.where(rest.array, -1, 1)) - supertrace(X, tensor_spaces(aux, rest))) < 1e-12


def test_supertranspose_reverses_products(rng):
    V = GradedSpace.standard(1, 1)
    A, B = random_homogeneous(V, 0, rng), random_homogeneous(V, 0, rng)
    assert np.allclose(supertranspose(A @ B).entries, (supertranspose(B) @ supertranspose(A)).entries)


def test_embed_matches_kron_on_leading_factor(rng):
    V = GradedSpace.standard(1, 1)
    X = random_homogeneous(V, 0, rng).entries
    assert np.allclose(embed(X, [V, V], [0]), np.kron(X, np.eye(2)))


def test_permutation_composition():
    V = GradedSpace.standard(1, 1)
    f = [V, V, V]
    P = permutation_operator(f, (1, 2, 0)).entries
    assert np.allclose(np.linalg.matrix_power(P, 3), np.eye(8))


@pytest.mark.parametrize("m,n,k", [(2, 0, 2), (1, 1, 2), (1, 1, 3), (2, 1, 2), (1, 2, 3)])
def test_projectors_idempotent_and_wedge_dimension(m, n, k):
    Pk = projectors(k, GradedSpace.standard(m, n))
    assert np.allclose(Pk.sym @ Pk.sym, Pk.sym)
    assert np.allclose(Pk.antisym @ Pk.antisym, Pk.antisym)
    assert np.allclose(Pk.sym @ Pk.antisym, 0)
    assert round(np.trace(Pk.antisym).real) == len(wedge_indices(k, m, n))


def test_wedge_tuples_gl11_k3():
    # Λ^3 C^{1|1} is spanned by v1 ∧ v2 ∧ v2 and v2 ∧ v2 ∧ v2
    assert wedge_indices(3, 1, 1) == [(0, 1, 1), (1, 1, 1)]


def test_supertrace_of_wedge_twist_gl11():
    # Berezinian (1 - q1 x)/(1 - q2 x): x^2 coefficient is q2^2 - q1 q2
    q = np.array([2.0, 3.0])
    assert asymptotic_supertrace(q, 1, GradedSpace.standard(1, 1)) == pytest.approx(q[0] - q[1])
    assert asymptotic_supertrace(q, 2, GradedSpace.standard(1, 1)) == pytest.approx(q[1] ** 2 - q[0] * q[1])
