import numpy as np
import pytest

from conftest import make_chain, random_levels
from superchain import gaudin
from superchain.graded import embed
from superchain.pdo import geometric_inverse
from superchain.rational import RationalFunction, simple_poles

U0, V0 = 0.35 + 0.6j, -0.8 + 0.45j


@pytest.fixture
def gl11():
    return gaudin.GaudinSystem(make_chain(1, 1, ["vector", "vector"], [0.1, 0.9]), [1.3, 0.4])


@pytest.fixture
def gl21():
    return gaudin.GaudinSystem(make_chain(2, 1, ["vector", "wedge:2"], [0.1, 0.8]), [1.7, 0.6, 1.1])


def test_distinct_points_required():
    with pytest.raises(ValueError):
        gaudin.GaudinSystem(make_chain(1, 1, ["vector", "vector"], [0.2, 0.2]))


def test_current_entries(gl11):
    # L_ab = κ_b Σ_i e_ba^{(i)} / (u - z_i)
    c = gl11.chain
    want = sum(c.kappa[1] * embed(mod.action[1, 0], c.site_spaces, [i]) / (U0 - z) for i, (mod, z) in enumerate(c.sites))
    assert np.allclose(gl11.current.entry(0, 1, U0), want)


def test_current_jet_derivatives(gl11):
    h = 1e-5
    J = gl11.current.jet(U0, 2)
    fd = (gl11.current(U0 + h) - gl11.current(U0 - h)) / (2 * h)
    assert np.allclose(J.d[1], fd, atol=1e-8)


def test_odd_one_dimensional_case_is_geometric_inverse():
    # gl(0|1): the generating operator is (∂ - f)^{-1} with f = K + L_11 = K - Σ 1/(u - z_i)
    s = gaudin.GaudinSystem(make_chain(0, 1, ["vector", "vector"], [0.1, 0.9]), [0.7])
    f = RationalFunction.constant(0.7) + simple_poles([0.1, 0.9], -1.0)
    gi = geometric_inverse(f, 3)
    for r in range(4):
        assert gaudin.gaudin_transfer(s, r, U0)[0, 0] == pytest.approx(complex(gi.coeffs[r](U0)), abs=1e-12)


def test_first_hamiltonian_gl11(gl11):
    # (∂ - f1)(∂ - f2)^{-1} = 1 - (f1 - f2) ∂^{-1} + ..., so 𝒢_1 = -str(K + L)
    c = gl11.chain
    G1 = gaudin.gaudin_transfer(gl11, 1, U0)
    st = (gl11.K[0] - gl11.K[1]) * np.eye(c.dim) + gl11.current.entry(0, 0, U0) - gl11.current.entry(1, 1, U0)
    assert np.allclose(G1, -st)


@pytest.mark.parametrize("fixture", ["gl11", "gl21"])
def test_extraction_consistency_and_commutativity(fixture, request):
    s = request.getfixturevalue(fixture)
    ext = gaudin.berezinian_extract(s, 3, U0)
    assert ext.worst < 1e-12
    assert gaudin.gaudin_commutators(s, (1, 2, 3), U0, V0) < 1e-12


def test_inverse_series_identity(gl11):
    assert max(gaudin.sym_diff_check(gl11, 2, U0)) < 1e-12


def test_gl_invariance_at_zero_K(gl21):
    for r in (1, 2):
        assert gaudin.gl_invariance_gaudin(gl21, r, U0) < 1e-12


@pytest.mark.parametrize("fixture", ["gl11", "gl21"])
def test_duality_of_difference_operators(fixture, request):
    res = gaudin.gaudin_duality_check(request.getfixturevalue(fixture), (1, 2, 3), U0)
    assert max(res.values()) < 1e-12


def test_bae_closed_form_gl11(gl11):
    # 0.9 + 1/(t - 0.1) + 1/(t - 0.9) = 0
    want = np.sort_complex(np.roots(np.polyadd(0.9 * np.poly([0.1, 0.9]), [2.0, -1.0])))
    sols = [x for x in gaudin.solve_gaudin_bae(gl11, [1]) if x.off_diagonal]
    got = np.sort_complex(np.array([x.t[0][0] for x in sols]))
    assert np.allclose(got, want, atol=1e-10)


def test_bae_zero_K_gl11():
    s = gaudin.GaudinSystem(make_chain(1, 1, ["vector", "vector"], [0.1, 0.9]))
    sols = [x for x in gaudin.solve_gaudin_bae(s, [1]) if x.off_diagonal]
    assert len(sols) == 1
    assert abs(sols[0].t[0][0] - 0.5) < 1e-10


def test_bae_residual_refuses_poles(gl11):
    with pytest.raises(ZeroDivisionError):
        gaudin.gaudin_bae_residual(gl11, [[0.1]])


def test_bae_jacobian_finite_difference(gl21):
    t = np.array([0.3 + 0.2j, -0.4 + 0.5j])
    F, J, _ = gaudin.gaudin_bae_system(gl21, (1, 1), t)
    h = 1e-6
    for j in range(2):
        dt = np.zeros(2, dtype=complex)
        dt[j] = h
        fd = (gaudin.gaudin_bae_system(gl21, (1, 1), t + dt)[0] - gaudin.gaudin_bae_system(gl21, (1, 1), t - dt)[0]) / (2 * h)
        assert np.allclose(fd, J[:, j], atol=1e-6)


@pytest.mark.parametrize("m,n,sign", [(2, 0, 1), (1, 1, -1)])
def test_single_excitation_vector(m, n, sign):
    s = gaudin.GaudinSystem(make_chain(m, n, ["vector", "vector"], [0.1, 0.9]))
    t = 0.3 + 0.2j
    want = s.current.entry(0, 1, t) @ s.chain.vacuum
    assert np.allclose(gaudin.gaudin_bv(s, [[t]]), sign * want)


@pytest.mark.slow
def test_eigencheck_gl21(gl21):
    sols = [x for x in gaudin.solve_gaudin_bae(gl21, [1, 1]) if x.off_diagonal and x.isolated]
    assert len(sols) == 3
    for x in sols:
        rep = gaudin.gaudin_eigencheck(gl21, x.t, 2, samples=2)
        assert not rep.degenerate
        assert max(rep.residuals.values()) < 1e-9


def test_eigenvalues_constant_term(gl11):
    # μ_0 is the leading coefficient 1 of the product of first-order factors
    sols = gaudin.solve_gaudin_bae(gl11, [1])
    mu = gaudin.gaudin_eigenvalues(gl11, sols[0].t, 2, U0)
    assert mu[0] == pytest.approx(1.0)


def test_singular_vector_zero_K():
    s = gaudin.GaudinSystem(make_chain(2, 1, ["vector", "wedge:2"], [0.1, 0.8]))
    sols = [x for x in gaudin.solve_gaudin_bae(s, [1, 1]) if x.off_diagonal]
    assert sols
    for x in sols:
        assert max(gaudin.gaudin_singular_check(s, x.t).values()) < 1e-9


def test_limit_slopes_two_excitations(rng):
    s = gaudin.GaudinSystem(make_chain(2, 0, ["vector", "vector"], [0.1, 0.9]), [1.3, 0.4])
    t = random_levels(rng, (2,), 2, avoid=s.chain.points)
    rep = gaudin.classical_limit_check(s, t, U0)
    assert rep.expected["asym3"] == 3
    assert rep.passed(0.1), rep.slopes


def test_limit_requires_decreasing_eps(gl11):
    with pytest.raises(ValueError):
        gaudin.classical_limit_check(gl11, [[0.3]], U0, (1e-3, 1e-2))


def test_fit_slope_exact_power():
    eps = [1e-1, 1e-2, 1e-3]
    assert gaudin.fit_slope(eps, [3 * e**2 for e in eps]) == pytest.approx(2.0)
