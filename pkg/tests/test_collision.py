import json
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import expm_multiply

from interventions import collision as cv
from interventions.errors import InvalidParameterError

VAC = cv.single_mode()


# three-mode truncated Fock oracle

N = 16


def _mode_ops():
    a = sp.diags(np.sqrt(np.arange(1, N)), 1, format="csr").astype(complex)
    q = (a + a.T) / math.sqrt(2)
    p = 1j * (a.T - a) / math.sqrt(2)
    return a, q, p


def _embed(op, mode):
    eye = sp.identity(N, format="csr", dtype=complex)
    mats = [eye, eye, eye]
    mats[mode] = op
    return sp.kron(sp.kron(mats[0], mats[1]), mats[2], format="csr")


@pytest.fixture(scope="module")
def oracle():
    _, q, p = _mode_ops()
    quads = [_embed(op, m) for m in range(3) for op in (q, p)]  # q_a, p_a, q_b, p_b, Q, P
    qa, pa, qb, pb, qq, pp = quads
    gen_u = 1j * (qq @ (pb - pa))
    gen_v = -1j * (pp @ (qb - qa))
    return quads, gen_u, gen_v


def _coherent(q0, p0):
    alpha = (q0 + 1j * p0) / math.sqrt(2)
    n = np.arange(N)
    amp = np.exp(-abs(alpha) ** 2 / 2) * np.array([alpha**k / math.sqrt(math.factorial(k)) for k in n])
    return amp / np.linalg.norm(amp)


def _evolve_vec(oracle, means):
    _, gen_u, gen_v = oracle
    psi = np.kron(np.kron(_coherent(*means[0:2]), _coherent(*means[2:4])), _coherent(*means[4:6]))
    return expm_multiply(gen_v, expm_multiply(gen_u, psi))


def test_symplectic_matrix_matches_fock_finite_difference(oracle):
    quads = oracle[0]
    _, _, s_vu = cv.symplectic_of_generators()
    h = 0.05
    fd = np.zeros((6, 6))
    for j in range(6):
        outs = []
        for sign in (+1, -1):
            means = np.zeros(6)
            means[j] = sign * h
            psi = _evolve_vec(oracle, means)
            outs.append([np.real(np.vdot(psi, x @ psi)) for x in quads])
        fd[:, j] = (np.array(outs[0]) - np.array(outs[1])) / (2 * h)
    assert np.max(np.abs(fd - s_vu.matrix)) < 1e-3


def test_swap_fidelity_matches_fock_reduced_state(oracle):
    b_means = (0.3, -0.4)
    psi = _evolve_vec(oracle, [0.2, 0.5, *b_means, 0.0, 0.0]).reshape(N, N * N)
    rho_a = psi @ psi.conj().T
    target = _coherent(*b_means)
    fock_fid = float(np.real(np.vdot(target, rho_a @ target)))
    gauss = cv.collision_point(cv.single_mode(0.2, 0.5), cv.single_mode(*b_means), 0.5).swap_fidelity
    assert gauss == pytest.approx(fock_fid, abs=1e-3)


# analytic properties


def test_generators_are_symplectic_and_compose():
    s_u, s_v, s_vu = cv.symplectic_of_generators()
    for m in (s_u, s_v, s_vu):
        assert cv.symplectic_error(m.matrix) <= 1e-14
    assert np.array_equal(s_u.then(s_v).matrix, s_vu.matrix)
    assert np.array_equal(s_vu.matrix[1], [0, 0, 0, 1, 0, 1])  # p_a,f = p_b + P
    assert np.array_equal(s_vu.matrix[0], [1, 0, 0, 0, 1, 0])  # q_a,f = q_a + Q
    total = np.array([0, 1, 0, 1, 0, 0.0])
    assert np.array_equal(total @ s_vu.matrix, total)


def test_evolve_identity_and_vacuum():
    state = cv.product_state(VAC, VAC, VAC)
    same = cv.evolve(state, cv.SymplecticMap(np.eye(6)))
    assert np.array_equal(same.covariance, state.covariance)
    out = cv.collide(state)
    assert cv.symplectic_eigenvalues(out.covariance).min() >= 0.5 - 1e-10


@pytest.mark.parametrize("aux", [1e-6, 0.05, 0.5, 10.0])
def test_variance_addition_exact(aux):
    b = cv.single_mode(0.1, -1.0, 0.7, 0.9, 0.2)
    out = cv.collide(cv.collision_input(VAC, b, aux))
    assert out.variance(1) == b.variance(1) + aux


def test_mean_swap():
    a, b = cv.single_mode(0.3, 1.5), cv.single_mode(-0.2, -0.7)
    out = cv.collide(cv.collision_input(a, b, 0.1))
    assert out.mean[1] == b.mean[1] and out.mean[3] == a.mean[1]


def test_swap_fidelity_values():
    a, b = cv.single_mode(0.0, 1.0), cv.single_mode(0.0, -1.0)
    vac = cv.collision_point(a, b, 0.5)
    assert 0 < vac.swap_fidelity < 1
    squeezed = cv.collision_point(a, b, 1e-6)
    # momenta are swapped, positions are swamped by the anti-squeezed Q
    assert squeezed.momentum_swap_fidelity > 0.999
    assert squeezed.swap_fidelity < 0.01
    same = cv.collision_point(a, a, 0.5)
    assert same.swap_fidelity < 1


def test_gaussian_fidelity_basics():
    assert cv.gaussian_fidelity(VAC, VAC) == pytest.approx(1.0, abs=1e-15)
    shifted = cv.single_mode(1.0, 0.0)
    assert cv.gaussian_fidelity(VAC, shifted) == pytest.approx(math.exp(-0.5), abs=1e-12)
    thermal = cv.single_mode(var_q=1.5, var_p=1.5)
    # vacuum vs thermal(nbar = 1): 1 / (1 + nbar)
    assert cv.gaussian_fidelity(VAC, thermal) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        cv.gaussian_fidelity(cv.product_state(VAC, VAC), VAC)


def test_log_negativity_and_ppt():
    a, b = cv.single_mode(0.0, 1.0), cv.single_mode(0.0, -1.0)
    product = cv.collision_input(a, b, 0.05)
    assert cv.log_negativity(product, [2]) == 0
    assert cv.ppt_physicality(product, [2])
    out = cv.collide(product)
    assert cv.log_negativity(out, [2]) > 0
    assert not cv.ppt_physicality(out, [2])
    assert cv.ppt_physicality(out, [0, 1, 2])


def test_log_negativity_grows_with_aux_variance():
    a, b = cv.single_mode(0.0, 1.0), cv.single_mode(0.0, -1.0)
    values = [cv.collision_point(a, b, v).log_negativity_ab_c for v in (0.5, 10.0, 1000.0)]
    assert values[0] < values[1] < values[2]


def test_log_negativity_local_invariance():
    out = cv.collide(cv.collision_input(cv.single_mode(0.0, 1.0), VAC, 0.2))
    r = 0.4
    rot = np.array([[math.cos(r), math.sin(r)], [-math.sin(r), math.cos(r)]])
    sq = np.diag([1.7, 1 / 1.7])
    local = np.zeros((6, 6))
    local[0:2, 0:2] = rot
    local[2:4, 2:4] = sq
    local[4:6, 4:6] = sq @ rot
    moved = cv.evolve(out, cv.SymplecticMap(local))
    assert cv.log_negativity(moved, [2]) == pytest.approx(cv.log_negativity(out, [2]), abs=1e-9)


def test_validation():
    with pytest.raises(InvalidParameterError):
        cv.single_mode(var_q=0.1, var_p=0.1)
    with pytest.raises(InvalidParameterError):
        cv.CovarianceState(np.zeros(2), np.array([[1.0, 0.2], [0.0, 1.0]]))
    with pytest.raises(InvalidParameterError):
        cv.SymplecticMap(np.diag([2.0, 2.0]))
    with pytest.raises(InvalidParameterError):
        cv.squeezed_auxiliary(0.0)


def test_json_round_trip():
    out = cv.collide(cv.collision_input(VAC, VAC, 0.3))
    back = cv.CovarianceState.from_dict(json.loads(out.to_json()))
    assert np.array_equal(back.covariance, out.covariance)
    smap = cv.symplectic_of_generators()[2]
    assert np.array_equal(cv.SymplecticMap.from_dict(smap.to_dict()).matrix, smap.matrix)


single = st.tuples(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 5), st.floats(0.5, 5), st.floats(-0.99, 0.99)
)


@settings(max_examples=60, deadline=None)
@given(a=single, b=single, aux=st.floats(1e-4, 1e3))
def test_evolve_preserves_physicality(a, b, aux):
    qa, pa, vqa, vpa, ca = a
    qb, pb, vqb, vpb, cb = b
    # correlation scaled so that var_q var_p - cov^2 >= 1/4
    sa = cv.single_mode(qa, pa, vqa, vpa, ca * math.sqrt(vqa * vpa - 0.25))
    sb = cv.single_mode(qb, pb, vqb, vpb, cb * math.sqrt(vqb * vpb - 0.25))
    out = cv.collide(cv.collision_input(sa, sb, aux))
    assert cv.symplectic_eigenvalues(out.covariance).min() >= 0.5 - 1e-9
    assert out.mean[1] == pytest.approx(pb) and out.mean[3] == pytest.approx(pa)
