import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twrelay.channel import ChannelSet, SystemConfig, generate_channels
from twrelay.errors import StructuralError
from twrelay.forms import (UserIndexMap, build_quadratic_problem, link_matrices, noise_matrix,
                           relay_power, sinr_direct, sinr_quadratic, unvec, vec)

from conftest import crandn, make_instance


def scalar_problem(sigma2=1.0):
    cfg = SystemConfig(M=1, N_R=1, sigma2=sigma2, sigmaR2=1.0, P=1.0, rho1=0, rho2=0, rhoRS=0)
    ch = ChannelSet(np.ones((1, 1)), np.ones((1, 1)))
    return cfg, ch, build_quadratic_problem(ch, cfg)


def entrywise_q(A, B, i, j):
    """q vector built element by element from its row-times-entry definition."""
    N_R = A.shape[1]
    row = []
    for k in range(N_R):
        for l in range(N_R):
            row.append(A[i, l] * B[k, j])
    return np.conj(np.array(row))


def test_index_map_roundtrip():
    m = UserIndexMap(3)
    assert [m.to_flat(t, i) for t, i in m] == list(range(6))
    assert all(m.to_pair(m.to_flat(t, i)) == (t, i) for t, i in m)
    with pytest.raises(StructuralError):
        m.to_flat(3, 0)


def test_unvec_examples(rng):
    np.testing.assert_array_equal(unvec(np.array([1, 2, 3, 4])), [[1, 3], [2, 4]])
    np.testing.assert_array_equal(unvec(vec(np.eye(2))), np.eye(2))
    assert vec(np.eye(2)).tolist() == [1, 0, 0, 1]
    w = crandn(rng, 25)
    np.testing.assert_array_equal(vec(unvec(w)), w)
    with pytest.raises(StructuralError):
        unvec(np.ones(5))


def test_scalar_forms():
    _, _, qp = scalar_problem()
    np.testing.assert_allclose(qp.Q[:, 0, 0], [1, 1])
    np.testing.assert_allclose(qp.Pmat[:, 0, 0], [1, 1])
    np.testing.assert_allclose(qp.Z, [[3]])


def test_zero_channels():
    cfg = SystemConfig(M=2, N_R=3, sigmaR2=0.7)
    ch = ChannelSet(np.zeros((3, 2)), np.zeros((3, 2)))
    qp = build_quadratic_problem(ch, cfg)
    assert np.all(qp.Q == 0) and np.all(qp.Pmat == 0)
    np.testing.assert_allclose(qp.Z, 0.7 * np.eye(9))


def test_dimension_mismatch():
    cfg = SystemConfig(M=2, N_R=3)
    ch = ChannelSet(np.ones((4, 2)), np.ones((4, 2)))
    with pytest.raises(StructuralError):
        build_quadratic_problem(ch, cfg)


def test_signal_vectors_match_entrywise_construction():
    cfg, ch, qp = make_instance(seed=3, M=3, N_R=6)
    for t in (1, 2):
        A, B, _ = link_matrices(ch, t)
        for i in range(3):
            j = qp.index_map.to_flat(t, i)
            q = entrywise_q(A, B, i, i)
            np.testing.assert_allclose(qp.Q[j], np.outer(q, q.conj()), atol=1e-12)


def test_interference_form_matches_entrywise_construction():
    cfg, ch, qp = make_instance(seed=4, M=3, N_R=3)
    for t in (1, 2):
        A, B, C = link_matrices(ch, t)
        for i in range(3):
            P = noise_matrix(ch, cfg.sigmaR2, t, i).astype(complex)
            for k in range(3):
                if k != i:
                    x, s = entrywise_q(A, B, i, k), entrywise_q(A, C, i, k)
                    P += np.outer(x, x.conj()) + np.outer(s, s.conj())
            np.testing.assert_allclose(qp.Pmat[qp.index_map.to_flat(t, i)], P, atol=1e-12)


def test_noise_matrix_is_row_energy(rng):
    cfg, ch, qp = make_instance(seed=5, M=2, N_R=3)
    Omega = crandn(rng, 3, 3)
    for t in (1, 2):
        A = link_matrices(ch, t)[0]
        for i in range(2):
            N = noise_matrix(ch, cfg.sigmaR2, t, i)
            lhs = np.real(vec(Omega).conj() @ N @ vec(Omega))
            rhs = cfg.sigmaR2 * np.linalg.norm((A @ Omega)[i]) ** 2
            assert lhs == pytest.approx(rhs, rel=1e-12)


def test_form_spectra():
    _, _, qp = make_instance(seed=6, M=3, N_R=4)
    for j in range(qp.users):
        ev = np.linalg.eigvalsh(qp.Pmat[j])
        assert ev[0] >= -1e-12 * np.linalg.norm(qp.Pmat[j])
        evq = np.linalg.eigvalsh(qp.Q[j])
        assert np.sum(np.abs(evq) > 1e-12 * np.linalg.norm(qp.Q[j])) == 1
    assert np.linalg.eigvalsh(qp.Z)[0] > 0


def test_relay_power_examples(rng):
    ch = ChannelSet(np.zeros((4, 2)), np.zeros((4, 2)))
    assert relay_power(np.eye(4), ch, 1.0) == pytest.approx(4.0)
    assert relay_power(np.zeros((4, 4)), ch, 1.0) == 0.0
    cfg, ch, qp = make_instance(seed=9, M=3, N_R=5)
    Omega = crandn(rng, 5, 5)
    w = vec(Omega)
    assert relay_power(Omega, ch, cfg.sigmaR2) == pytest.approx(np.real(w.conj() @ qp.Z @ w), rel=1e-10)


def test_sinr_zero_precoder():
    cfg, ch, qp = make_instance()
    assert np.all(sinr_direct(np.zeros((4, 4)), ch, cfg) == 0)
    assert np.all(sinr_quadratic(np.zeros(16), qp) == 0)


def test_scalar_sinr():
    cfg, ch, qp = scalar_problem()
    omega = np.array([np.sqrt(1 / 3)])
    np.testing.assert_allclose(sinr_direct(unvec(omega), ch, cfg), [0.25, 0.25], rtol=1e-14)
    np.testing.assert_allclose(sinr_quadratic(omega, qp), [0.25, 0.25], rtol=1e-14)
    # closed form |w|^2 / (|w|^2 + 1) along a phase-rotated scalar
    w = 0.8 * np.exp(0.3j)
    np.testing.assert_allclose(sinr_quadratic(np.array([w]), qp), 0.64 / 1.64)


def test_sinr_under_scaling_matches_recomputation(rng):
    cfg, ch, qp = make_instance(seed=10, M=2, N_R=3)
    w = crandn(rng, 9)
    for c in (0.1, 2.0, 7.5):
        expected = [np.real((c * w).conj() @ qp.Q[j] @ (c * w))
                    / (np.real((c * w).conj() @ qp.Pmat[j] @ (c * w)) + cfg.sigma2)
                    for j in range(qp.users)]
        np.testing.assert_allclose(sinr_quadratic(c * w, qp), expected, rtol=1e-12)


def test_homogeneity_of_separate_terms(rng):
    _, _, qp = make_instance(seed=11, M=3, N_R=3)
    w = crandn(rng, 9)
    c = 1.7 - 0.4j
    for j in range(qp.users):
        num = lambda v: np.real(v.conj() @ qp.Q[j] @ v)
        den = lambda v: np.real(v.conj() @ qp.Pmat[j] @ v)
        assert num(c * w) == pytest.approx(abs(c) ** 2 * num(w), rel=1e-12)
        assert den(c * w) == pytest.approx(abs(c) ** 2 * den(w), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(M=st.integers(1, 3), N_R=st.integers(1, 6), seed=st.integers(0, 2**32 - 1),
       sigma2=st.floats(0.01, 10), sigmaR2=st.floats(0.01, 10))
def test_representation_equivalence(M, N_R, seed, sigma2, sigmaR2):
    cfg = SystemConfig(M=M, N_R=N_R, sigma2=sigma2, sigmaR2=sigmaR2, seed=seed)
    ch = generate_channels(cfg)
    qp = build_quadratic_problem(ch, cfg)
    Omega = crandn(np.random.default_rng(seed), N_R, N_R)
    a = sinr_direct(Omega, ch, cfg)
    b = sinr_quadratic(vec(Omega), qp)
    np.testing.assert_allclose(a, b, rtol=1e-8)
    w = vec(Omega)
    assert relay_power(Omega, ch, sigmaR2) == pytest.approx(np.real(w.conj() @ qp.Z @ w), rel=1e-10)


def test_self_interference_excluded():
    # one pair, so all cross terms vanish; the back-propagated own signal must not count
    cfg = SystemConfig(M=1, N_R=2, sigma2=1.0, sigmaR2=1.0)
    ch = ChannelSet(np.array([[1.0], [0.5j]]), np.array([[0.3], [1.0]]))
    Omega = np.array([[1.0, 0.2], [0.1j, 0.7]])
    A, B, C = link_matrices(ch, 1)
    signal = abs((A @ Omega @ B)[0, 0]) ** 2
    noise = np.linalg.norm((A @ Omega)[0]) ** 2 + 1.0
    assert sinr_direct(Omega, ch, cfg)[0] == pytest.approx(signal / noise, rel=1e-14)
