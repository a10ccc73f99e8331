"""Quadratic-form representation of the relay SINRs and power constraint.

With ``omega = vec(Omega)`` (column stacking) every user SINR becomes the
ratio ``omega^H Q_j omega / (omega^H P_j omega + sigma2)`` and the relay
transmit power becomes ``omega^H Z omega``.  Users are indexed globally by
``j = (t - 1) * M + i`` for group ``t in {1, 2}`` and in-group index
``i in {0, ..., M-1}``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import StructuralError

__all__ = ['UserIndexMap', 'QuadraticProblem', 'vec', 'unvec',
           'link_matrices', 'noise_matrix', 'build_quadratic_problem',
           'relay_covariance', 'relay_power', 'sinr_direct', 'sinr_quadratic']


@dataclass(frozen=True)
class UserIndexMap:
    """Bijection between ``(t, i)`` pairs and flat user indices ``j``."""
    M: int

    @property
    def size(self):
        return 2 * self.M

    def to_flat(self, t, i):
        if t not in (1, 2) or not 0 <= i < self.M:
            raise StructuralError(f"no user (t={t}, i={i}) with M={self.M}")
        return (t - 1) * self.M + i

    def to_pair(self, j):
        if not 0 <= j < 2 * self.M:
            raise StructuralError(f"user index {j} out of range for M={self.M}")
        return j // self.M + 1, j % self.M

    def __iter__(self):
        for t in (1, 2):
            for i in range(self.M):
                yield t, i


@dataclass(frozen=True)
class QuadraticProblem:
    """All optimization data of one channel realization.

    Attributes
    ----------
    q : ndarray, shape (2M, N_R**2)
        Signal vectors; ``Q_j = q_j q_j^H``.
    Pmat : ndarray, shape (2M, N_R**2, N_R**2)
        Interference-plus-relay-noise matrices ``P_j``.
    Z : ndarray, shape (N_R**2, N_R**2)
        Power form ``Y^T kron I``.
    sigma2, sigmaR2, P : float
        User noise, relay noise and relay power budget.
    index_map : UserIndexMap
    """
    q: np.ndarray
    Pmat: np.ndarray
    Z: np.ndarray
    sigma2: float
    sigmaR2: float
    P: float
    index_map: UserIndexMap

    @property
    def Q(self):
        """Dense rank-one signal matrices, shape (2M, n, n)."""
        return self.q[:, :, None] * self.q.conj()[:, None, :]

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def N_R(self):
        return int(round(np.sqrt(self.n)))

    @property
    def users(self):
        return self.q.shape[0]

    @property
    def snr_db(self):
        """Peak power to noise ratio ``10 log10(P / sigma2)``."""
        return 10.0 * np.log10(self.P / self.sigma2)


def vec(Omega):
    """Column-stacking vectorization."""
    return np.asarray(Omega).reshape(-1, order='F')


def unvec(omega):
    """Inverse of `vec` for a square matrix."""
    omega = np.asarray(omega)
    if omega.ndim != 1:
        raise StructuralError(f"expected a vector, got shape {omega.shape}")
    n = int(round(np.sqrt(omega.size)))
    if n * n != omega.size:
        raise StructuralError(f"length {omega.size} is not a perfect square")
    return omega.reshape((n, n), order='F')


def link_matrices(ch, t):
    """Return ``(A_t, B_t, C_t) = (H_t^T, H_tbar, H_t)`` for group ``t``."""
    if t == 1:
        return ch.H1.T, ch.H2, ch.H1
    if t == 2:
        return ch.H2.T, ch.H1, ch.H2
    raise StructuralError(f"group index must be 1 or 2, got {t}")


def _coupling(a, b):
    # vector x with x^H omega = a Omega b for row a and column b
    return np.kron(b, a).conj()


def noise_matrix(ch, sigmaR2, t, i):
    """Dense relay-noise form ``N^t_i``: ``N_R`` copies of ``sigmaR2 a^H a``."""
    A = link_matrices(ch, t)[0]
    a = A[i]
    block = sigmaR2 * np.outer(a.conj(), a)
    return np.kron(np.eye(ch.N_R), block)


def relay_covariance(ch, sigmaR2):
    """Covariance ``Y = H1 H1^H + H2 H2^H + sigmaR2 I`` of the relay input."""
    return ch.H1 @ ch.H1.conj().T + ch.H2 @ ch.H2.conj().T + sigmaR2 * np.eye(ch.N_R)


def build_quadratic_problem(ch, cfg):
    """Assemble signal, interference and power forms for all ``2M`` users."""
    ch.check(cfg)
    M, N_R = ch.M, ch.N_R
    n = N_R * N_R
    index_map = UserIndexMap(M)
    q = np.zeros((2 * M, n), dtype=complex)
    Pmat = np.zeros((2 * M, n, n), dtype=complex)
    for t, i in index_map:
        j = index_map.to_flat(t, i)
        A, B, C = link_matrices(ch, t)
        q[j] = _coupling(A[i], B[:, i])
        Pj = noise_matrix(ch, cfg.sigmaR2, t, i)
        for k in range(M):
            if k == i:
                continue
            x = _coupling(A[i], B[:, k])
            s = _coupling(A[i], C[:, k])
            Pj += np.outer(x, x.conj()) + np.outer(s, s.conj())
        Pmat[j] = 0.5 * (Pj + Pj.conj().T)
    Y = relay_covariance(ch, cfg.sigmaR2)
    Z = np.kron(Y.T, np.eye(N_R))
    return QuadraticProblem(q=q, Pmat=Pmat, Z=Z, sigma2=cfg.sigma2,
                            sigmaR2=cfg.sigmaR2, P=cfg.P, index_map=index_map)


def relay_power(Omega, ch, sigmaR2):
    """Relay transmit power ``Tr(Omega Y Omega^H)``."""
    Omega = np.asarray(Omega)
    if Omega.shape != (ch.N_R, ch.N_R):
        raise StructuralError(f"precoder shape {Omega.shape} does not match N_R={ch.N_R}")
    Y = relay_covariance(ch, sigmaR2)
    return float(np.real(np.trace(Omega @ Y @ Omega.conj().T)))


def sinr_direct(Omega, ch, cfg):
    """Per-user SINRs evaluated from the precoder matrix.

    The back-propagated self-interference term is assumed cancelled and
    so does not appear in the denominator.
    """
    Omega = np.asarray(Omega)
    if Omega.shape != (ch.N_R, ch.N_R):
        raise StructuralError(f"precoder shape {Omega.shape} does not match N_R={ch.N_R}")
    M = ch.M
    out = np.empty(2 * M)
    for t in (1, 2):
        A, B, C = link_matrices(ch, t)
        AO = A @ Omega
        T_ab = np.abs(AO @ B) ** 2
        T_ac = np.abs(AO @ C) ** 2
        relay_noise = cfg.sigmaR2 * np.sum(np.abs(AO) ** 2, axis=1)
        for i in range(M):
            signal = T_ab[i, i]
            interference = T_ab[i].sum() - T_ab[i, i] + T_ac[i].sum() - T_ac[i, i]
            out[(t - 1) * M + i] = signal / (interference + relay_noise[i] + cfg.sigma2)
    return out


def sinr_quadratic(omega, qp):
    """Per-user SINRs ``omega^H Q_j omega / (omega^H P_j omega + sigma2)``."""
    omega = np.asarray(omega)
    if omega.shape != (qp.n,):
        raise StructuralError(f"omega has shape {omega.shape}, expected ({qp.n},)")
    num = np.abs(qp.q.conj() @ omega) ** 2
    den = np.real(np.einsum('i,jik,k->j', omega.conj(), qp.Pmat, omega))
    return num / (den + qp.sigma2)
