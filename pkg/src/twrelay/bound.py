"""Closed-form minimax upper bound on the balanced SINR.

After whitening the power constraint with ``Z^(-1/2)`` every user's best
possible SINR is a generalized Rayleigh quotient, so

    gamma_bar = min_j lambda_max(G_j^-1 F_j)

bounds the max-min SINR from above.  The eigenvector of the binding user
is also the natural starting point for the Levenberg-Marquardt solver.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllConditionedError, NumericalError

__all__ = ['WhitenedProblem', 'BoundResult', 'inv_sqrt_hermitian', 'whiten',
           'max_generalized_eig', 'upper_bound']

MAX_COND = 1e14
EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class WhitenedProblem:
    """Per-user forms in the whitened coordinates ``sqrt(P) w = Z^(1/2) omega``.

    ``F`` has shape (2M, n, n) with ``F_j = Z^-1/2 Q_j Z^-1/2``, ``G`` has the
    same shape with ``G_j = Z^-1/2 P_j Z^-1/2 + (sigma2 / P) I``.
    """
    F: np.ndarray
    G: np.ndarray
    Zhalf_inv: np.ndarray
    P: float

    @property
    def users(self):
        return self.F.shape[0]

    @property
    def n(self):
        return self.F.shape[1]


@dataclass(frozen=True)
class BoundResult:
    gamma_bar: float
    j_star: int
    w0: np.ndarray
    per_user_max: np.ndarray


def inv_sqrt_hermitian(Z):
    """Inverse square root of a Hermitian positive definite matrix.

    Raises
    ------
    IllConditionedError
        If the condition number of ``Z`` exceeds 1e14.
    """
    Z = 0.5 * (Z + Z.conj().T)
    evals, evecs = np.linalg.eigh(Z)
    top = evals[-1]
    if top <= 0 or evals[0] <= 0 or top / evals[0] > MAX_COND:
        raise IllConditionedError(
            f"power form is numerically singular (eigenvalues in [{evals[0]:.3e}, {top:.3e}])")
    evals = np.maximum(evals, EIG_FLOOR * top)
    return (evecs / np.sqrt(evals)) @ evecs.conj().T


def whiten(qp):
    """Transform a `QuadraticProblem` into whitened Rayleigh-quotient form."""
    W = inv_sqrt_hermitian(qp.Z)
    v = qp.q @ W.T                 # rows are W q_j
    F = v[:, :, None] * v.conj()[:, None, :]
    G = W @ qp.Pmat @ W
    G = 0.5 * (G + np.conj(np.swapaxes(G, 1, 2)))
    G = G + (qp.sigma2 / qp.P) * np.eye(qp.n)
    return WhitenedProblem(F=F, G=G, Zhalf_inv=W, P=qp.P)


def max_generalized_eig(F, G):
    """Largest eigenpair of the Hermitian-definite pencil ``(F, G)``.

    Returns ``(lam, u)`` where ``lam`` is the maximum of
    ``u^H F u / u^H G u`` and ``u`` is a unit-norm maximizer.
    """
    n = F.shape[0]
    try:
        evals, evecs = scipy.linalg.eigh(F, G, subset_by_index=[n - 1, n - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"generalized eigensolver failed for n={n}: {exc}") from exc
    u = evecs[:, 0]
    u = u / np.linalg.norm(u)
    lam = max(float(evals[0]), 0.0)
    return lam, u


def upper_bound(wp):
    """Minimax bound over all users; ties go to the lowest user index."""
    per_user = np.empty(wp.users)
    vectors = []
    for j in range(wp.users):
        per_user[j], u = max_generalized_eig(wp.F[j], wp.G[j])
        vectors.append(u)
    j_star = int(np.argmin(per_user))
    return BoundResult(gamma_bar=float(per_user[j_star]), j_star=j_star,
                       w0=vectors[j_star], per_user_max=per_user)
