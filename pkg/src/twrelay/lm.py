"""Modified Levenberg-Marquardt solver for the SINR target equations.

For a fixed target ``gamma`` we look for a unit vector ``w`` with

    w^H (F_j - gamma G_j) w = 0    for every user j,

i.e. every user sits exactly at SINR ``gamma`` when the relay spends its
full power.  The system is solved in real arithmetic through the
isomorphism ``y -> [Re y; Im y]``.

The residual is homogeneous of degree two, so the origin is a spurious
least-squares solution.  Every accepted iterate is therefore projected
back to the unit sphere, and both the full-step test and the Armijo rule
are evaluated at the projected trial point.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NumericalError, StructuralError

__all__ = ['realify_vector', 'complexify_vector', 'realify_matrix',
           'RealifiedSystem', 'build_system', 'residual', 'jacobian',
           'lipschitz_K', 'lm_step', 'ArmijoParams', 'LMConfig', 'StepRecord',
           'LMState', 'backtrack', 'armijo_search', 'levenberg_marquardt',
           'solve_at_gamma', 'finalize_precoder']

MU_FLOOR = 1e-14


def realify_vector(y):
    """``[Re(y); Im(y)]``."""
    y = np.asarray(y)
    return np.concatenate([y.real, y.imag]).astype(float)


def complexify_vector(x):
    """Inverse of `realify_vector`."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size % 2:
        raise StructuralError(f"expected a vector of even length, got shape {x.shape}")
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def realify_matrix(Y):
    """Real ``2n x 2n`` representation ``[[Re, -Im], [Im, Re]]``.

    Also accepts a stack of matrices with shape ``(k, n, n)``.
    """
    Y = np.asarray(Y)
    if Y.shape[-1] != Y.shape[-2]:
        raise StructuralError(f"expected square matrices, got shape {Y.shape}")
    re, im = Y.real, Y.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2).astype(float)


@dataclass(frozen=True)
class RealifiedSystem:
    """Real residual system at one SINR target.

    ``Dhat`` has shape (2M, 2n, 2n); ``Bsym[j] = Dhat[j] + Dhat[j].T``.
    """
    gamma: float
    Dhat: np.ndarray
    Bsym: np.ndarray

    @classmethod
    def from_complex(cls, D, gamma=0.0):
        """Build from a stack of complex (normally Hermitian) matrices."""
        Dhat = realify_matrix(np.asarray(D, dtype=complex))
        if Dhat.ndim == 2:
            Dhat = Dhat[None]
        Bsym = Dhat + np.swapaxes(Dhat, 1, 2)
        return cls(gamma=float(gamma), Dhat=Dhat, Bsym=Bsym)

    @property
    def dim(self):
        return self.Dhat.shape[1]


def build_system(wp, gamma):
    """Residual system ``D_j(gamma) = F_j - gamma G_j`` of a whitened problem."""
    return RealifiedSystem.from_complex(wp.F - gamma * wp.G, gamma)


def residual(w_hat, sys):
    """Residuals ``f_j = w^T Dhat_j w``."""
    return (sys.Dhat @ w_hat) @ w_hat


def jacobian(w_hat, sys):
    """Jacobian with rows ``(B_j w)^T``."""
    return sys.Bsym @ w_hat


def lipschitz_K(sys):
    """Lipschitz constant of the Jacobian, ``sqrt(sum_j ||B_j||_F^2)``."""
    return float(np.sqrt(np.sum(sys.Bsym ** 2)))


def _damped_step(J, f, mu):
    A = J.T @ J
    A[np.diag_indices_from(A)] += mu
    rhs = J.T @ f
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
        return -scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    # mu below round-off relative to J^T J: fall back to a least-squares solve
    try:
        return -np.linalg.lstsq(A, rhs, rcond=None)[0]
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"damped normal equations could not be solved (mu={mu:.3e})") from exc


def lm_step(w_hat, sys, mu):
    """LM direction ``-(J^T J + mu I)^-1 J^T f`` at ``w_hat``."""
    if not mu > 0:
        raise InvalidParameterError(f"damping must be positive, got {mu}")
    return _damped_step(jacobian(w_hat, sys), residual(w_hat, sys), mu)


@dataclass(frozen=True)
class ArmijoParams:
    alpha0: float = 0.25
    beta: float = 0.5
    c1: float = 1e-4
    max_backtracks: int = 30

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise InvalidParameterError(f"alpha0 must be positive, got {self.alpha0}")
        if not 0 < self.beta < 1:
            raise InvalidParameterError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0 < self.c1 < 1:
            raise InvalidParameterError(f"c1 must lie in (0, 1), got {self.c1}")
        if self.max_backtracks < 0:
            raise InvalidParameterError("max_backtracks must be non-negative")


@dataclass(frozen=True)
class LMConfig:
    """Solver settings.

    Parameters
    ----------
    nu : float
        A full LM step is taken when it shrinks ``||f||`` by at least this
        factor.
    eps_lm : float
        Stop once the gradient of ``0.5 ||f||^2`` is smaller than this.
    N_max : int
        Iteration cap.
    armijo : ArmijoParams
    """
    nu: float = 0.9
    eps_lm: float = 1e-7
    N_max: int = 50
    armijo: ArmijoParams = field(default_factory=ArmijoParams)

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise InvalidParameterError(f"nu must lie in (0, 1), got {self.nu}")
        if not self.eps_lm > 0:
            raise InvalidParameterError(f"eps_lm must be positive, got {self.eps_lm}")
        if self.N_max < 0:
            raise InvalidParameterError(f"N_max must be non-negative, got {self.N_max}")


@dataclass
class StepRecord:
    res_norm: float          # after the step
    kind: str                # 'full' or 'line-search'
    backtracks: int
    evaluations: int         # Armijo trial points, 0 for a full step
    alpha: float = 1.0


@dataclass
class LMState:
    w_hat: np.ndarray
    k: int
    residual: np.ndarray
    res_norm: float
    mu: float
    history: list = field(default_factory=list)
    stalled: bool = False
    reason: str = ''

    @property
    def linesearch_evaluations(self):
        return sum(rec.evaluations for rec in self.history)

    @property
    def progressed(self):
        return self.k > 0


def backtrack(phi, phi0, slope, alpha0=0.25, beta=0.5, c1=1e-4, max_backtracks=30):
    """Armijo backtracking on a scalar merit along a fixed direction.

    Tries ``alpha0 * beta**m`` for ``m = 0 .. max_backtracks`` and returns
    ``(alpha, m)`` for the first step satisfying
    ``phi(alpha) <= phi0 + c1 * alpha * slope``, or
    ``(0.0, max_backtracks)`` if none does.
    """
    alpha = alpha0
    for m in range(max_backtracks + 1):
        if phi(alpha) <= phi0 + c1 * alpha * slope:
            return alpha, m
        alpha *= beta
    return 0.0, max_backtracks


def _normalize(x):
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise NumericalError("iterate collapsed to the origin")
    return x / nrm


def _sphere_merit(sys, x):
    nrm2 = x @ x
    if nrm2 == 0:
        return np.inf
    f = residual(x, sys)
    return 0.5 * (f @ f) / nrm2 ** 2


def _sphere_gradient(w_hat, J, f):
    g = J.T @ f
    return g - (w_hat @ g) * w_hat


def armijo_search(w_hat, delta, sys, armijo_params=None):
    """Armijo step along ``delta`` for the merit ``0.5 ||f||^2``.

    The merit is evaluated at the trial point rescaled to unit norm, which
    is where the solver actually moves; ``w_hat`` must have unit norm.
    Returns ``(alpha, backtracks)`` with ``alpha = 0`` on failure.
    """
    p = armijo_params or ArmijoParams()
    if not np.any(delta):
        return p.alpha0, 0
    f = residual(w_hat, sys)
    slope = _sphere_gradient(w_hat, jacobian(w_hat, sys), f) @ delta
    return backtrack(lambda a: _sphere_merit(sys, w_hat + a * delta), _sphere_merit(sys, w_hat),
                     slope, p.alpha0, p.beta, p.c1, p.max_backtracks)


def levenberg_marquardt(sys, w_hat0, cfg=None):
    """Run the modified LM iteration from ``w_hat0`` on the unit sphere.

    Terminates when the gradient of ``0.5 ||f||^2`` (either the plain
    ``J^T f`` or its component tangent to the sphere) drops below
    ``eps_lm``, after ``N_max`` iterations, or when the line search stalls.
    """
    cfg = cfg or LMConfig()
    ap = cfg.armijo
    w = _normalize(np.asarray(w_hat0, dtype=float))
    if w.shape != (sys.dim,):
        raise StructuralError(f"start vector has shape {w.shape}, expected ({sys.dim},)")
    f = residual(w, sys)
    fn = float(np.linalg.norm(f))
    state = LMState(w_hat=w, k=0, residual=f, res_norm=fn, mu=max(fn, MU_FLOOR))

    while True:
        J = jacobian(w, sys)
        g = J.T @ f
        if np.linalg.norm(g) < cfg.eps_lm or np.linalg.norm(g - (w @ g) * w) < cfg.eps_lm:
            state.reason = 'gradient'
            break
        if state.k >= cfg.N_max:
            state.reason = 'max-iterations'
            break
        mu = max(fn, MU_FLOOR)
        state.mu = mu
        delta = _damped_step(J, f, mu)

        trial = w + delta
        f_trial = residual(trial, sys) / (trial @ trial)
        fn_trial = float(np.linalg.norm(f_trial))
        if fn_trial <= cfg.nu * fn:
            record = StepRecord(fn_trial, 'full', 0, 0, 1.0)
        else:
            slope = _sphere_gradient(w, J, f) @ delta
            alpha, m = backtrack(lambda a: _sphere_merit(sys, w + a * delta),
                                 _sphere_merit(sys, w), slope, ap.alpha0, ap.beta, ap.c1, ap.max_backtracks)
            if alpha == 0.0:
                state.stalled = True
                state.reason = 'stall'
                break
            trial = w + alpha * delta
            f_trial = residual(trial, sys) / (trial @ trial)
            fn_trial = float(np.linalg.norm(f_trial))
            record = StepRecord(fn_trial, 'line-search', m, m + 1, alpha)

        w = _normalize(trial)
        f = residual(w, sys)
        fn = float(np.linalg.norm(f))
        record.res_norm = fn
        state.history.append(record)
        state.k += 1
        state.w_hat, state.residual, state.res_norm = w, f, fn
    return state


def solve_at_gamma(qp, wp, gamma, w_hat0, cfg=None):
    """Solve the target equations at ``gamma``.

    Returns the complex unit vector in whitened coordinates and the final
    `LMState`.
    """
    if wp.n != qp.n:
        raise StructuralError(f"whitened dimension {wp.n} does not match problem dimension {qp.n}")
    state = levenberg_marquardt(build_system(wp, gamma), w_hat0, cfg)
    return complexify_vector(state.w_hat), state


def finalize_precoder(w, wp, P):
    """Map a whitened unit vector back to a precoder ``sqrt(P) Z^-1/2 w``."""
    w = np.asarray(w, dtype=complex)
    w = w / np.linalg.norm(w)
    return np.sqrt(P) * (wp.Zhalf_inv @ w)
