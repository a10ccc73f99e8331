"""Correlated Rayleigh channel generation for the two-way relay setup.

Both user groups have ``M`` single-antenna users, the relay has ``N_R``
antennas.  The uplink channels are drawn as iid circularly-symmetric
complex Gaussians and then coloured with exponential correlation
matrices at the relay and at the users.

Random numbers come from numpy's PCG64 bit generator seeded with the
64-bit ``seed`` of the configuration, so a config fully determines its
channel realization.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameterError, NotPSDError, StructuralError

__all__ = ['SystemConfig', 'ChannelSet', 'correlation_matrix', 'psd_sqrt',
           'iid_channels', 'generate_channels']

# relative eigenvalue floor used when taking PSD square roots
TOL_EIG = 1e-12


@dataclass(frozen=True)
class SystemConfig:
    """Static parameters of one relay scenario.

    Parameters
    ----------
    M : int
        Number of user pairs.
    N_R : int
        Number of relay antennas.
    sigma2 : float
        Noise variance at the users (downlink).
    sigmaR2 : float
        Noise variance at the relay.
    P : float
        Relay power budget.
    rho1, rho2, rhoRS : float
        Exponential correlation coefficients of group 1, group 2 and the
        relay array, each in ``[0, 1)``.
    seed : int
        Seed of the channel draw.
    """
    M: int = 3
    N_R: int = 6
    sigma2: float = 1.0
    sigmaR2: float = 1.0
    P: float = 10.0
    rho1: float = 0.1
    rho2: float = 0.1
    rhoRS: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidParameterError(f"M must be a positive integer, got {self.M}")
        if int(self.N_R) != self.N_R or self.N_R < 1:
            raise InvalidParameterError(f"N_R must be a positive integer, got {self.N_R}")
        for name in ('sigma2', 'sigmaR2', 'P'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidParameterError(f"{name} must be positive, got {value}")
        for name in ('rho1', 'rho2', 'rhoRS'):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise InvalidParameterError(f"{name} must lie in [0, 1), got {value}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def with_(self, **changes):
        """Return a copy with some fields replaced."""
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelSet:
    """Uplink channels ``H1`` and ``H2`` (each ``N_R x M``)."""
    H1: np.ndarray
    H2: np.ndarray

    def __post_init__(self):
        H1 = np.asarray(self.H1, dtype=complex)
        H2 = np.asarray(self.H2, dtype=complex)
        if H1.ndim != 2 or H1.shape != H2.shape:
            raise StructuralError(f"H1 {H1.shape} and H2 {H2.shape} must be equal-sized matrices")
        if not (np.all(np.isfinite(H1)) and np.all(np.isfinite(H2))):
            raise StructuralError("channel entries must be finite")
        object.__setattr__(self, 'H1', H1)
        object.__setattr__(self, 'H2', H2)

    @property
    def N_R(self):
        return self.H1.shape[0]

    @property
    def M(self):
        return self.H1.shape[1]

    def check(self, cfg):
        """Raise StructuralError unless the shapes agree with ``cfg``."""
        if self.H1.shape != (cfg.N_R, cfg.M):
            raise StructuralError(
                f"channels are {self.H1.shape}, config expects ({cfg.N_R}, {cfg.M})")


def correlation_matrix(rho, n):
    """Exponential correlation matrix with entries ``rho**|i-j|``."""
    if not 0 <= rho < 1:
        raise InvalidParameterError(f"rho must lie in [0, 1), got {rho}")
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"dimension must be a positive integer, got {n}")
    idx = np.arange(n)
    return np.power(float(rho), np.abs(idx[:, None] - idx[None, :]))


def psd_sqrt(A):
    """Symmetric square root of a positive semidefinite matrix.

    Eigenvalues down to ``-1e-12 * lambda_max`` are treated as round-off
    and clamped to zero; anything more negative raises `NotPSDError`.
    Works for real symmetric and complex Hermitian input.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {A.shape}")
    A = 0.5 * (A + A.conj().T)
    evals, evecs = np.linalg.eigh(A)
    tol = TOL_EIG * max(evals[-1], 0.0)
    if evals[0] < -tol:
        raise NotPSDError(f"smallest eigenvalue {evals[0]:.3e} is below -{tol:.3e}")
    roots = np.sqrt(np.clip(evals, 0.0, None))
    return (evecs * roots) @ evecs.conj().T


def _complex_gaussian(rng, shape):
    # unit variance: real and imaginary parts each carry 1/2
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def iid_channels(cfg):
    """Uncorrelated, unscaled CN(0, 1) draws ``(Hw1, Hw2)`` for ``cfg.seed``."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    Hw1 = _complex_gaussian(rng, (cfg.N_R, cfg.M))
    Hw2 = _complex_gaussian(rng, (cfg.N_R, cfg.M))
    return Hw1, Hw2


def generate_channels(cfg):
    """Draw one correlated Rayleigh channel realization.

    Each group channel is ``Theta_RS^(1/2) Hw Theta_t^(1/2) sqrt(P/M)``
    with ``Hw`` iid CN(0, 1).  ``Hw`` for group 1 is drawn before group 2
    from a single PCG64 stream.
    """
    Hw1, Hw2 = iid_channels(cfg)
    scale = np.sqrt(cfg.P / cfg.M)
    R_rs = psd_sqrt(correlation_matrix(cfg.rhoRS, cfg.N_R))
    R_1 = psd_sqrt(correlation_matrix(cfg.rho1, cfg.M))
    R_2 = psd_sqrt(correlation_matrix(cfg.rho2, cfg.M))
    H1 = R_rs @ Hw1 @ R_1 * scale
    H2 = R_rs @ Hw2 @ R_2 * scale
    return ChannelSet(H1, H2)
