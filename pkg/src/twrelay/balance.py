"""Max-min SINR balancing: bound, bisection over the target, LM solves."""
from dataclasses import dataclass, field
import time

import numpy as np

from .bound import upper_bound, whiten
from .errors import InvalidParameterError
from .channel import SystemConfig
from .forms import sinr_direct, sinr_quadratic, unvec
from .lm import LMConfig, finalize_precoder, realify_vector, solve_at_gamma

__all__ = ['BisectionConfig', 'SolveReport', 'BisectionStep', 'delta_scale',
           'min_rate', 'balance']

DEFAULT_BREAKPOINTS = ((0.0, 0.6), (30.0, 1.0))
DELTA_MIN, DELTA_MAX = 0.6, 1.0


@dataclass(frozen=True)
class BisectionConfig:
    """Bisection settings.

    ``eps_bisect`` is relative to the bound: the search stops once the
    target interval is narrower than ``eps_bisect * gamma_bar``.
    ``snr_breakpoints`` maps SNR in dB to the factor applied to the bound
    to get the initial upper end of the interval.
    """
    eps_bisect: float = 1e-3
    max_steps: int = 60
    snr_breakpoints: tuple = DEFAULT_BREAKPOINTS
    delta_lo: float = DELTA_MIN
    delta_hi: float = DELTA_MAX

    def __post_init__(self):
        if not self.eps_bisect > 0:
            raise InvalidParameterError(f"eps_bisect must be positive, got {self.eps_bisect}")
        if self.max_steps < 0:
            raise InvalidParameterError(f"max_steps must be non-negative, got {self.max_steps}")
        if not DELTA_MIN <= self.delta_lo <= self.delta_hi <= DELTA_MAX:
            raise InvalidParameterError(
                f"scaling range [{self.delta_lo}, {self.delta_hi}] must lie in [{DELTA_MIN}, {DELTA_MAX}]")
        points = tuple(sorted((float(s), float(d)) for s, d in self.snr_breakpoints))
        if not points:
            raise InvalidParameterError("at least one SNR breakpoint is required")
        for snr, delta in points:
            if not self.delta_lo <= delta <= self.delta_hi:
                raise InvalidParameterError(
                    f"bound scaling {delta} at {snr} dB is outside [{self.delta_lo}, {self.delta_hi}]")
        object.__setattr__(self, 'snr_breakpoints', points)


@dataclass
class BisectionStep:
    gamma: float
    achieved: float
    accepted: bool
    lm_iterations: int
    reason: str


@dataclass
class SolveReport:
    Omega: np.ndarray
    omega: np.ndarray
    sinrs: np.ndarray
    min_sinr: float
    gamma_bar: float
    min_rate: float
    ratio_to_bound: float
    iterations: int
    linesearch_per_step: float
    wall_time: float
    degraded: bool = False
    delta: float = 1.0
    steps: list = field(default_factory=list)

    def summary(self):
        """Scalar fields as a plain dict."""
        return {
            'min_sinr': self.min_sinr,
            'gamma_bar': self.gamma_bar,
            'min_rate': self.min_rate,
            'ratio_to_bound': self.ratio_to_bound,
            'iterations': self.iterations,
            'linesearch_per_step': self.linesearch_per_step,
            'bisection_steps': len(self.steps),
            'delta': self.delta,
            'wall_time': self.wall_time,
            'degraded': self.degraded,
        }


def delta_scale(snr_db, cfg=None):
    """Bound scaling factor for the given SNR (piecewise linear, clamped)."""
    cfg = cfg or BisectionConfig()
    snrs, deltas = zip(*cfg.snr_breakpoints)
    delta = float(np.interp(snr_db, snrs, deltas))
    return min(max(delta, cfg.delta_lo), cfg.delta_hi)


def min_rate(gamma):
    """Achievable rate ``0.5 log2(1 + gamma)`` in bits per channel use."""
    if gamma < 0:
        raise InvalidParameterError(f"SINR must be non-negative, got {gamma}")
    return 0.5 * np.log2(1.0 + gamma)


def balance(qp, lm_cfg=None, bi_cfg=None, channels=None):
    """Max-min balance the relay precoder of one problem instance.

    The bound eigenvector seeds the search.  Each bisection step solves
    the target equations at the interval midpoint, warm-started from the
    best iterate so far; the step moves the lower end up when the achieved
    minimum SINR is at least as large as the best seen in earlier steps,
    otherwise it moves the upper end down.  The best precoder found,
    including the bound eigenvector itself, is reported.

    Parameters
    ----------
    qp : QuadraticProblem
    lm_cfg : LMConfig, optional
    bi_cfg : BisectionConfig, optional
    channels : ChannelSet, optional
        When given, reported SINRs are evaluated directly from the
        precoder matrix instead of through the quadratic forms.
    """
    lm_cfg = lm_cfg or LMConfig()
    bi_cfg = bi_cfg or BisectionConfig()
    start = time.perf_counter()

    if channels is not None:
        noise = SystemConfig(M=qp.index_map.M, N_R=qp.N_R, sigma2=qp.sigma2,
                             sigmaR2=qp.sigmaR2, P=qp.P)

    def achieved(omega):
        if channels is None:
            return sinr_quadratic(omega, qp)
        return sinr_direct(unvec(omega), channels, noise)

    wp = whiten(qp)
    bound = upper_bound(wp)
    gamma_bar = bound.gamma_bar
    delta = delta_scale(qp.snr_db, bi_cfg)

    best_w_hat = realify_vector(bound.w0)
    best_omega = finalize_precoder(bound.w0, wp, qp.P)
    best_sinrs = achieved(best_omega)
    record = -np.inf                 # best min-SINR among bisection steps
    lo, hi = 0.0, delta * gamma_bar
    tol = bi_cfg.eps_bisect * gamma_bar
    steps = []
    iterations = 0
    ls_evals = 0
    any_progress = False

    while len(steps) < bi_cfg.max_steps and hi - lo > tol:
        gamma = 0.5 * (lo + hi)
        w, state = solve_at_gamma(qp, wp, gamma, best_w_hat, lm_cfg)
        iterations += state.k
        ls_evals += state.linesearch_evaluations
        any_progress = any_progress or state.progressed or state.reason == 'gradient'
        omega = finalize_precoder(w, wp, qp.P)
        sinrs = achieved(omega)
        s = float(sinrs.min())
        accepted = s >= record
        if accepted:
            record = s
            lo = gamma
            if s >= best_sinrs.min():
                best_w_hat, best_omega, best_sinrs = state.w_hat, omega, sinrs
        else:
            hi = gamma
        steps.append(BisectionStep(gamma, s, accepted, state.k, state.reason))

    degraded = bool(steps) and not any_progress
    s_best = float(best_sinrs.min())
    bound_rate = min_rate(gamma_bar)
    return SolveReport(
        Omega=unvec(best_omega),
        omega=best_omega,
        sinrs=best_sinrs,
        min_sinr=s_best,
        gamma_bar=gamma_bar,
        min_rate=min_rate(s_best),
        ratio_to_bound=min_rate(s_best) / bound_rate if bound_rate > 0 else 1.0,
        iterations=iterations,
        linesearch_per_step=ls_evals / iterations if iterations else 0.0,
        wall_time=time.perf_counter() - start,
        degraded=degraded,
        delta=delta,
        steps=steps,
    )
