"""Randomized self-checks of the numerical building blocks.

Each ``check_*`` function draws its own instances from a seeded generator
and returns a `CheckResult`; nothing is asserted here so the same code
backs both the test suite and the ``check`` CLI command.
"""
from dataclasses import dataclass
import time

import numpy as np

from .balance import BisectionConfig, balance
from .bound import upper_bound, whiten
from .channel import ChannelSet, SystemConfig, generate_channels
from .forms import build_quadratic_problem, relay_power, sinr_direct, sinr_quadratic, vec
from .lm import (LMConfig, RealifiedSystem, build_system, jacobian, levenberg_marquardt,
                 lipschitz_K, realify_vector, residual)

__all__ = ['CheckResult', 'random_instance', 'random_feasible_precoders',
           'check_representation', 'check_dominance', 'check_jacobian',
           'check_lipschitz', 'rooted_system', 'check_local_convergence',
           'check_power', 'check_scalar_case', 'run_all']


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0

    def line(self):
        status = 'PASS' if self.passed else 'FAIL'
        return f"[{status}] {self.name}: {self.detail} ({self.elapsed:.2f} s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.elapsed = time.perf_counter() - start
        return result
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def random_instance(rng, max_NR=6, max_M=3):
    """Random scenario with ``N_R <= max_NR`` and ``M <= max_M``."""
    cfg = SystemConfig(
        M=int(rng.integers(1, max_M + 1)),
        N_R=int(rng.integers(1, max_NR + 1)),
        sigma2=float(10 ** rng.uniform(-2, 1)),
        sigmaR2=float(10 ** rng.uniform(-2, 1)),
        P=float(10 ** rng.uniform(-1, 2)),
        rho1=float(rng.uniform(0, 0.9)),
        rho2=float(rng.uniform(0, 0.9)),
        rhoRS=float(rng.uniform(0, 0.9)),
        seed=int(rng.integers(0, 2**63)),
    )
    ch = generate_channels(cfg)
    return cfg, ch, build_quadratic_problem(ch, cfg)


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_feasible_precoders(qp, count, rng):
    """``count`` random vectors with relay power uniform in ``(0, P]``."""
    W = _crandn(rng, count, qp.n)
    power = np.real(np.einsum('si,ij,sj->s', W.conj(), qp.Z, W))
    target = qp.P * rng.uniform(0, 1, count) ** 0.1
    return W * np.sqrt(target / power)[:, None]


def _batch_sinr(W, qp):
    num = np.abs(W @ qp.q.conj().T) ** 2
    den = np.real(np.einsum('si,jik,sk->sj', W.conj(), qp.Pmat, W))
    return num / (den + qp.sigma2)


@_timed
def check_representation(instances=200, seed=1):
    """Direct SINRs equal quadratic-form SINRs; trace equals the Z form."""
    rng = np.random.default_rng(seed)
    worst_sinr = worst_power = 0.0
    for _ in range(instances):
        cfg, ch, qp = random_instance(rng)
        Omega = _crandn(rng, cfg.N_R, cfg.N_R)
        a = sinr_direct(Omega, ch, cfg)
        b = sinr_quadratic(vec(Omega), qp)
        worst_sinr = max(worst_sinr, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))
        omega = vec(Omega)
        p_trace = relay_power(Omega, ch, cfg.sigmaR2)
        p_form = float(np.real(omega.conj() @ qp.Z @ omega))
        worst_power = max(worst_power, abs(p_trace - p_form) / p_form)
    ok = worst_sinr <= 1e-8 and worst_power <= 1e-10
    return CheckResult('representation equivalence', ok,
                       f"{instances} instances, max rel SINR err {worst_sinr:.2e} (tol 1e-8), "
                       f"max rel power err {worst_power:.2e} (tol 1e-10)")


@_timed
def check_dominance(instances=50, samples=10_000, seed=2):
    """No feasible precoder beats the minimax bound."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = -np.inf
    for _ in range(instances):
        _, _, qp = random_instance(rng)
        wp = whiten(qp)
        bound = upper_bound(wp)
        W = random_feasible_precoders(qp, samples, rng)
        smin = _batch_sinr(W, qp).min(axis=1)
        limit = bound.gamma_bar * (1 + 1e-9)
        violations += int(np.sum(smin > limit))
        if bound.gamma_bar > 0:
            worst = max(worst, float(smin.max() / bound.gamma_bar))
    return CheckResult('bound dominance', violations == 0,
                       f"{instances} x {samples} feasible precoders, {violations} violations, "
                       f"best sampled min-SINR / bound = {worst:.4f}")


def _random_system(rng):
    _, _, qp = random_instance(rng, max_NR=4)
    wp = whiten(qp)
    gamma_bar = upper_bound(wp).gamma_bar
    return build_system(wp, rng.uniform(0, 1.2) * gamma_bar)


@_timed
def check_jacobian(instances=20, h=1e-6, seed=3):
    """Analytic Jacobian against central finite differences of the residual."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        sys = _random_system(rng)
        w = rng.standard_normal(sys.dim)
        w /= np.linalg.norm(w)
        J = jacobian(w, sys)
        fd = np.empty_like(J)
        for k in range(sys.dim):
            e = np.zeros(sys.dim)
            e[k] = h
            fd[:, k] = (residual(w + e, sys) - residual(w - e, sys)) / (2 * h)
        scale = max(np.max(np.abs(J)), 1e-300)
        worst = max(worst, float(np.max(np.abs(J - fd)) / scale))
    return CheckResult('jacobian vs finite differences', worst <= 1e-5,
                       f"{instances} instances, max rel err {worst:.2e} (tol 1e-5)")


@_timed
def check_lipschitz(instances=10, pairs=1000, seed=4):
    """Sampled Lipschitz inequality for the Jacobian with constant K."""
    rng = np.random.default_rng(seed)
    violations = 0
    tightest = 0.0
    for _ in range(instances):
        sys = _random_system(rng)
        K = lipschitz_K(sys)
        for _ in range(pairs):
            w1 = rng.standard_normal(sys.dim) * rng.uniform(0.1, 3)
            w2 = rng.standard_normal(sys.dim) * rng.uniform(0.1, 3)
            lhs = np.linalg.norm(jacobian(w1, sys) - jacobian(w2, sys))
            rhs = K * np.linalg.norm(w1 - w2)
            if lhs > rhs * (1 + 1e-12):
                violations += 1
            if rhs > 0:
                tightest = max(tightest, lhs / rhs)
    return CheckResult('lipschitz bound', violations == 0,
                       f"{instances} x {pairs} pairs, {violations} violations, "
                       f"max ratio {tightest:.3f}")


def rooted_system(rng, n=4, users=4, gamma=None):
    """Random whitened system with a known unit root.

    Draws PD ``G_j`` and a unit ``w*``, then scales rank-one ``F_j`` so
    that every user meets the target exactly at ``w*``.
    Returns ``(system, w_star_hat)``.
    """
    gamma = rng.uniform(0.5, 2.0) if gamma is None else gamma
    w_star = _crandn(rng, n)
    w_star /= np.linalg.norm(w_star)
    D = np.empty((users, n, n), dtype=complex)
    for j in range(users):
        X = _crandn(rng, n, n)
        G = X @ X.conj().T / n + 0.1 * np.eye(n)
        q = _crandn(rng, n)
        target = gamma * np.real(w_star.conj() @ G @ w_star)
        q *= np.sqrt(target) / abs(q.conj() @ w_star)
        D[j] = np.outer(q, q.conj()) - gamma * G
    return RealifiedSystem.from_complex(D, gamma), realify_vector(w_star)


@_timed
def check_local_convergence(instances=10, radius=1e-3, max_iterations=8, target=1e-10, seed=5):
    """LM started next to a known root converges within a few iterations."""
    rng = np.random.default_rng(seed)
    cfg = LMConfig(eps_lm=1e-14, N_max=50)
    worst_k = 0
    failures = 0
    for _ in range(instances):
        sys, w_star = rooted_system(rng, n=int(rng.integers(3, 10)), users=int(rng.choice([2, 4, 6])))
        e = rng.standard_normal(w_star.size)
        start = w_star + radius * rng.uniform(0.2, 1.0) * e / np.linalg.norm(e)
        start /= np.linalg.norm(start)
        state = levenberg_marquardt(sys, start, cfg)
        norms = [np.linalg.norm(residual(start, sys))] + [rec.res_norm for rec in state.history]
        hit = next((k for k, v in enumerate(norms) if v <= target), None)
        if hit is None or hit > max_iterations:
            failures += 1
            worst_k = np.inf
        else:
            worst_k = max(worst_k, hit)
    return CheckResult('local fast convergence', failures == 0,
                       f"{instances} rooted instances, worst iterations to ||f|| <= {target:g}: "
                       f"{worst_k} (limit {max_iterations})")


@_timed
def check_power(instances=20, seed=6):
    """Reported precoders use exactly the relay power budget."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        cfg, ch, qp = random_instance(rng)
        report = balance(qp, bi_cfg=BisectionConfig(eps_bisect=1e-2), channels=ch)
        omega = report.omega
        p_form = float(np.real(omega.conj() @ qp.Z @ omega))
        p_trace = relay_power(report.Omega, ch, cfg.sigmaR2)
        worst = max(worst, abs(p_form - cfg.P) / cfg.P, abs(p_trace - cfg.P) / cfg.P)
    return CheckResult('power tightness', worst <= 1e-9,
                       f"{instances} balanced instances, max rel power err {worst:.2e} (tol 1e-9)")


def scalar_case():
    """M = 1, N_R = 1, unit channels and noise, P = 1."""
    cfg = SystemConfig(M=1, N_R=1, sigma2=1.0, sigmaR2=1.0, P=1.0, rho1=0, rho2=0, rhoRS=0)
    ch = ChannelSet(np.ones((1, 1)), np.ones((1, 1)))
    return cfg, ch, build_quadratic_problem(ch, cfg)


@_timed
def check_scalar_case():
    """The single-antenna single-pair case has bound and optimum 1/4."""
    _, ch, qp = scalar_case()
    gamma_bar = upper_bound(whiten(qp)).gamma_bar
    report = balance(qp, channels=ch)
    err_bound = abs(gamma_bar - 0.25) / 0.25
    err_sinr = abs(report.min_sinr - 0.25)
    ok = err_bound <= 1e-12 and err_sinr <= 1e-6
    return CheckResult('scalar closed form', ok,
                       f"bound {gamma_bar:.15g} (rel err {err_bound:.1e}), "
                       f"balanced min-SINR {report.min_sinr:.12g}")


def run_all(scale=1.0):
    """Run every check; ``scale`` shrinks the instance counts for quick runs."""
    def n(count):
        return max(1, int(round(count * scale)))
    return [
        check_representation(n(200)),
        check_dominance(n(50), n(10_000)),
        check_scalar_case(),
        check_jacobian(n(20)),
        check_lipschitz(n(10), n(1000)),
        check_local_convergence(n(10)),
        check_power(n(20)),
    ]
