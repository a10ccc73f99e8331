"""Exit criteria of the build, one test per criterion.

Each test records a one-line PASS/FAIL verdict that is printed in the
pytest terminal summary (see conftest.py).
"""
import math
import time

import numpy as np
import pytest

from twrelay.balance import BisectionConfig, balance
from twrelay.bench import ExperimentSpec, noise_levels, run_experiment
from twrelay.channel import generate_channels
from twrelay.checks import (check_dominance, check_jacobian, check_lipschitz,
                            check_local_convergence, check_power, check_representation,
                            check_scalar_case)
from twrelay.forms import build_quadratic_problem, relay_power

VERDICTS = []


def verdict(number, name, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    VERDICTS.append(line)
    print(line)
    return passed


def test_1_representation_equivalence():
    result = check_representation(instances=200)
    ok = result.passed and result.elapsed < 10
    assert verdict(1, 'representation equivalence', ok, f"{result.detail}, {result.elapsed:.2f} s (< 10 s)")


def test_2_bound_dominance():
    result = check_dominance(instances=50, samples=10_000)
    ok = result.passed and result.elapsed < 60
    assert verdict(2, 'bound dominance', ok, f"{result.detail}, {result.elapsed:.2f} s (< 60 s)")


def test_3_scalar_closed_form():
    result = check_scalar_case()
    assert verdict(3, 'scalar closed form', result.passed, result.detail)


def test_4_jacobian():
    result = check_jacobian(instances=20, h=1e-6)
    assert verdict(4, 'jacobian correctness', result.passed, result.detail)


def test_5_lipschitz():
    result = check_lipschitz(instances=10, pairs=1000)
    assert verdict(5, 'lipschitz diagnostic', result.passed, result.detail)


def test_6_local_convergence():
    result = check_local_convergence(instances=10, radius=1e-3, max_iterations=8, target=1e-10)
    assert verdict(6, 'local fast convergence', result.passed, result.detail)


@pytest.mark.slow
def test_7_desk_scale_experiment():
    spec = ExperimentSpec(trials=100, snr_list_db=(0.0, 10.0, 20.0, 30.0), snr_mac_db=10.0,
                          record_timing=False)
    sysc, lm = spec.system, spec.lm
    assert (2 * sysc.M, sysc.N_R, sysc.P, sysc.rhoRS, sysc.rho1, sysc.rho2) == (6, 6, 10.0, 0.5, 0.1, 0.1)
    assert (lm.nu, lm.eps_lm, lm.N_max, lm.armijo.alpha0) == (0.9, 1e-7, 50, 0.25)

    start = time.perf_counter()
    records, summary = run_experiment(spec)
    elapsed = time.perf_counter() - start

    max_steps = math.ceil(math.log2(1.0 / spec.bisect.eps_bisect))
    iteration_cap = lm.N_max * max_steps
    parts, ok = [], elapsed < 15 * 60
    for row in summary:
        ok &= row.median_rate_ratio_percent >= 50.0
        ok &= row.mean_lm_iterations <= iteration_cap
        ok &= row.mean_bisection_steps <= max_steps
        parts.append(f"{row.snr_db:g} dB: median {row.median_rate_ratio_percent:.2f}%, "
                     f"mean iterations {row.mean_lm_iterations:.1f}")
    ok &= len(records) == 400
    ok &= all(r.min_sinr <= r.gamma_bar * (1 + 1e-9) for r in records)
    detail = "; ".join(parts) + f" (floor 50%, iteration cap {iteration_cap}); {elapsed:.1f} s (< 900 s)"
    assert verdict(7, 'desk-scale experiment shape', ok, detail)


def test_8_power_tightness():
    random_part = check_power(instances=20)
    spec = ExperimentSpec()
    worst = 0.0
    for snr in spec.snr_list_db:
        sigma2, sigmaR2 = noise_levels(spec.system.P, snr, spec.snr_mac_db)
        for trial in range(5):
            cfg = spec.system.with_(sigma2=sigma2, sigmaR2=sigmaR2, seed=trial)
            ch = generate_channels(cfg)
            qp = build_quadratic_problem(ch, cfg)
            report = balance(qp, spec.lm, spec.bisect, channels=ch)
            w = report.omega
            z_form = float(np.real(w.conj() @ qp.Z @ w))
            trace = relay_power(report.Omega, ch, cfg.sigmaR2)
            worst = max(worst, abs(z_form - cfg.P) / cfg.P, abs(trace - cfg.P) / cfg.P)
    ok = random_part.passed and worst <= 1e-9
    assert verdict(8, 'power tightness', ok,
                   f"{random_part.detail}; default setup 20 reports, max rel err {worst:.2e}")


def test_9_determinism(tmp_path):
    kw = dict(trials=4, snr_list_db=(0.0, 30.0), record_timing=False,
              bisect=BisectionConfig(eps_bisect=1e-3))
    paths = [tmp_path / 'first.csv', tmp_path / 'second.csv', tmp_path / 'parallel.csv']
    run_experiment(ExperimentSpec(out_path=str(paths[0]), **kw))
    run_experiment(ExperimentSpec(out_path=str(paths[1]), **kw))
    run_experiment(ExperimentSpec(out_path=str(paths[2]), threads=2, **kw))
    data = [p.read_bytes() for p in paths]
    ok = data[0] == data[1] == data[2]
    assert verdict(9, 'determinism', ok,
                   f"3 runs ({len(data[0])} bytes each, serial x2 and 2 workers) byte-identical: {ok}")
