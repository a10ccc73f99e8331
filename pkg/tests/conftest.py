import numpy as np
import pytest

from twrelay.channel import SystemConfig, generate_channels
from twrelay.forms import build_quadratic_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_instance(seed=7, M=2, N_R=4, sigma2=1.0, sigmaR2=1.0, P=10.0):
    cfg = SystemConfig(M=M, N_R=N_R, sigma2=sigma2, sigmaR2=sigmaR2, P=P, seed=seed)
    ch = generate_channels(cfg)
    return cfg, ch, build_quadratic_problem(ch, cfg)


@pytest.fixture
def desk_instance():
    return make_instance()


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section('acceptance criteria')
        for line in VERDICTS:
            terminalreporter.write_line(line)
