import math

import numpy as np
import pytest

from schottky_gaps.config import asymmetric_config, symmetric_config
from schottky_gaps.orbit import enumerate_orbit
from schottky_gaps.process import TangencyMeasure

DELTA_REF = 0.62627635
T_FIG = math.sqrt(2.0) * 1e3

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, line = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {line}")


@pytest.fixture(scope="session")
def cfg():
    return symmetric_config()


@pytest.fixture(scope="session")
def asym_cfg():
    return asymmetric_config()


@pytest.fixture(scope="session")
def orbit_cache(cfg):
    cache = {}

    def get(T, interval=None):
        key = (float(T), interval)
        if key not in cache:
            cache[key] = enumerate_orbit(cfg, T, interval)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def measure(cfg):
    return TangencyMeasure.from_config(cfg, 1e4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
