import math

import numpy as np
import pytest

from fharmonic.manifold import build_sphere_domain, build_torus_domain
from fharmonic.smooth_map import (
    clifford_map, constant_map, equator_map, identity_map, latitude_map,
)

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def criterion():
    """Record (and print) one PASS/FAIL line for an acceptance criterion."""
    def report(number, ok, detail):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line
    return report


@pytest.fixture(scope="session")
def s2():
    return build_sphere_domain(2)


@pytest.fixture(scope="session")
def s3():
    return build_sphere_domain(3)


@pytest.fixture(scope="session")
def t2():
    return build_torus_domain(2, [2 * math.pi, 2 * math.pi])


@pytest.fixture(scope="session")
def catalog(s2, s3, t2):
    """Every catalog map, keyed by a short name."""
    return {
        "identity-s2": identity_map(s2),
        "identity-s3": identity_map(s3),
        "equator-s2-s3": equator_map(s2, 3),
        "equator-s3-s4": equator_map(s3, 4),
        "latitude-s3-s4": latitude_map(s3, 4, 0.5),
        "constant-s2-s3": constant_map(s2, 3),
        "clifford-t2-s3": clifford_map(t2, 3),
    }


@pytest.fixture(scope="session")
def harmonic_catalog(catalog):
    return {k: v for k, v in catalog.items() if not k.startswith("latitude")}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
