import math

import numpy as np
import pytest
from hypothesis import settings

from curlwave.propagator import Medium, Mode, build_solution
from curlwave.spectral_core import WaveVector

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_modes(rng, n_modes=6, max_index=3, periods=(1.0, 1.0, 1.0), isotropic=True):
    """Distinct lattice modes with random complex amplitudes.

    With ``isotropic`` the set always includes one mode on the w_x = w_y = w_z line
    (when the periods allow it).
    """
    picked = set()
    if isotropic:
        j = int(rng.integers(1, max_index + 1)) * int(rng.choice([-1, 1]))
        picked.add((j, j, j))
    while len(picked) < n_modes:
        picked.add(tuple(int(x) for x in rng.integers(-max_index, max_index + 1, size=3)))
    return [Mode(WaveVector.from_lattice(*idx, periods), random_complex(rng, 3))
            for idx in sorted(picked)]


def random_solution(rng, n_modes=6, max_index=3, medium=None, periods=None):
    if periods is None:
        periods = tuple(float(b) for b in rng.uniform(0.5, 2.0, size=3))
    if medium is None:
        medium = Medium(float(rng.uniform(0.5, 3.0)), float(rng.uniform(0.5, 3.0)))
    modes = random_modes(rng, n_modes, max_index, periods)
    return build_solution(modes, medium, periods), modes


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.abs(b).max(initial=0.0), 1e-300)
    return float(np.abs(a - b).max() / scale)


SQ3 = math.sqrt(3.0)


# acceptance criteria append (label, passed, detail) here
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
