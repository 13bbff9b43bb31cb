import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qdiode import validate_config  # noqa: E402
from qdiode.errors import ConfigError  # noqa: E402

FIG2C = dict(n_aux=1, omega_left=4.0, omega_right=2.0, omega_aux=2.0, g_lr=0.1, g_la=0.05,
             gamma=0.001, temp_left=1.0, temp_right=0.5)
FIG3 = dict(n_aux=1, omega_left=5.0, omega_right=3.0, omega_aux=2.0, g_lr=1.0, g_la=0.5,
            gamma=0.001, temp_left=2.0, temp_right=1.0)
FIG6 = dict(n_aux=1, omega_left=4.0, omega_right=4.0, omega_aux=2.0, g_lr=0.2, g_la=0.02,
            gamma=0.001, temp_left=0.3, temp_right=0.5)
FIG7 = dict(n_aux=3, omega_left=4.0, omega_right=2.0, omega_aux=2.0, g_lr=0.1, g_la=0.1,
            gamma=0.001, temp_left=0.8, temp_right=0.5)
FIG8 = dict(n_aux=1, omega_left=4.0, omega_right=1.0, omega_aux=5.0, g_lr=0.1, g_la=0.1,
            gamma=0.001, temp_left=0.8, temp_right=0.5)


def random_config(rng: np.random.Generator, n_aux: int, **fixed):
    """A random valid configuration (rejection sampling on the frequency bounds)."""
    while True:
        params = dict(
            n_aux=n_aux,
            omega_left=rng.uniform(1.0, 5.0),
            omega_right=rng.uniform(1.0, 5.0),
            omega_aux=list(rng.uniform(0.5, 4.0, n_aux)),
            g_lr=rng.uniform(-0.3, 0.3),
            g_la=list(rng.uniform(-0.15, 0.15, n_aux)),
            gamma=10 ** rng.uniform(-4, -2),
            temp_left=rng.uniform(0.2, 2.0),
            temp_right=rng.uniform(0.2, 2.0),
        )
        params.update(fixed)
        try:
            return validate_config(params)
        except ConfigError:
            continue


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary ----------------------------------------------------------

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[number] = (title, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[number]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}  {verdict}  {title}")
    passed = sum(o == "passed" for _, o in _ACCEPTANCE.values())
    terminalreporter.write_line(f"{passed}/{len(_ACCEPTANCE)} criteria passed")
