import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

START_KEY = pytest.StashKey[float]()
FILES_KEY = pytest.StashKey[set]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance bookkeeping ---------------------------------------------------

ACCEPTANCE_LINES = []
LAST_TEST = "test_criterion_9_suite_runtime"


def pytest_sessionstart(session):
    session.config.stash[START_KEY] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    # the runtime criterion times the whole session, so it must run last
    last = [it for it in items if it.name == LAST_TEST]
    items[:] = [it for it in items if it.name != LAST_TEST] + last
    config.stash[FILES_KEY] = {Path(str(it.fspath)).name for it in items}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
