"""Shared pytest plumbing: the acceptance-gate result log.

The end-to-end gates in test_acceptance.py each record one PASS/FAIL
line; printing happens in the terminal summary so the lines survive
pytest's output capture and appear on every run, green or red.
"""

import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Mutable list of result lines shared by the acceptance tests."""
    return request.config.stash[ACCEPTANCE_KEY]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.write_sep("-", "acceptance gates")
        for line in lines:
            terminalreporter.write_line(line)
