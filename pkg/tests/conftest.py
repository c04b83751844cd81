import math

import pytest

from boxctl.permutation import build_sigma, table_size_for

A_FERMI = math.pi / 2
A_TILDE_FERMI = A_FERMI / 3


@pytest.fixture(scope="session")
def fermi_table():
    """Neumann, 0-based table certified past rank 370800."""
    return build_sigma(A_FERMI, A_TILDE_FERMI, table_size_for(370800, 0), boundary="neumann", rank_base=0)


# -- acceptance summary: one line per criterion ---------------------------------------


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    outcomes = item.config.stash.setdefault(_OUTCOMES, {})
    summary = next((v for k, v in item.user_properties if k == "summary"), "")
    ok = call.excinfo is None
    prev = outcomes.get(marker.args[0])
    if prev is not None:
        ok = ok and prev[0]
        summary = "; ".join(s for s in (prev[1], summary) if s)
    outcomes[marker.args[0]] = (ok, summary)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = config.stash.get(_OUTCOMES, {})
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        ok, summary = outcomes[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {summary}")


_OUTCOMES = pytest.StashKey[dict]()
