import json
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def golden():
    return json.loads((HERE / "golden" / "oracle_values.json").read_text())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, format_line
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    order = lambda name: int(name.split()[0][1:])  # noqa: E731
    for name in sorted(RESULTS, key=order):
        terminalreporter.write_line(format_line(name, *RESULTS[name]))
