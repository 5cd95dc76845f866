import re

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_ACCEPTANCE = {}


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion and print it."""
    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    ran = [r for rs in terminalreporter.stats.values() for r in rs
           if getattr(r, "nodeid", "").startswith("tests/test_acceptance.py")
           and getattr(r, "when", "") == "call"]
    if not ran and not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    numbers = {int(m.group(1)) for r in ran
               if (m := re.search(r"test_criterion_(\d+)", r.nodeid))}
    for n in sorted(numbers | set(_ACCEPTANCE)):
        terminalreporter.write_line(_ACCEPTANCE.get(n, f"criterion {n:2d}: FAIL  (error before reporting)"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
