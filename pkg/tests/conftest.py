from __future__ import annotations

import pytest

from crninject import bundled_network
from crninject.network import Network, reorder_network
from crninject.poly import Polynomial, ring_for

FUTILE_ORDER = [f"S{i}" for i in range(1, 7)]
TWO_SITE_ORDER = [f"S{i}" for i in range(1, 10)]


def futile_cycle() -> Network:
    """Futile cycle with species listed S1..S6."""
    return reorder_network(bundled_network("futile_cycle"), FUTILE_ORDER)


def two_site() -> Network:
    return reorder_network(bundled_network("two_site"), TWO_SITE_ORDER)


def P(net: Network, text: str) -> Polynomial:
    return ring_for(net).parse(text)


@pytest.fixture
def futile():
    return futile_cycle()


@pytest.fixture
def twosite():
    return two_site()


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
