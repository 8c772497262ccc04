import numpy as np
import pytest
from hypothesis import settings

from riskcap import TradedAsset, build_space, risk_free

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")


@pytest.fixture
def three():
    """Three states with a small atom where the bond defaults."""
    return build_space(["w1", "w2", "w3"], ["0.05", "0.06", "0.89"])


@pytest.fixture
def three_b():
    return build_space(["a", "b", "c"], ["0.05", "0.05", "0.90"])


@pytest.fixture
def bond(three):
    return TradedAsset(1.0, three.position([0, 1, 1]))


@pytest.fixture
def bond_b(three_b):
    return TradedAsset(1.0, three_b.position([0, 1, 1]))


@pytest.fixture
def cash(three):
    return risk_free(three)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion as a single PASS/FAIL line."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
        _CRITERIA.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
