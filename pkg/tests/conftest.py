import numpy as np
import pytest

from hjm_swaption.curves import build_discount_curve, flat_curve
from hjm_swaption.surface import ForwardVolSurface


@pytest.fixture(scope="session")
def flat2():
    return flat_curve(0.02)


@pytest.fixture(scope="session")
def zero_curve():
    return build_discount_curve([(1.0, 0.0), (60.0, 0.0)], mode="rate")


@pytest.fixture(scope="session")
def random_surface():
    rng = np.random.default_rng(20161)
    return ForwardVolSurface(rng.uniform(0.002, 0.015, size=(60, 60)), 0.5)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record a one-line PASS/FAIL verdict for the end-of-run summary."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
