import numpy as np
import pytest

_ACCEPTANCE = []


class AcceptanceLog:
    """Collects one verdict line per acceptance criterion."""

    def record(self, label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok


@pytest.fixture
def acceptance():
    return AcceptanceLog()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, rank=None):
    rank = rank or 4
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)
