import pytest

from bargmann_lab import quadrature


@pytest.fixture(scope="session")
def rule16():
    return quadrature.build_product_rule(1, 16)


@pytest.fixture(scope="session")
def rule24():
    return quadrature.build_product_rule(1, 24)


@pytest.fixture(scope="session")
def rule32():
    return quadrature.build_product_rule(1, 32)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""
    def record(number, title, passed, detail):
        _CRITERIA[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")
