import numpy as np
import pytest

from degenwave import Domain, WeightSpec, assemble, build_grid, solve_eigen


@pytest.fixture(scope="session")
def string_system():
    return assemble(WeightSpec.constant(), build_grid(Domain.interval(0.0, 1.0), 201))


@pytest.fixture(scope="session")
def string_basis(string_system):
    return solve_eigen(string_system, 32)


@pytest.fixture(scope="session")
def degen_system():
    return assemble(WeightSpec.power(0.5, (0.0,)), build_grid(Domain.interval(-1.0, 1.0), 201))


@pytest.fixture(scope="session")
def degen_basis(degen_system):
    return solve_eigen(degen_system, 32)


@pytest.fixture(scope="session")
def square_system():
    spec = WeightSpec.power(0.5, (0.5, 0.5), dimension=2)
    return assemble(spec, build_grid(Domain.rectangle(0.0, 1.0, 0.0, 1.0), (13, 11)))


@pytest.fixture(scope="session")
def square_basis(square_system):
    return solve_eigen(square_system, 24)


@pytest.fixture(scope="session", params=["string", "degen"])
def basis(request, string_basis, degen_basis):
    return string_basis if request.param == "string" else degen_basis


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPT_LINES = []


@pytest.fixture
def accept(request, capsys):
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def report(ok: bool, label: str, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _ACCEPT_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPT_LINES:
            terminalreporter.write_line(line)
