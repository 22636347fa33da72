import pytest

from eulerfronts.exact_solution import SolutionFamily
from eulerfronts.process import adiabatic_process
from eulerfronts.singularity import cusp
from eulerfronts.thermo import ideal_gas_model

# R = 0.6 with n = 3 and s0 = 0 makes A0 = 1, i.e. A(rho) = rho^(-2/3)
REF_R = 0.6
REF_ALPHA = (0.0, 0.0, 1.0, 1.0)

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ref_curve():
    return adiabatic_process(ideal_gas_model(3, REF_R), 0.0)


@pytest.fixture(scope="session")
def ref_family(ref_curve):
    return SolutionFamily.from_alpha(REF_ALPHA, ref_curve)


@pytest.fixture(scope="session")
def ref_cusp(ref_family):
    return cusp(ref_family)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
