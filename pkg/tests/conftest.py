import sys

import numpy as np
import pytest

from copulacovar.copulas import (
    ArchimedeanCopula,
    ClaytonCopula,
    GaussianCopula,
    GeneratorSpec,
    GumbelCopula,
    StudentTCopula,
)


def frank_generator(theta):
    """Frank generator; no closed-form inverse derivative is supplied."""
    em1 = np.expm1(-theta)
    return GeneratorSpec(
        phi=lambda t: -np.log(np.expm1(-theta * np.asarray(t, dtype=float)) / em1),
        phi_inv=lambda s: -np.log1p(np.exp(-np.asarray(s, dtype=float)) * em1) / theta,
        phi_prime=lambda t: theta / -np.expm1(theta * np.asarray(t, dtype=float)),
        name=f"frank({theta})",
    )


def frank_cond_cdf(v, u, theta):
    a, b = np.expm1(-theta * u), np.expm1(-theta * v)
    return np.exp(-theta * u) * b / (np.expm1(-theta) + a * b)


FIVE_FAMILIES = {
    "gaussian": GaussianCopula(0.5),
    "student_t": StudentTCopula(0.5, 5.0),
    "gumbel": GumbelCopula(2.0),
    "clayton": ClaytonCopula(2.0),
    "archimedean": ArchimedeanCopula(frank_generator(5.0)),
}


@pytest.fixture(params=sorted(FIVE_FAMILIES), ids=sorted(FIVE_FAMILIES))
def copula(request):
    return FIVE_FAMILIES[request.param]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
