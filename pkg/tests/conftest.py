import csv
import os

import numpy as np
import pytest

from nfresolvent.kernel import GridFunction, Kernel, build_iterated
from nfresolvent.quadrature import gauss_legendre
from nfresolvent.spectral import eigendecompose

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

# (criterion, passed, detail) lines collected by test_acceptance
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def load_paper_table():
    """{(m, n, lam): value} from the golden copy of the printed error table."""
    with open(os.path.join(GOLDEN, "table1_paper.csv"), newline="") as fh:
        return {
            (int(r["m"]), int(r["n_fourier"]), float(r["lambda"])): float(r["abs_error"])
            for r in csv.DictReader(fh)
        }


@pytest.fixture(scope="session")
def paper_table():
    return load_paper_table()


@pytest.fixture(scope="session")
def min_kernel():
    return Kernel.builtin("min")


@pytest.fixture(scope="session")
def rule200():
    return gauss_legendre(200, 0.0, 1.0)


@pytest.fixture(scope="session")
def stack200(min_kernel, rule200):
    return build_iterated(min_kernel, rule200, 4)


@pytest.fixture(scope="session")
def spec200(min_kernel, rule200, stack200):
    return eigendecompose(min_kernel, rule200, 200, matrix=stack200.matrix(1))


@pytest.fixture(scope="session")
def f_identity(rule200):
    return GridFunction.sample(rule200, lambda x: np.asarray(x, dtype=float))


@pytest.fixture(scope="session")
def exact_lambdas():
    return ((np.arange(1, 201) - 0.5) * np.pi) ** 2
