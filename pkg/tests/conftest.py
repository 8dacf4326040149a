import numpy as np
import pytest

from hermitlab.catalog import build_model

ACCEPTANCE_LOG: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def torus():
    return build_model("flat-torus", m=3)[1]


@pytest.fixture(scope="session")
def cp3():
    return build_model("fubini-study", m=3, c=4.0)[1]


@pytest.fixture(scope="session")
def s6():
    return build_model("nearly-kahler-s6")[1]


@pytest.fixture(scope="session")
def product():
    return build_model("scaled-product", c1=4.0, c2=1.0)[1]


@pytest.fixture(scope="session")
def perturbed():
    return build_model("perturbed-torus", m=3, eps=0.05)[1]


def interior_points(M, k, seed=0, frac=0.35):
    rng = np.random.default_rng(seed)
    return M.center + frac * M.widths * rng.uniform(-1, 1, size=(k, M.dim))
