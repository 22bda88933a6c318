"""Pytest configuration and fixtures."""

from pathlib import Path

import pytest

from isothermal_collapse.config import Tolerances
from isothermal_collapse.flow_field import build_solution
from isothermal_collapse.io import write_manifest
from isothermal_collapse.similarity_core import SimilarityParams

# (m, beta) of the two reference flows; a = 1 and Omega0 = -1 throughout
REFERENCE_CASES = {"m2": (2, -1.0), "m1": (1, -0.5)}


@pytest.fixture(scope="session")
def tolerances() -> Tolerances:
    return Tolerances()


@pytest.fixture(scope="session")
def params_m2() -> SimilarityParams:
    return SimilarityParams(m=2, beta=-1.0, a=1.0)


@pytest.fixture(scope="session")
def params_m1() -> SimilarityParams:
    return SimilarityParams(m=1, beta=-0.5, a=1.0)


@pytest.fixture(scope="session")
def sol_m2(params_m2, tolerances):
    """Spherical flow m=2, beta=-1."""
    return build_solution(params_m2, omega0=-1.0, tolerances=tolerances)


@pytest.fixture(scope="session")
def sol_m1(params_m1, tolerances):
    """Cylindrical flow m=1, beta=-1/2."""
    return build_solution(params_m1, omega0=-1.0, tolerances=tolerances)


@pytest.fixture(params=sorted(REFERENCE_CASES))
def solution(request):
    """Each reference solution in turn."""
    return request.getfixturevalue(f"sol_{request.param}")


@pytest.fixture
def make_params():
    def _make(m=2, beta=-1.0, a=1.0):
        return SimilarityParams(m=m, beta=beta, a=a)

    return _make


@pytest.fixture
def manifest_m2(sol_m2, tmp_path: Path) -> Path:
    """The m=2 solution written as a manifest in a temporary directory."""
    return write_manifest(tmp_path / "manifest" / "solution.json", sol_m2)


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    """Return a temporary output directory."""
    return tmp_path / "out"
