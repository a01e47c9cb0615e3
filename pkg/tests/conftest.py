"""Session fixtures: the operating points most tests share."""

import pytest
from hypothesis import settings

import zenocavity as zc

settings.register_profile("suite", deadline=None, max_examples=25)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def space1():
    return zc.full_space(1)


@pytest.fixture(scope="session")
def st_model(space1):
    # canonical single-branch point: g = lam = 1, omega1/g = 0.01
    params = zc.UniformParams(g=1.0, lam=1.0, omega1=0.01)
    return zc.build_branch_model(params, zc.Branch.LEFT, space=space1)


@pytest.fixture(scope="session")
def combined_model(space1):
    params = zc.UniformParams(g=1.0, lam=1.0, omega1=0.01, omega2=0.01, omega3=0.01)
    return zc.build_branch_model(params, zc.Branch.COMBINED, space=space1)
