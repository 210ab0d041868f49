import json

import numpy as np
import pytest

from idlaw import exponent, lawio


@pytest.fixture(scope="session")
def gaussian_phi():
    return exponent.closed_form("gaussian")


@pytest.fixture(scope="session")
def drift_phi():
    return exponent.closed_form("dirac", shift=0.7)


@pytest.fixture(scope="session")
def cp_phi():
    return exponent.closed_form("compound_poisson", rate=2.0, jumps=[[2.0], [-2.0]])


@pytest.fixture(scope="session")
def mix_phi(gaussian_phi, cp_phi):
    return exponent.convolve(gaussian_phi, cp_phi)


@pytest.fixture(scope="session")
def law_family(gaussian_phi, drift_phi, cp_phi, mix_phi):
    return {
        "gaussian": gaussian_phi,
        "drift": drift_phi,
        "cp": cp_phi,
        "mix": mix_phi,
    }


@pytest.fixture(scope="session")
def grid9():
    return np.linspace(-3.0, 3.0, 9)[:, None]


@pytest.fixture(scope="session")
def grid5():
    return np.linspace(-2.0, 2.0, 5)[:, None]


@pytest.fixture()
def law_files(tmp_path):
    """Write every builtin law description to disk, return name -> path."""
    paths = {}
    for name, doc in lawio.BUILTIN_LAWS.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = str(p)
    return paths
