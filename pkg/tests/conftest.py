import numpy as np
import pytest

from ermakov import catalog


@pytest.fixture(scope="session")
def fixtures():
    return {name: catalog.get(name) for name in catalog.FIXTURE_NAMES}


@pytest.fixture()
def rng():
    return np.random.default_rng(42)


def _random_definite_form(rng):
    """A random positive-definite quadratic form."""
    from ermakov.geometry import QuadraticForm

    a = float(np.exp(rng.uniform(-0.7, 0.7)))
    c = float(np.exp(rng.uniform(-0.7, 0.7)))
    b = float(rng.uniform(-0.85, 0.85)) * np.sqrt(a * c)
    return QuadraticForm(a, b, c)


@pytest.fixture(scope="session")
def definite_form_factory():
    return _random_definite_form
