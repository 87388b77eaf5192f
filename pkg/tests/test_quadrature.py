import math

import numpy as np
import pytest

from ermakov.errors import QuadratureFailure
from ermakov.quadrature import adaptive_quadrature, panel_from_callable, quad


def test_polynomial_exact():
    assert quad(lambda x: x ** 3 - 2 * x, 0.0, 2.0) == pytest.approx(0.0, abs=1e-13)


def test_sine():
    assert quad(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)


def test_orientation():
    v = quad(np.exp, 0.0, 1.0)
    assert quad(np.exp, 1.0, 0.0) == pytest.approx(-v, abs=1e-13)
    assert v == pytest.approx(math.e - 1.0, abs=1e-12)


def test_sharp_peak():
    # narrow Lorentzian forces real subdivision
    val = quad(lambda x: 1e-4 / ((x - 0.37) ** 2 + 1e-8), -1.0, 1.0)
    exact = math.atan((1 - 0.37) / 1e-4) + math.atan((1 + 0.37) / 1e-4)
    assert val == pytest.approx(exact, rel=1e-11)


def test_cumulative_boundaries():
    panel = panel_from_callable(np.cos)
    total, bounds = adaptive_quadrature(panel, 0.0, 2.0)
    assert bounds[0] == (0.0, 0.0)
    assert bounds[-1][0] == 2.0
    assert bounds[-1][1] == pytest.approx(total, abs=1e-15)
    xs = [b[0] for b in bounds]
    assert xs == sorted(xs)
    for x, cum in bounds:
        assert cum == pytest.approx(math.sin(x), abs=1e-12)


def test_integrable_endpoint_singularity_beyond_range():
    # 1/sqrt(1 - x) is fine as long as panels stop short of the pole
    val = quad(lambda x: 1.0 / np.sqrt(1.0 - x), 0.0, 0.9999)
    exact = 2.0 * (1.0 - math.sqrt(1.0 - 0.9999))
    assert val == pytest.approx(exact, rel=1e-10)


def test_nonintegrable_singularity_fails_cleanly():
    with np.errstate(divide="ignore"), pytest.raises(QuadratureFailure):
        quad(lambda x: 1.0 / (x - 0.5) ** 2, 0.0, 1.0)


def test_zero_width():
    assert quad(np.sin, 1.0, 1.0) == 0.0
