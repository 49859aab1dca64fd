"""Shared test utilities: standard-error assertions and brute-force
quadrature oracles kept independent of the library code they check."""

from __future__ import annotations

import math

import numpy as np
import pytest


def assert_within_se(observed: float, expected: float, std_error: float, k: float = 4.0, label: str = ""):
    """Assert |observed - expected| <= k standard errors."""
    margin = k * std_error
    assert abs(observed - expected) <= margin, (
        f"{label or 'value'} {observed} differs from {expected} by "
        f"{abs(observed - expected):.6g} > {k} se = {margin:.6g}"
    )


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def variance_and_se(values: np.ndarray) -> tuple[float, float]:
    """Sample variance with its own standard error (via the fourth moment)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    centered = values - values.mean()
    var = float(centered @ centered / (n - 1))
    m4 = float(np.mean(centered**4))
    se = math.sqrt(max(m4 - var * var, 0.0) / n)
    return var, se


def gauss_legendre_expectation(fn, mu: float, s: float, split=(), half_width: float = 14.0, nodes: int = 200) -> float:
    """E[fn(xi)] for xi ~ N(mu, s^2) by panel-wise Gauss-Legendre quadrature.

    ``split`` lists interior points (in standard-normal units) where the
    integrand is allowed to be non-smooth; each smooth panel is integrated
    separately, so kinks cost nothing.  Plain Gauss-Hermite stalls near 1e-3
    on the |e^x - 1| kink, which is why the oracle uses split panels.
    """
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    points = sorted({-half_width, half_width, *(z for z in split if -half_width < z < half_width)})
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        z = 0.5 * (b - a) * xs + 0.5 * (a + b)
        f = np.array([fn(mu + s * zi) for zi in z])
        phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        total += 0.5 * (b - a) * float((ws * f * phi).sum())
    return total


@pytest.fixture
def tol():
    return 1e-10
