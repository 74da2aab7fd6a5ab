"""Gauge symbols: unitarity validation, coefficients, products, inverses."""

import numpy as np
import pytest

from sflab.errors import InvalidGauge
from sflab.gauges import (
    TrigPolyGauge,
    diagonal_windings,
    from_coeffs,
    identity_gauge,
    phase_modulated,
    scalar_winding,
)


def test_identity_gauge():
    g = identity_gauge(2)
    assert g.degree == 0
    vals = g.evaluate(np.array([0.0, 1.0]))
    assert np.allclose(vals, np.eye(2))


def test_scalar_winding_values():
    g = scalar_winding(3)
    theta = np.linspace(0, 2 * np.pi, 17)
    assert np.allclose(g.evaluate(theta)[:, 0, 0], np.exp(3j * theta))


def test_diagonal_windings_values():
    g = diagonal_windings([1, -2])
    theta = np.array([0.4, 2.2])
    vals = g.evaluate(theta)
    assert np.allclose(vals[:, 0, 0], np.exp(1j * theta))
    assert np.allclose(vals[:, 1, 1], np.exp(-2j * theta))
    assert np.allclose(vals[:, 0, 1], 0)


def test_non_unitary_rejected():
    with pytest.raises(InvalidGauge):
        from_coeffs(1, {0: np.array([[0.5]])})
    with pytest.raises(InvalidGauge):
        # e^{i theta} + 1 is not unitary
        from_coeffs(1, {0: np.array([[1.0]]), 1: np.array([[1.0]])})


def test_inverse_is_pointwise_adjoint():
    g = diagonal_windings([2, -1])
    gi = g.inverse()
    theta = np.linspace(0, 2 * np.pi, 9)
    prod = np.einsum("sij,sjk->sik", g.evaluate(theta), gi.evaluate(theta))
    assert np.allclose(prod, np.eye(2), atol=1e-12)


def test_product_convolves_coefficients():
    a, b = scalar_winding(2), scalar_winding(-3)
    ab = a.product(b)
    assert ab.freqs == (-1,)
    theta = np.linspace(0, 2 * np.pi, 11)
    assert np.allclose(ab.evaluate(theta)[:, 0, 0], np.exp(-1j * theta))


def test_phase_modulated_is_unitary_and_correct():
    g = phase_modulated(1, 1.0)
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    expect = np.exp(1j * theta) * np.exp(1j * np.sin(theta))
    assert np.allclose(g.evaluate(theta)[:, 0, 0], expect, atol=1e-10)
    assert g.degree >= 8


def test_phase_modulated_zero_amplitude():
    g = phase_modulated(2, 0.0)
    assert g.freqs == (2,)


def test_coeff_lookup():
    g = diagonal_windings([1, -1])
    assert np.allclose(g.coeff(1), np.diag([1.0, 0.0]))
    assert np.allclose(g.coeff(5), 0)
