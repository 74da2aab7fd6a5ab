"""Core substrate: spectra, signed counts, Hermiticity checks, paths."""

import numpy as np
import pytest

from sflab.circle import build_circle_operator
from sflab.core import (
    BasisLabel,
    HermitianOperator,
    Spectrum,
    eig_spectrum,
    hermiticity_residual,
    linear_path,
    neg_count,
    sign_counts,
)
from sflab.errors import NonHermitianInput


def _labels(n):
    return tuple(BasisLabel(mode=0, fiber=j) for j in range(n))


def test_eig_spectrum_pauli():
    op = HermitianOperator(np.array([[0.0, 1.0], [1.0, 0.0]]), _labels(2))
    assert np.allclose(eig_spectrum(op).values, [-1.0, 1.0])


def test_eig_spectrum_scalar():
    op = HermitianOperator(np.array([[2.5]]), _labels(1))
    assert np.allclose(eig_spectrum(op).values, [2.5])


def test_eig_spectrum_circle_truncation():
    b = build_circle_operator(1, 1, 2, 0.0)
    assert np.allclose(eig_spectrum(b).values, [-2, -1, 0, 1, 2])


def test_eig_spectrum_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        eig_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermiticity_residual_values():
    assert hermiticity_residual(np.eye(3)) == 0.0
    assert hermiticity_residual(np.array([[0, 1j], [-1j, 0]])) == 0.0
    assert hermiticity_residual(np.array([[0.0, 1.0], [0.0, 0.0]])) == 1.0


def test_neg_count_examples():
    s = Spectrum(np.array([-2.0, -1.0, 0.0, 1.0, 2.0]))
    counts = sign_counts(s, 1e-8)
    assert neg_count(s, 1e-8) == 2
    assert counts.near_zero == 1
    s2 = Spectrum(np.array([0.5, 1.5]))
    assert neg_count(s2, 1e-8) == 0


def test_neg_count_winding_shifted_ladder():
    # eigenvalues m - 1 for |m| <= 2: three strictly negative, one zero
    s = Spectrum(np.arange(-2, 3) - 1.0)
    assert neg_count(s, 1e-8) == 3
    assert sign_counts(s, 1e-8).near_zero == 1


@pytest.mark.parametrize("tol", [0.0, 1e-8, 0.5, 2.0])
def test_sign_counts_partition(tol):
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = Spectrum(np.sort(rng.standard_normal(rng.integers(1, 40))))
        c = sign_counts(s, tol)
        assert c.negative + c.near_zero + c.positive == s.dim


def test_spectrum_label_permutation_invariance():
    rng = np.random.default_rng(3)
    n = 12
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = a + a.conj().T
    perm = rng.permutation(n)
    hp = h[np.ix_(perm, perm)]
    assert np.allclose(eig_spectrum(h).values, eig_spectrum(hp).values, atol=1e-10)


def test_hermitian_operator_validates_invariant():
    bad = np.array([[0.0, 1.0], [1.0 + 1e-6, 0.0]])
    with pytest.raises(NonHermitianInput):
        HermitianOperator(bad, _labels(2))


def test_hermitian_operator_requires_unique_labels():
    with pytest.raises(ValueError):
        HermitianOperator(np.eye(2), (_labels(1)[0],) * 2)


def test_entries_read_only():
    op = HermitianOperator(np.eye(2), _labels(2))
    with pytest.raises(ValueError):
        op.entries[0, 0] = 5.0


def test_linear_path_endpoints_and_policy():
    h0 = HermitianOperator(np.diag([1.0, -1.0]), _labels(2))
    h1 = HermitianOperator(np.diag([-1.0, 1.0]), _labels(2))
    path = linear_path(h0, h1)
    assert np.allclose(path.at(0.0).entries, h0.entries)
    assert np.allclose(path.at(1.0).entries, h1.entries)
    assert np.allclose(path.at(0.5).entries, np.zeros((2, 2)))
    assert path.lipschitz == pytest.approx(np.linalg.norm(h1.entries - h0.entries))
    with pytest.raises(ValueError):
        path.at(1.5)
