"""Circle operators: truncated spectra, gauge conjugation, paths, F splittings."""

import numpy as np
import pytest

from sflab.circle import (
    BoundaryComponentSpec,
    BoundaryEndomorphism,
    boundary_family_path,
    build_circle_operator,
    conjugation_path,
    exact_circle_flow,
    f_tilde,
    gauge_conjugate,
    split_by_F,
)
from sflab.core import eig_spectrum
from sflab.errors import InvalidTruncation, NearSingularF, TruncationTooTight
from sflab.gauges import diagonal_windings, identity_gauge, scalar_winding


def test_circle_spectrum_integers():
    b = build_circle_operator(1, 1, 2, 0.0)
    assert np.allclose(eig_spectrum(b).values, [-2, -1, 0, 1, 2])


def test_circle_spectrum_constant_shift():
    b = build_circle_operator(1, 1, 2, np.array([[0.3]]))
    assert np.allclose(eig_spectrum(b).values, [-1.7, -0.7, 0.3, 1.3, 2.3])


def test_sigma_flips_spectrum():
    a = np.array([[0.3]])
    plus = eig_spectrum(build_circle_operator(1, 1, 4, a, sigma=+1)).values
    minus = eig_spectrum(build_circle_operator(1, 1, 4, a, sigma=-1)).values
    assert np.allclose(minus, -plus[::-1])


def test_multiplicity_with_fiber():
    # A = 0 gives each integer eigenvalue with multiplicity k*N
    b = build_circle_operator(2, 3, 2, np.zeros((2, 2)))
    vals = eig_spectrum(b).values
    expect = np.repeat(np.arange(-2, 3), 6)
    assert np.allclose(vals, expect)


def test_invalid_truncation():
    with pytest.raises(InvalidTruncation):
        build_circle_operator(1, 1, 0, 0.0)


def test_gauge_conjugate_identity():
    b = build_circle_operator(1, 2, 5, 0.1)
    c = gauge_conjugate(b, identity_gauge(2))
    assert np.allclose(c.entries, b.entries)


def test_gauge_conjugate_scalar_shift():
    # g = e^{i theta}: conjugation shifts every ladder eigenvalue by -1
    b = build_circle_operator(1, 1, 8, 0.0)
    c = gauge_conjugate(b, scalar_winding(1))
    assert np.allclose(np.sort(np.diag(c.entries).real), np.arange(-8, 9) - 1.0)


def test_gauge_conjugate_scalar_shift_multiplicity_two():
    b = build_circle_operator(1, 2, 8, 0.0)
    c = gauge_conjugate(b, scalar_winding(2, size=2))
    vals = eig_spectrum(c).values
    assert np.allclose(vals, np.repeat(np.arange(-8, 9) - 2.0, 2))


def test_gauge_conjugate_banded_difference():
    b = build_circle_operator(1, 2, 8, 0.1)
    g = diagonal_windings([1, -1])
    c = gauge_conjugate(b, g)
    diff = c.entries - b.entries
    kn = 2
    for i in range(b.dim):
        for j in range(b.dim):
            if abs(i // kn - j // kn) > 2 * g.degree:
                assert diff[i, j] == 0


def test_margin_enforced():
    b = build_circle_operator(1, 1, 3, 0.0)
    with pytest.raises(TruncationTooTight):
        gauge_conjugate(b, scalar_winding(2))


def test_conjugation_path_endpoints_and_linearity():
    b = build_circle_operator(1, 1, 6, 0.1)
    g = scalar_winding(1)
    path = conjugation_path(b, g)
    c = gauge_conjugate(b, g)
    assert np.allclose(path.at(0.0).entries, b.entries)
    assert np.allclose(path.at(1.0).entries, c.entries)
    mid = 0.5 * (b.entries + c.entries)
    assert np.allclose(path.at(0.5).entries, mid)


def test_conjugation_path_identity_constant():
    b = build_circle_operator(2, 1, 5, 0.2 * np.eye(2))
    path = conjugation_path(b, identity_gauge(1))
    for u in (0.0, 0.3, 0.7, 1.0):
        assert np.allclose(path.at(u).entries, b.entries)


def test_scalar_winding_interpolation_is_shift():
    # u -> B - u*n on every ladder, for scalar winding n
    b = build_circle_operator(1, 1, 8, 0.1)
    path = conjugation_path(b, scalar_winding(1))
    vals = eig_spectrum(path.at(0.25)).values
    assert np.allclose(vals, np.arange(-8, 9) + 0.1 - 0.25)


def test_exact_circle_flow_examples():
    assert exact_circle_flow([1], +1) == -1
    assert exact_circle_flow([1, 1], -1) == +2
    assert exact_circle_flow([0], +1) == 0
    assert exact_circle_flow([0], -1) == 0


def test_split_by_f_diagonal():
    s = split_by_F(BoundaryEndomorphism(np.diag([1.0, -1.0])))
    assert (s.k_plus, s.k_minus) == (1, 1)
    assert np.allclose(s.proj_plus, np.diag([1.0, 0.0]))


def test_split_by_f_positive():
    s = split_by_F(BoundaryEndomorphism(np.diag([2.0, 1.0])))
    assert (s.k_plus, s.k_minus) == (2, 0)


def test_split_by_f_off_diagonal():
    s = split_by_F(BoundaryEndomorphism(np.array([[0.0, 1.0], [1.0, 0.0]])))
    assert (s.k_plus, s.k_minus) == (1, 1)
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    assert np.allclose(s.proj_plus, np.outer(v, v))


def test_near_singular_f_rejected():
    with pytest.raises(NearSingularF):
        BoundaryEndomorphism(np.diag([1.0, 1e-9]))


@pytest.mark.parametrize("seed", range(4))
def test_f_tilde_is_unitary_flattening(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = a + a.conj().T + 0.5 * np.eye(3)  # generically invertible
    if np.min(np.abs(np.linalg.eigvalsh(h))) < 1e-3:
        pytest.skip("accidental near-kernel")
    f = BoundaryEndomorphism(h)
    ft = f_tilde(f)
    assert np.allclose(ft @ ft, np.eye(3), atol=1e-12)
    # same signature on each eigenline
    vals, vecs = np.linalg.eigh(h)
    signs = np.sign(vals)
    assert np.allclose(vecs.conj().T @ ft @ vecs, np.diag(signs), atol=1e-10)


def test_boundary_family_block_structure():
    shift = 0.1 * np.eye(2)
    comps = (
        BoundaryComponentSpec(
            sigma=+1,
            connection=shift,
            f=BoundaryEndomorphism(np.diag([1.0, -1.0]), "Z0"),
            gauge=scalar_winding(1),
        ),
        BoundaryComponentSpec(
            sigma=-1,
            connection=shift,
            f=BoundaryEndomorphism(np.eye(2), "ZL"),
            gauge=scalar_winding(1),
        ),
    )
    path = boundary_family_path(comps, 6, "plus")
    # component 0 contributes rank 1, component 1 rank 2: 3 fiber lines
    assert path.dim == (2 * 6 + 1) * 3
    labels = set(path.labels)
    assert len(labels) == path.dim
