"""Cylinder operator: exact-spectrum oracle (cross-checked against an
independent transfer-matrix root scan), discretization accuracy, symmetry
and splitting properties."""

import numpy as np
import pytest
from scipy.linalg import expm

from sflab.circle import BoundaryEndomorphism
from sflab.core import eig_spectrum, hermiticity_residual
from sflab.cylinder import (
    CylinderConfig,
    _CylinderAssembler,
    boundary_block_spectrum,
    build_cylinder_operator,
    cylinder_path,
    exact_cylinder_spectrum,
)
from sflab.gauges import identity_gauge, scalar_winding


def transfer_scan_roots(mu, length, bc, window, n_scan=4000):
    """Independent oracle: dense scan + bisection on the 2x2 radial transfer
    problem. The radial system X' = [[-mu, lam], [-lam, mu]] X propagates the
    (f, f~) coefficients; the boundary rows select eigenvalues as roots."""
    starts = {"minus_id_id": [1.0, -1.0], "id_id": [1.0, 1.0], "id_minus_id": [1.0, 1.0]}
    ends = {"minus_id_id": [1.0, 1.0], "id_id": [1.0, 1.0], "id_minus_id": [1.0, -1.0]}
    x0 = np.array(starts[bc])
    row = np.array(ends[bc])

    def shoot(lam):
        c = np.array([[-mu, lam], [-lam, mu]])
        return float(row @ expm(length * c) @ x0)

    grid = np.linspace(-window, window, n_scan)
    vals = np.array([shoot(x) for x in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0:
            lo, hi = a, b
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                if shoot(lo) * shoot(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            roots.append(0.5 * (lo + hi))
    return np.array(roots)


@pytest.mark.parametrize(
    "mu,length,bc",
    [
        (0.1, 1.0, "minus_id_id"),
        (1.3, 2.0, "minus_id_id"),
        (1.0, 1.0, "id_id"),
        (0.7, 1.0, "id_minus_id"),
        (-0.9, 0.5, "minus_id_id"),
    ],
)
def test_exact_spectrum_matches_transfer_scan(mu, length, bc):
    window = 8.0
    closed = exact_cylinder_spectrum([mu], length, bc, window).values
    scanned = transfer_scan_roots(mu, length, bc, window)
    assert len(closed) == len(scanned)
    assert np.max(np.abs(closed - scanned)) < 1e-9


def test_exact_spectrum_zero_mode_case():
    spec = exact_cylinder_spectrum([0.0], 1.0, "minus_id_id", 10.0).values
    expect = np.sort([0.0] + [s * j * np.pi for j in (1, 2, 3) for s in (+1, -1)])
    assert np.allclose(spec, expect)


def test_exact_spectrum_two_lines():
    spec = exact_cylinder_spectrum([-1.0, 1.0], 2.0, "minus_id_id", 2.0).values
    branch = np.hypot(1.0, np.pi / 2.0)
    expect = np.sort([1.0, -1.0, branch, -branch, branch, -branch])
    assert np.allclose(spec, expect)


def test_exact_spectrum_id_id_gap():
    spec = exact_cylinder_spectrum([1.0], 1.0, "id_id", np.pi).values
    assert np.all(np.abs(spec) > 1.0)
    # independent confirmation: no transfer-problem root in the gap
    assert len(transfer_scan_roots(1.0, 1.0, "id_id", 1.0)) == 0


def _cfg(**kw):
    base = dict(
        length=1.0,
        n_r=48,
        modes=5,
        k=1,
        gauge_size=1,
        connection=np.array([[0.1]]),
        f0=BoundaryEndomorphism(np.array([[-1.0]]), "Z0"),
        f_l=BoundaryEndomorphism(np.array([[1.0]]), "ZL"),
        gauge=identity_gauge(1),
    )
    base.update(kw)
    return CylinderConfig(**base)


def test_discrete_matches_oracle_within_one_percent():
    cfg = _cfg()
    disc = eig_spectrum(build_cylinder_operator(cfg, 0.0)).values
    mus = boundary_block_spectrum(cfg, 0.0).values
    oracle = exact_cylinder_spectrum(mus, cfg.length, "minus_id_id", 4.0).values
    window = disc[np.abs(disc) <= 4.0]
    assert len(window) == len(oracle)
    rel = np.abs(window - oracle) / np.maximum(1.0, np.abs(oracle))
    assert np.max(rel) < 1e-2
    # lowest |eigenvalue| (the point branch) is represented exactly
    assert np.min(np.abs(np.abs(window) - 0.1)) < 1e-10


def test_convergence_order_on_doubling():
    mus = boundary_block_spectrum(_cfg(), 0.0).values
    oracle = exact_cylinder_spectrum(mus, 1.0, "minus_id_id", 4.0).values
    errs = {}
    for n_r in (48, 96):
        disc = eig_spectrum(build_cylinder_operator(_cfg(n_r=n_r), 0.0)).values
        window = disc[np.abs(disc) <= 4.0]
        errs[n_r] = np.abs(window - oracle)
    mask = errs[48] > 1e-9
    ratio = errs[48][mask] / errs[96][mask]
    assert np.all(ratio >= 3.0) and np.all(ratio <= 5.0)


def test_identity_gauge_path_is_constant_in_u():
    cfg = _cfg(n_r=16, modes=3)
    a = build_cylinder_operator(cfg, 0.0)
    b = build_cylinder_operator(cfg, 0.7)
    assert np.allclose(a.entries, b.entries, atol=1e-12)


def test_cylinder_path_endpoints():
    cfg = _cfg(n_r=16, modes=3, gauge=scalar_winding(1))
    path = cylinder_path(cfg)
    for u in (0.0, 1.0):
        direct = build_cylinder_operator(cfg, u)
        assert np.allclose(path.at(u).entries, direct.entries, atol=1e-12)
    assert path.labels == direct.labels


def test_assembly_hermitian_before_congruence():
    # the discrete Green identity: the constrained Galerkin matrix is exactly
    # Hermitian, not merely to a tolerance knob
    cfg = _cfg(n_r=12, modes=3, k=2, connection=0.1 * np.eye(2),
               f0=BoundaryEndomorphism(np.array([[0.5, 1.0], [1.0, -0.5]]), "Z0"),
               f_l=BoundaryEndomorphism(np.eye(2), "ZL"))
    asm = _CylinderAssembler(cfg)
    a = asm.assemble_constrained(asm.base.entries)
    assert hermiticity_residual(a) < 1e-14 * max(1.0, np.max(np.abs(a)))


def test_operator_hermiticity_invariant():
    op = build_cylinder_operator(_cfg(n_r=16, modes=3, gauge=scalar_winding(1)), 0.5)
    assert hermiticity_residual(op.entries) <= 1e-10 * max(1.0, op.max_abs())


def test_mirror_symmetry():
    # spectrum of (F0, FL) equals the negated spectrum of (-FL, -F0)
    cfg_a = _cfg(n_r=24, modes=3)
    cfg_b = _cfg(
        n_r=24,
        modes=3,
        f0=BoundaryEndomorphism(np.array([[-1.0]]), "Z0"),
        f_l=BoundaryEndomorphism(np.array([[1.0]]), "ZL"),
    )
    # (F0, FL) = (-1, +1): mirror is (-FL, -F0) = (-1, +1) itself; use an
    # asymmetric pair instead
    cfg_a = _cfg(n_r=24, modes=3,
                 f0=BoundaryEndomorphism(np.array([[1.0]]), "Z0"),
                 f_l=BoundaryEndomorphism(np.array([[1.0]]), "ZL"))
    cfg_b = _cfg(n_r=24, modes=3,
                 f0=BoundaryEndomorphism(np.array([[-1.0]]), "Z0"),
                 f_l=BoundaryEndomorphism(np.array([[-1.0]]), "ZL"))
    va = eig_spectrum(build_cylinder_operator(cfg_a, 0.0)).values
    vb = eig_spectrum(build_cylinder_operator(cfg_b, 0.0)).values
    assert np.allclose(va, -vb[::-1], atol=1e-9)


def test_block_splitting_for_diagonal_data():
    # diagonal fiber data: the cylinder operator splits into fiber-line blocks;
    # its spectrum is the union of the per-line spectra
    cfg = _cfg(
        n_r=24,
        modes=3,
        k=2,
        connection=np.diag([0.1, 0.3]),
        f0=BoundaryEndomorphism(np.diag([1.0, -1.0]), "Z0"),
        f_l=BoundaryEndomorphism(np.eye(2), "ZL"),
    )
    full = eig_spectrum(build_cylinder_operator(cfg, 0.0)).values
    line_plus = _cfg(n_r=24, modes=3, connection=np.array([[0.1]]),
                     f0=BoundaryEndomorphism(np.array([[1.0]]), "Z0"),
                     f_l=BoundaryEndomorphism(np.array([[1.0]]), "ZL"))
    line_minus = _cfg(n_r=24, modes=3, connection=np.array([[0.3]]),
                      f0=BoundaryEndomorphism(np.array([[-1.0]]), "Z0"),
                      f_l=BoundaryEndomorphism(np.array([[1.0]]), "ZL"))
    vp = eig_spectrum(build_cylinder_operator(line_plus, 0.0)).values
    vm = eig_spectrum(build_cylinder_operator(line_minus, 0.0)).values
    assert np.allclose(full, np.sort(np.concatenate([vp, vm])), atol=1e-9)


def test_continuous_branch_never_vanishes():
    # id_id line: discrete spectrum bounded away from zero by min(|mu|, pi/L)
    cfg = _cfg(n_r=32, modes=3,
               f0=BoundaryEndomorphism(np.array([[1.0]]), "Z0"),
               f_l=BoundaryEndomorphism(np.array([[1.0]]), "ZL"))
    vals = eig_spectrum(build_cylinder_operator(cfg, 0.0)).values
    mus = boundary_block_spectrum(cfg, 0.0).values
    bound = min(np.min(np.abs(mus)), np.pi / cfg.length)
    assert np.min(np.abs(vals)) > bound - 0.05


def test_config_validation():
    with pytest.raises(ValueError):
        _cfg(length=-1.0)
    with pytest.raises(ValueError):
        _cfg(n_r=4)
    with pytest.raises(ValueError):
        _cfg(modes=2, gauge=scalar_winding(1))  # needs degree + 2 = 3
    warns = _cfg(modes=5, n_r=10).resolution_warnings()
    assert warns and "resolution" in warns[0]


def test_labels_cover_both_spinors():
    cfg = _cfg(n_r=10, modes=2)
    op = build_cylinder_operator(cfg, 0.0)
    spinors = {lab.spinor for lab in op.labels}
    assert spinors == {"plus", "minus"}
    plus = [lab for lab in op.labels if lab.spinor == "plus"]
    minus = [lab for lab in op.labels if lab.spinor == "minus"]
    assert len(plus) == (cfg.n_r + 1) * cfg.fiber_dim
    assert len(minus) == cfg.n_r * cfg.fiber_dim
