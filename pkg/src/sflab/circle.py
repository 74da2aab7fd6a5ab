"""Truncated boundary Dirac operators on the circle and their gauge conjugates.

The model operator on one boundary circle is

    B = sigma * (-i d/dtheta (x) I_N + A (x) I_N)

acting on C^{k*N}-valued functions, truncated to Fourier modes |m| <= M. The
fiber C^k carries the constant Hermitian connection A and the boundary
endomorphism F; the gauge g acts on the C^N factor only. In mode space the
operator is block diagonal with m-block sigma * (m*I + A (x) I_N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import BasisLabel, HermitianOperator, OperatorPath, linear_path, block_diag_path
from .errors import InvalidTruncation, NearSingularF, TruncationTooTight
from .gauges import TrigPolyGauge

F_SINGULAR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BoundaryEndomorphism:
    """Invertible Hermitian k x k matrix F defining a local boundary condition
    and the eigenbundle splitting E = E+ (+) E-."""

    matrix: np.ndarray
    component_id: str = "Z0"

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("F must be square")
        res = np.max(np.abs(m - m.conj().T))
        if res > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError(f"F is not Hermitian (residual {res:.2e})")
        eigs = np.linalg.eigvalsh(m)
        if np.min(np.abs(eigs)) < F_SINGULAR_TOL:
            raise NearSingularF(
                f"min |eig(F)| = {np.min(np.abs(eigs)):.2e} < {F_SINGULAR_TOL:.0e}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class FSplit:
    """Orthogonal projectors onto the positive/negative eigenbundles of F."""

    proj_plus: np.ndarray
    proj_minus: np.ndarray
    k_plus: int
    k_minus: int
    basis_plus: np.ndarray   # k x k_plus orthonormal columns spanning E+
    basis_minus: np.ndarray  # k x k_minus


def split_by_F(f: BoundaryEndomorphism) -> FSplit:
    """Eigenbundle splitting of an invertible Hermitian F.

    proj_plus + proj_minus = I; F is positive definite on range(proj_plus) and
    negative definite on range(proj_minus).
    """
    vals, vecs = np.linalg.eigh(f.matrix)
    pos = vals > 0
    vp, vm = vecs[:, pos], vecs[:, ~pos]
    return FSplit(
        proj_plus=vp @ vp.conj().T,
        proj_minus=vm @ vm.conj().T,
        k_plus=int(pos.sum()),
        k_minus=int((~pos).sum()),
        basis_plus=vp,
        basis_minus=vm,
    )


def f_tilde(f: BoundaryEndomorphism) -> np.ndarray:
    """The unitary-flattened endomorphism: +id on E+, -id on E-; squares to I."""
    s = split_by_F(f)
    return s.proj_plus - s.proj_minus


@dataclass(frozen=True, eq=False)
class BoundaryComponentSpec:
    """One boundary circle: orientation sign, constant connection, boundary
    endomorphism, and the gauge restricted to it.

    sigma = +1 on the reference component (the r=0 end of a cylinder), -1 when
    the inward normal convention is reversed (the r=L end).
    """

    sigma: int
    connection: np.ndarray
    f: BoundaryEndomorphism
    gauge: TrigPolyGauge

    def __post_init__(self):
        if self.sigma not in (+1, -1):
            raise ValueError("sigma must be +1 or -1")
        a = np.ascontiguousarray(self.connection, dtype=complex)
        if a.shape != (self.f.k, self.f.k):
            raise ValueError("connection and F sizes differ")
        if np.max(np.abs(a - a.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(a))):
            raise ValueError("connection must be Hermitian")
        a.setflags(write=False)
        object.__setattr__(self, "connection", a)


@dataclass(frozen=True, eq=False)
class CircleOperator(HermitianOperator):
    """Truncated circle operator remembering its analytic mode structure.

    The metadata lets gauge conjugation extend the block-diagonal operator
    beyond the mode window exactly (mode-m block is sigma*(m*I + A (x) I_N)
    for every integer m).
    """

    k: int = 1
    gauge_size: int = 1
    modes: int = 1
    connection: np.ndarray = None  # type: ignore[assignment]
    sigma: int = +1

    def mode_block(self, m: int) -> np.ndarray:
        """Analytic m-block, valid for any integer m (also outside the window)."""
        kn = self.k * self.gauge_size
        return self.sigma * (
            m * np.eye(kn) + np.kron(self.connection, np.eye(self.gauge_size))
        )


def _circle_labels(k: int, gauge_size: int, modes: int) -> tuple[BasisLabel, ...]:
    return tuple(
        BasisLabel(mode=m, fiber=j)
        for m in range(-modes, modes + 1)
        for j in range(k * gauge_size)
    )


def build_circle_operator(
    k: int,
    gauge_size: int,
    modes: int,
    connection: np.ndarray | float,
    sigma: int = +1,
) -> CircleOperator:
    """Truncated boundary operator sigma*(-i d/dtheta + A) on modes |m| <= modes.

    ``connection`` is the constant Hermitian k x k twist A (a scalar is
    promoted to a*I_k). Labels carry (mode, fiber) with fiber = e*N + n for
    E-index e and gauge index n.
    """
    if modes < 1:
        raise InvalidTruncation(f"mode truncation M={modes} must be >= 1")
    if sigma not in (+1, -1):
        raise ValueError("sigma must be +1 or -1")
    a = np.asarray(connection, dtype=complex)
    if a.ndim == 0:
        a = complex(a) * np.eye(k)
    if a.shape != (k, k):
        raise ValueError(f"connection shape {a.shape} does not match k={k}")
    if np.max(np.abs(a - a.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(a))):
        raise ValueError("connection must be Hermitian")
    kn = k * gauge_size
    lifted = np.kron(a, np.eye(gauge_size))
    dim = (2 * modes + 1) * kn
    entries = np.zeros((dim, dim), dtype=complex)
    for i, m in enumerate(range(-modes, modes + 1)):
        entries[i * kn : (i + 1) * kn, i * kn : (i + 1) * kn] = sigma * (
            m * np.eye(kn) + lifted
        )
    return CircleOperator(
        entries=entries,
        labels=_circle_labels(k, gauge_size, modes),
        k=k,
        gauge_size=gauge_size,
        modes=modes,
        connection=a,
        sigma=sigma,
    )


def _lifted_coeff(g: TrigPolyGauge, m: int, k: int) -> np.ndarray:
    """Gauge Fourier coefficient lifted to the k*N fiber (acts on C^N only)."""
    return np.kron(np.eye(k), g.coeff(m))


def check_margin(b: CircleOperator, g: TrigPolyGauge) -> int:
    """Edge buffer M - degree(g); requires M >= degree + 2."""
    if g.size != b.gauge_size:
        raise ValueError(f"gauge size {g.size} does not match operator N={b.gauge_size}")
    margin = b.modes - g.degree
    if margin < 2:
        raise TruncationTooTight(
            f"mode window M={b.modes} too tight for gauge degree {g.degree} (need M >= degree+2)"
        )
    return margin


def gauge_conjugate(b: CircleOperator, g: TrigPolyGauge) -> CircleOperator:
    """Compression of g B g^{-1} to the mode window, by Fourier convolution.

    Exact: the (m, m') block is sum_j ghat(m-j) B_j ghat(m'-j)†, with the
    analytic blocks B_j supplied by the operator's metadata for |j| <= M+d.
    The result is Hermitian and differs from B by a banded matrix of
    bandwidth <= 2*degree(g).
    """
    check_margin(b, g)
    kn = b.k * b.gauge_size
    d = g.degree
    lifted = {m: _lifted_coeff(g, m, b.k) for m in range(-d, d + 1)}
    blocks = {j: b.mode_block(j) for j in range(-b.modes - d, b.modes + d + 1)}
    dim = b.dim
    entries = np.zeros((dim, dim), dtype=complex)
    window = range(-b.modes, b.modes + 1)
    for i, m in enumerate(window):
        for ip, mp in enumerate(window):
            if abs(m - mp) > 2 * d:
                continue
            lo, hi = max(m, mp) - d, min(m, mp) + d
            acc = np.zeros((kn, kn), dtype=complex)
            for j in range(lo, hi + 1):
                acc += lifted[m - j] @ blocks[j] @ lifted[mp - j].conj().T
            entries[i * kn : (i + 1) * kn, ip * kn : (ip + 1) * kn] = acc
    entries = 0.5 * (entries + entries.conj().T)
    return CircleOperator(
        entries=entries,
        labels=b.labels,
        k=b.k,
        gauge_size=b.gauge_size,
        modes=b.modes,
        connection=b.connection,
        sigma=b.sigma,
    )


def conjugation_path(b: CircleOperator, g: TrigPolyGauge, **policy) -> OperatorPath:
    """u -> (1-u) B + u gBg^{-1}, the curve whose flow the suite measures."""
    return linear_path(b, gauge_conjugate(b, g), **policy)


def exact_circle_flow(windings: Sequence[int], sigma: int = +1) -> int:
    """Analytic flow oracle for the circle conjugation path.

    Per fiber line with winding n, eigenvalue ladders move as
    sigma*(m + a - u*n); with the convention flow = neg(start) - neg(end) the
    line contributes -sigma*n, so the total is -sigma * sum(windings).
    """
    if sigma not in (+1, -1):
        raise ValueError("sigma must be +1 or -1")
    return -sigma * int(sum(int(n) for n in windings))


def component_operator(
    spec: BoundaryComponentSpec,
    modes: int,
    subbundle: str = "full",
) -> CircleOperator:
    """Circle operator of one boundary component twisted by E+, E-, or all of E.

    For the split cases the connection is compressed to the eigenbundle
    (basis† A basis), matching the projected connection convention.
    """
    if subbundle == "full":
        a_sub = spec.connection
        k_sub = spec.f.k
    else:
        s = split_by_F(spec.f)
        basis = s.basis_plus if subbundle == "plus" else s.basis_minus
        k_sub = basis.shape[1]
        if k_sub == 0:
            raise ValueError(f"E_{subbundle} of component {spec.f.component_id} has rank 0")
        a_sub = basis.conj().T @ spec.connection @ basis
        a_sub = 0.5 * (a_sub + a_sub.conj().T)
    return build_circle_operator(
        k=k_sub,
        gauge_size=spec.gauge.size,
        modes=modes,
        connection=a_sub,
        sigma=spec.sigma,
    )


def subbundle_rank(spec: BoundaryComponentSpec, subbundle: str) -> int:
    if subbundle == "full":
        return spec.f.k
    s = split_by_F(spec.f)
    return s.k_plus if subbundle == "plus" else s.k_minus


def boundary_family_path(
    components: Sequence[BoundaryComponentSpec],
    modes: int,
    subbundle: str = "full",
    **policy,
) -> OperatorPath:
    """Conjugation path of the boundary operator family over all components,
    twisted by the chosen sub-bundle; block diagonal, flows add.

    Components with a rank-0 sub-bundle contribute nothing and are skipped.
    """
    paths = []
    fiber_offsets = []
    offset = 0
    for spec in components:
        rank = subbundle_rank(spec, subbundle)
        if rank == 0:
            continue
        b = component_operator(spec, modes, subbundle)
        paths.append(conjugation_path(b, spec.gauge, **policy))
        fiber_offsets.append(offset)
        offset += rank * spec.gauge.size
    if not paths:
        raise ValueError("boundary family is empty (all sub-bundles rank 0)")
    if len(paths) == 1:
        return paths[0]

    def relabel(i: int, lab: BasisLabel) -> BasisLabel:
        return BasisLabel(mode=lab.mode, fiber=lab.fiber + fiber_offsets[i])

    return block_diag_path(paths, relabel)
