"""Spectral flow of operator paths, crossing censuses, spectral projections,
relative indices, and the Toeplitz-index comparison.

Counting convention (fixed once, calibrated against the circle oracle):

    flow = neg_count(u=0) - neg_count(u=1),  zero counted nonnegative.

The crossing census tracks sorted eigenvalue branches inside a window
[-w, w] with adaptive bisection; counting stays authoritative, and a
disagreement raises a flag on the result rather than an exception.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    DEFAULT_ZERO_TOL,
    HermitianOperator,
    OperatorPath,
    Spectrum,
    eig_decomposition,
    eig_spectrum,
    sign_counts,
    worker_count,
)
from .circle import CircleOperator, check_margin, _lifted_coeff
from .errors import (
    CrossCheckFailed,
    CutoffOnEigenvalue,
    InvalidProjection,
    RefinementExhausted,
    WindowNotCalibrated,
)
from .gauges import TrigPolyGauge

CUTOFF_CLEARANCE = 1e-8
PROJECTOR_TOL = 1e-10
CALIBRATION_TOL = 1e-3
DEFAULT_WINDOW = 0.5


@dataclass(frozen=True)
class Crossing:
    """One tracked zero crossing: interval, direction (+1 upward), branch index."""

    u_lo: float
    u_hi: float
    direction: int
    branch: int


@dataclass(frozen=True, eq=False)
class SpectralFlowResult:
    flow: int
    partition: tuple[float, ...]
    crossings: tuple[Crossing, ...]
    endpoint_kernel: tuple[int, int]
    min_gap: float
    census_flow: int
    census_consistent: bool
    warnings: tuple[str, ...]
    samples: tuple[tuple[float, np.ndarray], ...]

    @property
    def flagged(self) -> bool:
        return not self.census_consistent


def _nonneg(values: np.ndarray, zero_tol: float) -> np.ndarray:
    """Sign convention mask: True where an eigenvalue counts nonnegative."""
    return values >= -zero_tol


def _eval_many(path: OperatorPath, us: Sequence[float], cache: dict, workers: int) -> None:
    todo = [u for u in us if u not in cache]
    if not todo:
        return
    if workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for u, spec in zip(todo, pool.map(lambda v: eig_spectrum(path.at(v)), todo)):
                cache[u] = spec.values
    else:
        for u in todo:
            cache[u] = eig_spectrum(path.at(u)).values


def spectral_flow(
    path: OperatorPath,
    zero_tol: float = DEFAULT_ZERO_TOL,
    window: float = DEFAULT_WINDOW,
    workers: Optional[int] = None,
) -> SpectralFlowResult:
    """Spectral flow of a path with crossing census and diagnostics.

    Counting (endpoint negative-eigenvalue difference) is authoritative; the
    census must reproduce it or the result carries an InconsistentCensus
    warning. Raises RefinementExhausted if bisection hits the sample cap with
    an interval still moving more than window/4 near zero.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    workers = worker_count() if workers is None else max(1, workers)
    cache: dict[float, np.ndarray] = {}
    grid = sorted(set(np.linspace(0.0, 1.0, max(2, path.initial_samples)).tolist()))
    _eval_many(path, grid, cache, workers)

    def needs_refinement(a: float, b: float) -> bool:
        va, vb = cache[a], cache[b]
        near = (np.abs(va) <= window) | (np.abs(vb) <= window)
        if near.any():
            move = float(np.max(np.abs(va[near] - vb[near])))
            if move >= window / 4.0:
                return True
        na = int(np.count_nonzero(~_nonneg(va, zero_tol)))
        nb = int(np.count_nonzero(~_nonneg(vb, zero_tol)))
        return abs(nb - na) > int(near.sum())

    while True:
        splits = [
            0.5 * (a + b)
            for a, b in zip(grid[:-1], grid[1:])
            if needs_refinement(a, b)
        ]
        if not splits:
            break
        if len(grid) + len(splits) > path.max_samples:
            raise RefinementExhausted(
                f"census needs more than {path.max_samples} samples "
                f"(ill-conditioned crossing or too-small window {window})"
            )
        _eval_many(path, splits, cache, workers)
        grid = sorted(set(grid) | set(splits))

    values0, values1 = cache[grid[0]], cache[grid[-1]]
    counts0 = sign_counts(Spectrum(values0), zero_tol)
    counts1 = sign_counts(Spectrum(values1), zero_tol)
    flow = counts0.negative - counts1.negative

    crossings: list[Crossing] = []
    for a, b in zip(grid[:-1], grid[1:]):
        va, vb = cache[a], cache[b]
        flips = np.nonzero(_nonneg(va, zero_tol) != _nonneg(vb, zero_tol))[0]
        for i in flips:
            crossings.append(
                Crossing(
                    u_lo=a,
                    u_hi=b,
                    direction=+1 if _nonneg(vb[i : i + 1], zero_tol)[0] else -1,
                    branch=int(i),
                )
            )
    census_flow = sum(c.direction for c in crossings)
    warnings_list: list[str] = []
    if census_flow != flow:
        warnings_list.append(
            f"InconsistentCensus: census sum {census_flow} != counted flow {flow}; counting wins"
        )
    if counts0.near_zero:
        warnings_list.append(f"near-kernel at u=0: {counts0.near_zero} eigenvalue(s)")
    if counts1.near_zero:
        warnings_list.append(f"near-kernel at u=1: {counts1.near_zero} eigenvalue(s)")

    crossing_branches = {
        (idx, c.branch)
        for c in crossings
        for idx, u in enumerate(grid)
        if c.u_lo <= u <= c.u_hi
    }
    min_gap = float("inf")
    for idx, u in enumerate(grid):
        vals = cache[u]
        keep = [
            abs(vals[i]) for i in range(len(vals)) if (idx, i) not in crossing_branches
        ]
        if keep:
            min_gap = min(min_gap, min(keep))

    return SpectralFlowResult(
        flow=int(flow),
        partition=tuple(grid),
        crossings=tuple(crossings),
        endpoint_kernel=(counts0.near_zero, counts1.near_zero),
        min_gap=min_gap,
        census_flow=int(census_flow),
        census_consistent=census_flow == flow,
        warnings=tuple(warnings_list),
        samples=tuple((u, cache[u]) for u in grid),
    )


def crossing_census(
    path: OperatorPath,
    window: float = DEFAULT_WINDOW,
    zero_tol: float = DEFAULT_ZERO_TOL,
    workers: Optional[int] = None,
) -> tuple[Crossing, ...]:
    """Zero crossings of tracked branches inside [-window, window]."""
    return spectral_flow(path, zero_tol=zero_tol, window=window, workers=workers).crossings


def spectral_projection(op: HermitianOperator | np.ndarray, cutoff: float) -> np.ndarray:
    """Orthogonal projector onto eigenspaces with eigenvalue >= cutoff.

    The finite-dimensional stand-in for a spectral section; the cutoff must
    clear the spectrum by 1e-8.
    """
    vals, vecs = eig_decomposition(op)
    if np.min(np.abs(vals - cutoff)) < CUTOFF_CLEARANCE:
        raise CutoffOnEigenvalue(
            f"cutoff {cutoff} within {CUTOFF_CLEARANCE:.0e} of an eigenvalue"
        )
    sel = vecs[:, vals >= cutoff]
    return sel @ sel.conj().T


def conjugated_projection(b: CircleOperator, g: TrigPolyGauge, cutoff: float) -> np.ndarray:
    """Compression of g P g^{-1} to the mode window, P the spectral projector
    of the analytic operator at ``cutoff``.

    Computed by exact Fourier convolution with analytically extended mode
    blocks; validated as an honest projector (idempotency can fail for
    gauges mixing fiber lines across the cutoff near the window edge).
    """
    check_margin(b, g)
    kn = b.k * b.gauge_size
    d = g.degree
    lifted = {m: _lifted_coeff(g, m, b.k) for m in range(-d, d + 1)}
    proj: dict[int, np.ndarray] = {}
    for j in range(-b.modes - d, b.modes + d + 1):
        vals, vecs = np.linalg.eigh(b.mode_block(j))
        if np.min(np.abs(vals - cutoff)) < CUTOFF_CLEARANCE:
            raise CutoffOnEigenvalue(f"cutoff {cutoff} on an eigenvalue of mode block {j}")
        sel = vecs[:, vals >= cutoff]
        proj[j] = sel @ sel.conj().T
    dim = b.dim
    q = np.zeros((dim, dim), dtype=complex)
    window = range(-b.modes, b.modes + 1)
    for i, m in enumerate(window):
        for ip, mp in enumerate(window):
            if abs(m - mp) > 2 * d:
                continue
            lo, hi = max(m, mp) - d, min(m, mp) + d
            acc = np.zeros((kn, kn), dtype=complex)
            for j in range(lo, hi + 1):
                acc += lifted[m - j] @ proj[j] @ lifted[mp - j].conj().T
            q[i * kn : (i + 1) * kn, ip * kn : (ip + 1) * kn] = acc
    q = 0.5 * (q + q.conj().T)
    _validate_projector(q, "compressed conjugated projection")
    return q


def _validate_projector(p: np.ndarray, what: str) -> None:
    herm = float(np.max(np.abs(p - p.conj().T)))
    idem = float(np.max(np.abs(p @ p - p)))
    if herm > PROJECTOR_TOL or idem > PROJECTOR_TOL:
        raise InvalidProjection(
            f"{what}: hermiticity {herm:.2e}, idempotency {idem:.2e} exceed {PROJECTOR_TOL:.0e}"
        )


def _rank(p: np.ndarray, what: str) -> int:
    tr = complex(np.trace(p))
    r = round(tr.real)
    if abs(tr - r) > 1e-8:
        raise InvalidProjection(f"{what}: trace {tr} is not near an integer")
    return int(r)


@dataclass(frozen=True, eq=False)
class ProjectionPair:
    """Two orthogonal projections on a common space with a calibrated
    spectral window.

    ``calibration`` holds the spectra of the two generating operators; the
    relative index is meaningful only when neither has an eigenvalue within
    1e-3 of +-window (the window edge sits in a common spectral gap).
    """

    p: np.ndarray
    q: np.ndarray
    window: float
    calibration: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        p = np.ascontiguousarray(self.p, dtype=complex)
        q = np.ascontiguousarray(self.q, dtype=complex)
        if p.shape != q.shape or p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("projections must be square matrices of equal shape")
        _validate_projector(p, "P")
        _validate_projector(q, "Q")
        p.setflags(write=False)
        q.setflags(write=False)
        cal = tuple(np.asarray(c, dtype=float) for c in self.calibration)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "calibration", cal)


def relative_index(pair: ProjectionPair) -> int:
    """The relative index [Q - P] = ind(PQ: im Q -> im P) = rank Q - rank P.

    Cross-checked against kernel/cokernel dimensions from a rank-revealing
    factorization; requires the window calibration certificate.
    """
    lam = pair.window
    for which, spec in zip(("first", "second"), pair.calibration):
        for edge in (+lam, -lam):
            if spec.size and np.min(np.abs(spec - edge)) < CALIBRATION_TOL:
                raise WindowNotCalibrated(
                    f"{which} generating operator has an eigenvalue within "
                    f"{CALIBRATION_TOL:.0e} of window edge {edge}"
                )
    rank_p = _rank(pair.p, "P")
    rank_q = _rank(pair.q, "Q")
    primary = rank_q - rank_p

    vals_p, vecs_p = np.linalg.eigh(pair.p)
    vals_q, vecs_q = np.linalg.eigh(pair.q)
    basis_p = vecs_p[:, vals_p > 0.5]
    basis_q = vecs_q[:, vals_q > 0.5]
    t = basis_p.conj().T @ basis_q
    r = int(np.linalg.matrix_rank(t, tol=1e-8))
    kernel = rank_q - r
    cokernel = rank_p - r
    if kernel - cokernel != primary:  # pragma: no cover - arithmetic identity
        raise CrossCheckFailed(
            f"rank difference {primary} != ker-coker {kernel - cokernel}"
        )
    return primary


def toeplitz_index(g: TrigPolyGauge) -> int:
    """Index of the Toeplitz operator with symbol g: minus the winding of det g.

    The suite cross-checks this against relative_index(P, gPg^{-1}) and the
    conjugation-path flow (EXP7).
    """
    from .chern import winding_number

    return -winding_number(g)
