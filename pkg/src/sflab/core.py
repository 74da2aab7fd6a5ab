"""Shared numerical substrate: labeled Hermitian matrices, spectra, signed counts.

Everything downstream (circle and cylinder operators, the flow engine) is built
on three conventions fixed here:

* an operator is Hermitian iff ``max|H - H†| <= 1e-10 * max(1, max|H|)``;
* eigenvalues within ``zero_tol`` of zero count as nonnegative;
* a path of operators has constant dimension and constant basis labels.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import ConvergenceFailure, NonHermitianInput

HERMITICITY_RTOL = 1e-10
DEFAULT_ZERO_TOL = 1e-8


@dataclass(frozen=True)
class BasisLabel:
    """Identity of one basis vector: Fourier mode, fiber component, and (for
    cylinder operators) radial node and spinor half.

    ``node`` indexes primal nodes for the plus spinor and radial cells for the
    minus spinor; both are None for pure boundary operators.
    """

    mode: int
    fiber: int
    node: Optional[int] = None
    spinor: Optional[str] = None  # "plus" | "minus" | None


def hermiticity_residual(entries: np.ndarray) -> float:
    """Max-norm of H - H†, the numerical witness of self-adjointness."""
    entries = np.asarray(entries)
    return float(np.max(np.abs(entries - entries.conj().T))) if entries.size else 0.0


def _check_hermitian(entries: np.ndarray) -> None:
    res = hermiticity_residual(entries)
    scale = max(1.0, float(np.max(np.abs(entries))) if entries.size else 0.0)
    if res > HERMITICITY_RTOL * scale:
        raise NonHermitianInput(
            f"hermiticity residual {res:.3e} exceeds {HERMITICITY_RTOL:.0e} * {scale:.3e}"
        )


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A finite Hermitian matrix with a labeled basis.

    Immutable after construction; the entry array is marked read-only so
    instances can be shared freely across concurrent workers.
    """

    entries: np.ndarray
    labels: tuple[BasisLabel, ...]

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {entries.shape}")
        labels = tuple(self.labels)
        if len(labels) != entries.shape[0]:
            raise ValueError(
                f"{entries.shape[0]}-dim operator carries {len(labels)} labels"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels are not unique")
        _check_hermitian(entries)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """All eigenvalues of one Hermitian operator, sorted ascending with
    multiplicity."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(values) < 0):
            raise ValueError("spectrum values must be nondecreasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return len(self.values)

    def min_abs(self) -> float:
        return float(np.min(np.abs(self.values))) if self.dim else float("inf")


def eig_spectrum(op: HermitianOperator | np.ndarray) -> Spectrum:
    """All eigenvalues of a Hermitian operator, sorted ascending.

    Raises NonHermitianInput if the input violates the Hermiticity invariant
    and ConvergenceFailure if LAPACK does not converge.
    """
    if isinstance(op, HermitianOperator):
        entries = op.entries
    else:
        entries = np.asarray(op, dtype=complex)
        _check_hermitian(entries)
    try:
        values = np.linalg.eigvalsh(entries)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise ConvergenceFailure(str(exc)) from exc
    return Spectrum(values)


def eig_decomposition(op: HermitianOperator | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""
    entries = op.entries if isinstance(op, HermitianOperator) else np.asarray(op, dtype=complex)
    _check_hermitian(entries)
    try:
        values, vectors = np.linalg.eigh(entries)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    return values, vectors


@dataclass(frozen=True)
class SignCounts:
    """Partition of a spectrum at tolerance ``zero_tol``: strictly below
    -zero_tol, within [-zero_tol, zero_tol], strictly above zero_tol."""

    negative: int
    near_zero: int
    positive: int

    @property
    def total(self) -> int:
        return self.negative + self.near_zero + self.positive


def sign_counts(spectrum: Spectrum, zero_tol: float = DEFAULT_ZERO_TOL) -> SignCounts:
    if zero_tol < 0:
        raise ValueError("zero_tol must be >= 0")
    v = spectrum.values
    neg = int(np.count_nonzero(v < -zero_tol))
    pos = int(np.count_nonzero(v > zero_tol))
    return SignCounts(negative=neg, near_zero=len(v) - neg - pos, positive=pos)


def neg_count(spectrum: Spectrum, zero_tol: float = DEFAULT_ZERO_TOL) -> int:
    """Number of eigenvalues strictly below -zero_tol.

    Eigenvalues in [-zero_tol, zero_tol] count as nonnegative; use
    sign_counts() to see the near-kernel bucket separately.
    """
    return sign_counts(spectrum, zero_tol).negative


@dataclass(frozen=True, eq=False)
class OperatorPath:
    """Map u in [0, 1] -> HermitianOperator of fixed dimension and labels.

    ``lipschitz`` bounds the entrywise (hence eigenvalue) movement per unit u
    and is used by the flow engine to sanity-check refinement. Sampling policy
    defaults: 17 initial samples, refinement capped at 1024 total.
    """

    evaluate: Callable[[float], HermitianOperator]
    dim: int
    labels: tuple[BasisLabel, ...]
    lipschitz: Optional[float] = None
    initial_samples: int = 17
    max_samples: int = 1024

    def at(self, u: float) -> HermitianOperator:
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"path parameter u={u} outside [0, 1]")
        op = self.evaluate(u)
        if op.dim != self.dim or op.labels != self.labels:
            raise ValueError("path evaluation changed dimension or labels")
        return op


def linear_path(
    start: HermitianOperator,
    end: HermitianOperator,
    initial_samples: int = 17,
    max_samples: int = 1024,
) -> OperatorPath:
    """The segment u -> (1-u)*start + u*end.

    Lipschitz bound is the Frobenius norm of (end - start), which dominates
    the spectral norm and hence the eigenvalue speed.
    """
    if start.labels != end.labels:
        raise ValueError("path endpoints must share labels")
    h0, h1 = start.entries, end.entries
    lip = float(np.linalg.norm(h1 - h0))

    def evaluate(u: float) -> HermitianOperator:
        return HermitianOperator((1.0 - u) * h0 + u * h1, start.labels)

    return OperatorPath(
        evaluate=evaluate,
        dim=start.dim,
        labels=start.labels,
        lipschitz=lip,
        initial_samples=initial_samples,
        max_samples=max_samples,
    )


def block_diag_path(paths: Sequence[OperatorPath], relabel: Callable[[int, BasisLabel], BasisLabel]) -> OperatorPath:
    """Direct sum of paths over a common parameter.

    ``relabel(i, label)`` must make labels unique across blocks (e.g. by
    offsetting fiber indices per block).
    """
    paths = list(paths)
    if not paths:
        raise ValueError("need at least one path")
    labels = tuple(relabel(i, lab) for i, p in enumerate(paths) for lab in p.labels)
    if len(set(labels)) != len(labels):
        raise ValueError("relabeling did not produce unique labels")
    dim = sum(p.dim for p in paths)
    lips = [p.lipschitz for p in paths]
    lip = None if any(l is None for l in lips) else float(np.sqrt(sum(l * l for l in lips)))

    def evaluate(u: float) -> HermitianOperator:
        blocks = [p.at(u).entries for p in paths]
        out = np.zeros((dim, dim), dtype=complex)
        at = 0
        for b in blocks:
            out[at : at + b.shape[0], at : at + b.shape[0]] = b
            at += b.shape[0]
        return HermitianOperator(out, labels)

    return OperatorPath(
        evaluate=evaluate,
        dim=dim,
        labels=labels,
        lipschitz=lip,
        initial_samples=max(p.initial_samples for p in paths),
        max_samples=max(p.max_samples for p in paths),
    )


def worker_count() -> int:
    """Worker count for concurrent path evaluation, from SFLAB_WORKERS (default 1)."""
    raw = os.environ.get("SFLAB_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
