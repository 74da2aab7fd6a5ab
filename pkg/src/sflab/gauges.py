"""Unitary-valued trigonometric polynomial gauge symbols on the circle.

A gauge is g(theta) = sum_m ghat(m) e^{i m theta} with N x N matrix Fourier
coefficients supported on |m| <= degree. Construction validates unitarity at
256 equispaced sample points to 1e-9 and nonvanishing of det g there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import jv

from .errors import InvalidGauge

UNITARITY_SAMPLES = 256
UNITARITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TrigPolyGauge:
    """Trigonometric polynomial g: S^1 -> U(N), stored by Fourier coefficients.

    ``freqs`` lists the frequencies carrying a nonzero coefficient, ascending;
    ``matrices[i]`` is the N x N coefficient of e^{i freqs[i] theta}.
    """

    size: int
    freqs: tuple[int, ...]
    matrices: np.ndarray

    def __post_init__(self):
        mats = np.ascontiguousarray(self.matrices, dtype=complex)
        freqs = tuple(int(f) for f in self.freqs)
        if sorted(set(freqs)) != list(freqs):
            raise ValueError("frequencies must be strictly ascending and unique")
        if mats.shape != (len(freqs), self.size, self.size):
            raise ValueError(f"coefficient array shape {mats.shape} inconsistent")
        mats.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "matrices", mats)
        self._validate()

    def _validate(self) -> None:
        theta = np.linspace(0.0, 2.0 * np.pi, UNITARITY_SAMPLES, endpoint=False)
        vals = self.evaluate(theta)
        eye = np.eye(self.size)
        dev = np.abs(vals @ vals.conj().transpose(0, 2, 1) - eye).max()
        if dev > UNITARITY_TOL:
            raise InvalidGauge(f"gauge deviates from unitarity by {dev:.3e} at samples")
        dets = np.linalg.det(vals)
        if np.min(np.abs(dets)) == 0.0:
            raise InvalidGauge("det g vanishes at a sample point")

    @property
    def degree(self) -> int:
        return max(abs(f) for f in self.freqs) if self.freqs else 0

    def coeff(self, m: int) -> np.ndarray:
        """Fourier coefficient ghat(m) (zero matrix if absent)."""
        try:
            i = self.freqs.index(m)
        except ValueError:
            return np.zeros((self.size, self.size), dtype=complex)
        return self.matrices[i]

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        """g at each angle; returns shape (len(theta), N, N)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phases = np.exp(1j * np.outer(theta, self.freqs))
        return np.einsum("sf,fij->sij", phases, self.matrices)

    def derivative(self, theta: np.ndarray) -> np.ndarray:
        """dg/dtheta at each angle."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phases = np.exp(1j * np.outer(theta, self.freqs)) * (1j * np.asarray(self.freqs))
        return np.einsum("sf,fij->sij", phases, self.matrices)

    def inverse(self) -> "TrigPolyGauge":
        """Pointwise inverse g^{-1} = g†; again a trig polynomial of the same degree."""
        freqs = tuple(-f for f in reversed(self.freqs))
        mats = np.array([m.conj().T for m in self.matrices[::-1]])
        return TrigPolyGauge(self.size, freqs, mats)

    def product(self, other: "TrigPolyGauge") -> "TrigPolyGauge":
        """Pointwise product (self * other)(theta); coefficients convolve."""
        if other.size != self.size:
            raise ValueError("gauge sizes differ")
        acc: dict[int, np.ndarray] = {}
        for fa, ma in zip(self.freqs, self.matrices):
            for fb, mb in zip(other.freqs, other.matrices):
                acc[fa + fb] = acc.get(fa + fb, 0) + ma @ mb
        return from_coeffs(self.size, acc)


def from_coeffs(size: int, coeffs: Mapping[int, np.ndarray]) -> TrigPolyGauge:
    """Build a gauge from a frequency -> matrix mapping, dropping negligible terms."""
    items = [(int(f), np.asarray(m, dtype=complex)) for f, m in coeffs.items()]
    items = [(f, m) for f, m in items if np.max(np.abs(m)) > 1e-15]
    items.sort(key=lambda fm: fm[0])
    if not items:
        raise InvalidGauge("all coefficients are zero")
    freqs = tuple(f for f, _ in items)
    mats = np.array([m for _, m in items])
    return TrigPolyGauge(size, freqs, mats)


def identity_gauge(size: int = 1) -> TrigPolyGauge:
    return from_coeffs(size, {0: np.eye(size)})


def scalar_winding(winding: int, size: int = 1) -> TrigPolyGauge:
    """g(theta) = e^{i*winding*theta} * I_size."""
    return from_coeffs(size, {int(winding): np.eye(size)})


def diagonal_windings(windings: Sequence[int]) -> TrigPolyGauge:
    """g(theta) = diag(e^{i n_1 theta}, ..., e^{i n_N theta})."""
    windings = [int(n) for n in windings]
    size = len(windings)
    coeffs: dict[int, np.ndarray] = {}
    for j, n in enumerate(windings):
        c = coeffs.setdefault(n, np.zeros((size, size), dtype=complex))
        c[j, j] = 1.0
    return from_coeffs(size, coeffs)


def phase_modulated(base_winding: int, amplitude: float, coeff_floor: float = 1e-13) -> TrigPolyGauge:
    """g(theta) = e^{i*base_winding*theta} * e^{i*amplitude*sin(theta)} as a scalar gauge.

    Uses the Bessel expansion e^{iz sin t} = sum_n J_n(z) e^{int}, truncated
    where |J_n| drops below ``coeff_floor``; the unitarity check guards the
    truncation.
    """
    if amplitude == 0.0:
        return scalar_winding(base_winding)
    d = 1
    while abs(jv(d, amplitude)) > coeff_floor or d < 2:
        d += 1
    coeffs = {}
    for n in range(-d, d + 1):
        c = jv(n, amplitude)
        if abs(c) > coeff_floor:
            coeffs[n + int(base_winding)] = np.array([[c]], dtype=complex)
    return from_coeffs(1, coeffs)
