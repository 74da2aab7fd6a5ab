"""Boundary-side invariants: winding numbers, the degree-1 odd Chern integral,
and the two rank-weighted winding sums forming the right-hand side of the
flow formula on a 1-dimensional boundary.

On the circle the A-hat form is 1 and the Chern character of a flat bundle
contributes only its rank, so the formula right-hand side reduces to

    rhs_plus  = - sum_c sigma_c * k_plus(c)  * winding(det g_c)
    rhs_minus = + sum_c sigma_c * k_minus(c) * winding(det g_c)

which agree exactly when the cobordism sum  sum_c sigma_c * k(c) * w_c
vanishes (gauges pulled back from the interior).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circle import BoundaryComponentSpec, split_by_F
from .errors import PhaseJumpTooLarge, WindingNotInteger
from .gauges import TrigPolyGauge

WINDING_SAMPLES = 256
WINDING_INT_TOL = 1e-6
PHASE_JUMP_LIMIT = np.pi / 2
CHERN_MATCH_TOL = 1e-9


def winding_number(g: TrigPolyGauge, samples: int = WINDING_SAMPLES) -> int:
    """Degree of det g: S^1 -> U(1), by phase unwrapping on equispaced samples.

    Raises PhaseJumpTooLarge when adjacent samples differ in phase by pi/2 or
    more (increase ``samples``), and WindingNotInteger if the total phase does
    not close up to an integer multiple of 2*pi within 1e-6.
    """
    if samples < 256:
        raise ValueError("need at least 256 samples")
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    dets = np.linalg.det(g.evaluate(theta))
    if np.min(np.abs(dets)) < 1e-12:
        raise WindingNotInteger("det g vanishes at a sample")
    steps = np.angle(np.roll(dets, -1) / dets)
    if np.max(np.abs(steps)) >= PHASE_JUMP_LIMIT:
        raise PhaseJumpTooLarge(
            f"adjacent phase step {np.max(np.abs(steps)):.3f} >= pi/2; increase samples"
        )
    total = float(np.sum(steps)) / (2.0 * np.pi)
    nearest = round(total)
    if abs(total - nearest) > WINDING_INT_TOL:
        raise WindingNotInteger(f"total phase / 2pi = {total} not an integer")
    return int(nearest)


def odd_chern_degree1_integral(g: TrigPolyGauge, samples: int = WINDING_SAMPLES) -> float:
    """(1/2*pi*i) * contour integral of tr(g^{-1} dg); equals winding(det g).

    The integrand of a trig-polynomial gauge is itself a trig polynomial, so
    the equispaced trapezoid sum is exact up to roundoff once samples exceed
    twice the degree.
    """
    if samples <= 4 * g.degree + 1:
        samples = 4 * g.degree + 2
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    vals = g.evaluate(theta)
    derivs = g.derivative(theta)
    integrand = np.einsum("sij,sji->s", vals.conj().transpose(0, 2, 1), derivs)
    mean = complex(np.mean(integrand)) / 1j
    return float(mean.real)


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """The boundary of one configuration: oriented components with their
    endomorphisms and gauges."""

    components: tuple[BoundaryComponentSpec, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("boundary data needs at least one component")
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class RhsResult:
    """Both evaluations of the formula right-hand side plus diagnostics."""

    rhs_plus: int
    rhs_minus: int
    cobordism_sum: int
    consistent: bool
    per_component: tuple[dict, ...]

    @property
    def value(self) -> int:
        """Canonical value (the E+ version); equal to rhs_minus when consistent."""
        return self.rhs_plus


def formula_rhs(bd: BoundaryData) -> RhsResult:
    """Rank-weighted winding sums over the boundary components.

    Both versions are returned; they must agree whenever the cobordism sum
    vanishes (pulled-back gauges), and a mismatch is flagged through
    ``consistent`` rather than raised.
    """
    plus = 0
    minus = 0
    cob = 0
    rows = []
    for spec in bd.components:
        s = split_by_F(spec.f)
        w = winding_number(spec.gauge)
        plus += -spec.sigma * s.k_plus * w
        minus += +spec.sigma * s.k_minus * w
        cob += spec.sigma * spec.f.k * w
        rows.append(
            {
                "component": spec.f.component_id,
                "sigma": spec.sigma,
                "k_plus": s.k_plus,
                "k_minus": s.k_minus,
                "winding": w,
            }
        )
    return RhsResult(
        rhs_plus=int(plus),
        rhs_minus=int(minus),
        cobordism_sum=int(cob),
        consistent=plus == minus,
        per_component=tuple(rows),
    )
