"""sflab: a numerical laboratory for spectral flow of Dirac-type operator
families with local elliptic boundary conditions on circles and finite
cylinders."""

from .core import (
    BasisLabel,
    HermitianOperator,
    OperatorPath,
    SignCounts,
    Spectrum,
    eig_decomposition,
    eig_spectrum,
    hermiticity_residual,
    linear_path,
    neg_count,
    sign_counts,
)
from .gauges import (
    TrigPolyGauge,
    diagonal_windings,
    from_coeffs,
    identity_gauge,
    phase_modulated,
    scalar_winding,
)
from .circle import (
    BoundaryComponentSpec,
    BoundaryEndomorphism,
    CircleOperator,
    boundary_family_path,
    build_circle_operator,
    conjugation_path,
    exact_circle_flow,
    f_tilde,
    gauge_conjugate,
    split_by_F,
)
from .cylinder import (
    CylinderConfig,
    CylinderOperator,
    build_cylinder_operator,
    cylinder_path,
    exact_cylinder_spectrum,
)
from .flow import (
    Crossing,
    ProjectionPair,
    SpectralFlowResult,
    conjugated_projection,
    crossing_census,
    relative_index,
    spectral_flow,
    spectral_projection,
    toeplitz_index,
)
from .chern import (
    BoundaryData,
    RhsResult,
    formula_rhs,
    odd_chern_degree1_integral,
    winding_number,
)
from .harness import (
    ExperimentReport,
    default_config,
    run_battery,
    run_experiment,
    sweep_base,
)

__version__ = "0.1.0"
