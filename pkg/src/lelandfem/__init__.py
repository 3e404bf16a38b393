"""Galerkin finite elements for Leland's transaction-cost Black-Scholes model."""

from lelandfem.model import (
    ConfigurationError,
    DomainError,
    MarketParams,
    PriceCurve,
    TransformConstants,
    boundary_values,
    from_transformed,
    initial_profile,
    leland_number,
    to_transformed,
)
from lelandfem.mesh import Mesh1D, build_aligned, build_graded, build_uniform
from lelandfem.elements import ElementMatrices, p1_matrices, p2_matrices, verify_by_quadrature
from lelandfem.assembly import (
    BandedMatrix,
    GlobalSystem,
    SingularMatrixError,
    apply,
    assemble,
    compute_v,
    solve_banded,
)
from lelandfem.timestepper import (
    NumericalBlowup,
    SchemeConfig,
    SolutionHistory,
    price_curve_at,
    run,
    step,
)
from lelandfem.oracles import FdmConfig, bs_call_adjusted, bs_call_closed_form, fdm_solve
from lelandfem.stability import StabilityReport, analyze, ratio_check
from lelandfem.convergence import RefinementStudy, study
from lelandfem.presets import PRESETS, Preset, get_preset

__version__ = "0.1.0"
