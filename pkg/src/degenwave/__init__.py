"""Degenerate wave equations ``y_tt - div(w grad y) = 0`` with Dirichlet boundary inputs.

Weighted P1/Q1 assembly, spectral propagators, the Dirichlet map, boundary-input
mild solutions and HUM boundary controls, all on a truncated eigenbasis.
"""

from ._accel import backend
from .boundary_control import (AuditItem, AuditReport, BoundarySignal, TraceReconstructor,
                               estimate_audit, full_solution, full_trajectory, lift_L, lift_Lt,
                               lift_trajectory, random_battery, transposition_check,
                               transposition_residual)
from .controllability import (ControlResult, HUMOperator, adjoint_solve, duality_check,
                              gramian_apply, hum_control, observe, unique_continuation_probe)
from .discretization import (AssembledSystem, Grid, Norms, assemble, build_grid, conormal_trace,
                             green_identity_residual, norms)
from .domain import Domain
from .elliptic import (dirichlet_constant, dirichlet_map, dirichlet_map_bound, dstar_identity_check,
                       flux_projection_residual, solve_dirichlet_zero, solve_lifted_bvp, trace_norms)
from .errors import AssemblyDefectError, DegenwaveError, DomainError, ParameterError
from .evolution import (EnergyState, SourceFunction, cosine_apply, duhamel_solve, duhamel_trajectory,
                        energy, homogeneous_solve, sine_apply)
from .spectral import (EigenBasis, apply_A, fractional_norm, from_coeffs, group_bound_check,
                       poincare_constant, resolvent_solve, solve_eigen, to_coeffs)
from .weights import (A2Report, WeightKind, WeightSpec, check_boundary_nondegeneracy,
                      estimate_ap_constant, eval_weight, validate_for_domain)

__version__ = "0.1.0"
