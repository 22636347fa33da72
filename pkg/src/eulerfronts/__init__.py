"""Exact multivalued solutions, caustics and shock fronts for 1D barotropic gas flows."""

__version__ = "0.1.0"

from .thermo import PotentialModel, StatePoint, KappaSignature, eval_state, kappa_at, ideal_gas_model, van_der_waals_model
from .process import (
    ProcessCurve,
    HyperbolicityReport,
    adiabatic_process,
    cubic_pressure,
    classify_at,
    is_characteristically_integrable,
)
from .exact_solution import SolutionFamily, BranchSet, g, velocity_U, branches, profile_section
from .singularity import CausticCurve, Cusp, FrontCurve, caustic, cusp, potential_H, shock_front
from .geometry_verify import TwoForm, build_normalized_forms, operator_W, lie_bracket_integrability, run_verification
from .fvm import GridState, init_from_analytic, step, locate_shock

__all__ = [
    "PotentialModel",
    "StatePoint",
    "KappaSignature",
    "eval_state",
    "kappa_at",
    "ideal_gas_model",
    "van_der_waals_model",
    "ProcessCurve",
    "HyperbolicityReport",
    "adiabatic_process",
    "cubic_pressure",
    "classify_at",
    "is_characteristically_integrable",
    "SolutionFamily",
    "BranchSet",
    "g",
    "velocity_U",
    "branches",
    "profile_section",
    "CausticCurve",
    "Cusp",
    "FrontCurve",
    "caustic",
    "cusp",
    "potential_H",
    "shock_front",
    "TwoForm",
    "build_normalized_forms",
    "operator_W",
    "lie_bracket_integrability",
    "run_verification",
    "GridState",
    "init_from_analytic",
    "step",
    "locate_shock",
]
