"""Numerical laboratory for the capillary overdetermined problem: reaction
terms, parallel profiles, radial ball minimizers and residual verifiers."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (AdmissibilityViolationError, CaplabError, ContinuationFailureError,
                     DivergenceError, ExpressionParseError, InsufficientDataError,
                     InvalidInputError, TruncationInfeasibleError)
from .physics import CapillarySetup, plate_rise_height, rise_height_closed_form
from .profile import (ProfileSolution, assert_profile_characterization, method_agreement,
                      profile_by_quadrature, profile_by_shooting)
from .radial import RadialConfig, RadialSolution, minimize_energy, sweep
from .reaction import (ReactionTerm, check_admissibility, expression_reaction,
                       linear_reaction, table_reaction)
from .report import CheckResult, VerificationReport
from .truncation import TruncatedReaction, truncate

__all__ = [
    "AdmissibilityViolationError", "CaplabError", "CapillarySetup", "CheckResult",
    "ContinuationFailureError", "DivergenceError", "ExpressionParseError",
    "InsufficientDataError", "InvalidInputError", "ProfileSolution", "RadialConfig",
    "RadialSolution", "ReactionTerm", "TruncatedReaction", "TruncationInfeasibleError",
    "VerificationReport", "assert_profile_characterization", "check_admissibility",
    "expression_reaction", "linear_reaction", "method_agreement", "minimize_energy",
    "plate_rise_height", "profile_by_quadrature", "profile_by_shooting",
    "rise_height_closed_form", "sweep", "table_reaction", "truncate",
]
