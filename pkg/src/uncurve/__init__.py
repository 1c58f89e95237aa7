"""Separate student aptitude from course grade inflation.

Fits the additive model grade = aptitude + inflatedness + noise over sparse
grade records, by least squares or least absolute deviations, with error bars
and ranked reports.
"""

from .model import (
    DEFAULT_SCALE,
    THIRDS_SCALE,
    ComponentLabeling,
    DuplicateRecordError,
    GradeBook,
    GradeDataError,
    GradeRecord,
    GradeScale,
    UnknownEntityError,
    build_gradebook,
    connected_components,
    course_average,
    gpa,
)
from .lsq import (
    FitResult,
    IncompleteBookError,
    estimate_scale_ls,
    fit_ls,
    fit_ls_complete,
    standard_errors,
)
from .lad import build_lad_problem, fit_lad_alternating, fit_lad_lp, median
from .linprog import LpConstraint, LpProblem, LpSolution, lp_solve, to_lp_text
from .simulate import (
    InfeasibleSpecError,
    RecoveryMetrics,
    SyntheticSchool,
    SyntheticSpec,
    generate,
    recovery_metrics,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SCALE",
    "THIRDS_SCALE",
    "ComponentLabeling",
    "DuplicateRecordError",
    "FitResult",
    "GradeBook",
    "GradeDataError",
    "GradeRecord",
    "GradeScale",
    "IncompleteBookError",
    "InfeasibleSpecError",
    "LpConstraint",
    "LpProblem",
    "LpSolution",
    "RecoveryMetrics",
    "SyntheticSchool",
    "SyntheticSpec",
    "UnknownEntityError",
    "build_gradebook",
    "build_lad_problem",
    "connected_components",
    "course_average",
    "estimate_scale_ls",
    "fit_lad_alternating",
    "fit_lad_lp",
    "fit_ls",
    "fit_ls_complete",
    "generate",
    "gpa",
    "lp_solve",
    "median",
    "recovery_metrics",
    "standard_errors",
    "to_lp_text",
]
