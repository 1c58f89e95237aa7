"""Least-absolute-deviations fitting: alternating medians and the LP route.

Minimizing the sum of absolute residuals is the robust counterpart of the
least-squares fit.  Two solvers are provided:

* ``fit_lad_alternating`` -- start every course adjustment at zero and every
  student at the median of their own grades, then sweep: each course becomes
  the median of its aptitude-corrected grades, each student the median of
  their inflatedness-corrected grades, until nothing moves.  Every sweep is a
  coordinate-wise minimizer, so the objective never increases, but the fixed
  point need not be the global optimum.

* ``fit_lad_lp`` -- the exact formulation: minimize the sum of bound
  variables t_ij subject to -t_ij <= grade - mu_i - nu_j <= t_ij with the
  inflatedness values summing to zero per connected component.  Solved by the
  in-package simplex, warm started from the alternating fixed point.

LAD optima can form a flat face; the LP returns an optimal *basic* solution,
deterministic under the solver's fixed pivot rules but not necessarily the
same point another method would pick.  Error bars for LAD output reuse the
scale / sqrt(count) form with the root mean squared residual as scale, which
is a labeled heuristic rather than a derived quantity.
"""

from __future__ import annotations

import numpy as np

from .linprog import LpConstraint, LpProblem, LpSolution, lp_solve, slack_column
from .lsq import FitResult, _normalize_per_component, _package
from .model import ComponentLabeling, GradeBook, connected_components

__all__ = [
    "median",
    "fit_lad_alternating",
    "fit_lad_lp",
    "build_lad_problem",
]

SWEEP_TOL = 1e-12     # a sweep that moves nothing more than this is a fixed point
MAX_SWEEPS = 1000

LAD_SCALE_NOTE = "LAD error bars use the heuristic scale sqrt(mean squared residual)"


def median(values) -> float:
    """Sample median: middle order statistic, or the mean of the middle two.

    Input order is irrelevant; an empty input is an error.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("median of an empty collection")
    return float(np.median(arr))


def _alternating_fixed_point(
    book: GradeBook, *, max_sweeps: int, tol: float
) -> tuple[np.ndarray, np.ndarray, int, bool]:
    m, n = book.num_students, book.num_courses
    g, si, ci = book.grades, book.student_of, book.course_of
    student_groups = [book.student_records(i) for i in range(m)]
    course_groups = [book.course_records(j) for j in range(n)]
    nu = np.zeros(n)
    mu = np.array([np.median(g[recs]) for recs in student_groups])
    sweeps = 0
    converged = False
    for sweeps in range(1, max_sweeps + 1):
        biggest = 0.0
        for j in range(n):
            recs = course_groups[j]
            new = np.median(g[recs] - mu[si[recs]])
            biggest = max(biggest, abs(new - nu[j]))
            nu[j] = new
        for i in range(m):
            recs = student_groups[i]
            new = np.median(g[recs] - nu[ci[recs]])
            biggest = max(biggest, abs(new - mu[i]))
            mu[i] = new
        if biggest <= tol:
            converged = True
            break
    return mu, nu, sweeps, converged


def fit_lad_alternating(
    book: GradeBook,
    *,
    max_sweeps: int = MAX_SWEEPS,
    tol: float = SWEEP_TOL,
) -> FitResult:
    """Alternating-medians LAD fit.

    Runs the median sweeps over each student's and each course's actual
    record sets, so sparse books work the same way as complete ones.  The raw
    fixed point rarely satisfies the zero-sum normalization on its own, so
    the mean inflatedness of each connected component is shifted into the
    aptitudes afterwards (the same convention the least-squares fit uses,
    keeping the two directly comparable).
    """
    labeling = connected_components(book)
    mu, nu, sweeps, converged = _alternating_fixed_point(
        book, max_sweeps=max_sweeps, tol=tol
    )
    _normalize_per_component(book, labeling, mu, nu)
    return _package(
        book, labeling, mu, nu,
        method="LAD-alternating", iterations=sweeps, converged=converged,
        absolute=True, notes=(LAD_SCALE_NOTE,),
    )


def build_lad_problem(
    book: GradeBook, labeling: ComponentLabeling | None = None
) -> LpProblem:
    """LAD as a linear program.

    Variables are ordered [mu per student, nu per course, t per record]; each
    record contributes the two residual bounds, and each connected component
    contributes one zero-sum equality over its nu variables (handled natively
    as an equality row).
    """
    if labeling is None:
        labeling = connected_components(book)
    m, n, N = book.num_students, book.num_courses, book.num_records
    t0 = m + n
    objective = [0.0] * t0 + [1.0] * N
    lower = [-np.inf] * t0 + [0.0] * N
    upper = [np.inf] * (t0 + N)
    names = (
        tuple(f"mu_{s}" for s in book.students)
        + tuple(f"nu_{c}" for c in book.courses)
        + tuple(f"t_{k}" for k in range(N))
    )
    constraints: list[LpConstraint] = []
    for k in range(N):
        i = int(book.student_of[k])
        j = int(book.course_of[k])
        x = float(book.grades[k])
        # residual <= t:   -mu - nu - t <= -X
        constraints.append(
            LpConstraint((i, m + j, t0 + k), (-1.0, -1.0, -1.0), "<=", -x)
        )
        # residual >= -t:   mu + nu - t <= X
        constraints.append(
            LpConstraint((i, m + j, t0 + k), (1.0, 1.0, -1.0), "<=", x)
        )
    for comp in range(labeling.count):
        members = tuple(
            m + j for j in range(n) if labeling.course_component[j] == comp
        )
        constraints.append(
            LpConstraint(members, (1.0,) * len(members), "=", 0.0)
        )
    return LpProblem(
        objective=tuple(objective),
        constraints=tuple(constraints),
        lower=tuple(lower),
        upper=tuple(upper),
        names=names,
    )


def _warm_start_for(
    problem: LpProblem,
    book: GradeBook,
    labeling: ComponentLabeling,
    mu: np.ndarray,
    nu: np.ndarray,
) -> tuple[list[int], np.ndarray]:
    """Basis and values seating the LP at a given (mu, nu) point.

    Per record the t variable is basic together with the slack of whichever
    residual bound is loose; per component one nu column covers the equality
    row.  The resulting basis is block triangular, always nonsingular, and
    primal feasible at the warm point, so no phase 1 is needed.
    """
    m, n, N = book.num_students, book.num_courses, book.num_records
    t0 = m + n
    residuals = book.grades - mu[book.student_of] - nu[book.course_of]
    basis: list[int] = []
    for k in range(N):
        basis.append(t0 + k)  # t_k
        loose_row = 2 * k if residuals[k] < 0 else 2 * k + 1
        basis.append(slack_column(problem, loose_row))
    for comp in range(labeling.count):
        j_star = int(np.argmax(labeling.course_component == comp))
        basis.append(m + j_star)
    values = np.concatenate([mu, nu, np.abs(residuals)])
    return basis, values


def fit_lad_lp(
    book: GradeBook,
    *,
    warm_start: bool = True,
    max_iterations: int | None = None,
) -> FitResult:
    """Globally optimal LAD fit via the linear program.

    Warm starts from the alternating-medians fixed point by default (the
    heuristic is cheap and usually lands near the optimum, cutting simplex
    work).  If the solver stops on its iteration cap the result is returned
    with ``converged=False`` rather than being passed off as optimal.
    """
    labeling = connected_components(book)
    problem = build_lad_problem(book, labeling)
    if warm_start:
        mu0, nu0, _, _ = _alternating_fixed_point(
            book, max_sweeps=MAX_SWEEPS, tol=SWEEP_TOL
        )
        _normalize_per_component(book, labeling, mu0, nu0)
        basis, values = _warm_start_for(problem, book, labeling, mu0, nu0)
        solution = lp_solve(
            problem, warm_basis=basis, warm_values=values,
            max_iterations=max_iterations,
        )
    else:
        solution = lp_solve(problem, max_iterations=max_iterations)
    if solution.status in ("infeasible", "unbounded"):
        # The LAD program is always feasible and bounded below by zero.
        raise RuntimeError(f"LAD linear program reported {solution.status}")
    m, n = book.num_students, book.num_courses
    mu = solution.x[:m].copy()
    nu = solution.x[m:m + n].copy()
    _normalize_per_component(book, labeling, mu, nu)
    notes = (LAD_SCALE_NOTE,)
    if labeling.count > 1:
        notes += (
            f"book has {labeling.count} disconnected components; "
            "estimates are not comparable across components",
        )
    return _package(
        book, labeling, mu, nu,
        method="LAD-LP",
        iterations=solution.iterations,
        converged=solution.status == "optimal",
        absolute=True,
        notes=notes,
    )


def lad_lp_solution(book: GradeBook) -> tuple[LpProblem, LpSolution]:
    """Build and solve the LAD program, returning both halves.

    Exposes the raw LP solution (including the t variables) for callers that
    want to inspect it; ``fit_lad_lp`` is the fitting front end.
    """
    labeling = connected_components(book)
    problem = build_lad_problem(book, labeling)
    mu0, nu0, _, _ = _alternating_fixed_point(
        book, max_sweeps=MAX_SWEEPS, tol=SWEEP_TOL
    )
    _normalize_per_component(book, labeling, mu0, nu0)
    basis, values = _warm_start_for(problem, book, labeling, mu0, nu0)
    return problem, lp_solve(problem, warm_basis=basis, warm_values=values)
