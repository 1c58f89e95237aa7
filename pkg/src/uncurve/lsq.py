"""Least-squares fitting of the additive aptitude/inflatedness model.

Each grade is modeled as student aptitude plus course inflatedness plus
noise.  For complete data (every student took every course) the minimizer has
a closed form: aptitudes are row means and inflatedness values are column
means minus the grand mean.  For sparse data the first-order conditions say
each aptitude is the mean of that student's inflatedness-corrected grades and
vice versa; we solve that coupled system via conjugate gradients on the
normal equations with count-based Jacobi preconditioning.

The fitted scale is the root mean squared residual (divisor N, no
degrees-of-freedom correction), and standard errors divide the scale by the
square root of the number of grades behind each estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ComponentLabeling, GradeBook, GradeDataError, connected_components

__all__ = [
    "FitResult",
    "IncompleteBookError",
    "fit_ls",
    "fit_ls_complete",
    "estimate_scale_ls",
    "standard_errors",
]

# Convergence controls for the sparse solver.
UPDATE_TOL = 1e-10        # stop when no parameter moves more than this
RESIDUAL_TOL = 1e-10      # ... or the stationarity residual norm < tol*sqrt(N)
MAX_ITERATIONS = 10_000


class IncompleteBookError(GradeDataError):
    """Closed-form fit requested for a book where some enrollments are missing."""


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters and diagnostics for one model run.

    ``mu`` maps student id to aptitude and ``nu`` maps course id to
    inflatedness; within each connected component the inflatedness values sum
    to zero.  ``scale`` is the residual scale estimate in GPA points and the
    standard errors are scale / sqrt(count).  ``objective`` is the mean
    squared residual for least-squares methods and the mean absolute residual
    for LAD methods.
    """

    mu: dict[str, float]
    nu: dict[str, float]
    scale: float
    stderr_mu: dict[str, float]
    stderr_nu: dict[str, float]
    counts_mu: dict[str, int]
    counts_nu: dict[str, int]
    objective: float
    method: str
    iterations: int
    converged: bool
    components: int
    notes: tuple[str, ...] = field(default=())

    @property
    def is_connected(self) -> bool:
        return self.components == 1


def _residuals(book: GradeBook, mu: np.ndarray, nu: np.ndarray) -> np.ndarray:
    return book.grades - mu[book.student_of] - nu[book.course_of]


def _normalize_per_component(
    book: GradeBook, labeling: ComponentLabeling, mu: np.ndarray, nu: np.ndarray
) -> None:
    """Shift each component so its inflatedness values sum to zero.

    The shift moves a constant between mu and nu inside one component, which
    leaves every residual unchanged.
    """
    for comp in range(labeling.count):
        nu_mask = labeling.course_component == comp
        shift = nu[nu_mask].mean()
        nu[nu_mask] -= shift
        mu[labeling.student_component == comp] += shift


def _package(
    book: GradeBook,
    labeling: ComponentLabeling,
    mu: np.ndarray,
    nu: np.ndarray,
    *,
    method: str,
    iterations: int,
    converged: bool,
    absolute: bool = False,
    notes: tuple[str, ...] = (),
) -> FitResult:
    r = _residuals(book, mu, nu)
    objective = float(np.mean(np.abs(r)) if absolute else np.mean(r * r))
    scale = float(np.sqrt(np.mean(r * r)))
    se_mu = scale / np.sqrt(book.student_counts)
    se_nu = scale / np.sqrt(book.course_counts)
    return FitResult(
        mu={s: float(v) for s, v in zip(book.students, mu)},
        nu={c: float(v) for c, v in zip(book.courses, nu)},
        scale=scale,
        stderr_mu={s: float(v) for s, v in zip(book.students, se_mu)},
        stderr_nu={c: float(v) for c, v in zip(book.courses, se_nu)},
        counts_mu={s: int(v) for s, v in zip(book.students, book.student_counts)},
        counts_nu={c: int(v) for c, v in zip(book.courses, book.course_counts)},
        objective=objective,
        method=method,
        iterations=iterations,
        converged=converged,
        components=labeling.count,
        notes=notes,
    )


def fit_ls_complete(book: GradeBook) -> FitResult:
    """Closed-form least squares for complete data.

    Aptitudes are row means; inflatedness values are column means minus the
    grand mean, which makes them sum to zero exactly (up to roundoff).
    """
    if not book.is_complete:
        raise IncompleteBookError(
            f"closed form needs a complete book; got N={book.num_records}, "
            f"expected m*n={book.num_students * book.num_courses}"
        )
    m, n = book.num_students, book.num_courses
    row_sums = np.bincount(book.student_of, weights=book.grades, minlength=m)
    col_sums = np.bincount(book.course_of, weights=book.grades, minlength=n)
    grand_mean = book.grades.mean()
    mu = row_sums / n
    nu = col_sums / m - grand_mean
    labeling = connected_components(book)
    return _package(
        book, labeling, mu, nu,
        method="LS-complete", iterations=0, converged=True,
    )


def _solve_stationarity(
    book: GradeBook,
    *,
    update_tol: float,
    residual_tol: float,
    max_iterations: int,
) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """Preconditioned conjugate gradients on the stationarity equations.

    The normal system is  [diag(n_i)  A; A^T  diag(m_j)] [mu; nu] = [row
    sums; column sums]  with A the 0/1 enrollment matrix.  It is symmetric
    positive semidefinite with a one-dimensional null space per connected
    component (the constant swap between mu and nu), and the right-hand side
    is consistent, so CG converges to one of its solutions; the component
    shift applied afterwards picks the normalized one.  Matrix-vector
    products reduce to index gathers and bincount sums.
    """
    m, n = book.num_students, book.num_courses
    si, ci, g = book.student_of, book.course_of, book.grades
    n_i = book.student_counts.astype(np.float64)
    m_j = book.course_counts.astype(np.float64)
    b = np.concatenate([
        np.bincount(si, weights=g, minlength=m),
        np.bincount(ci, weights=g, minlength=n),
    ])

    def matvec(z: np.ndarray) -> np.ndarray:
        zmu, znu = z[:m], z[m:]
        top = n_i * zmu + np.bincount(si, weights=znu[ci], minlength=m)
        bottom = np.bincount(ci, weights=zmu[si], minlength=n) + m_j * znu
        return np.concatenate([top, bottom])

    inv_diag = 1.0 / np.concatenate([n_i, m_j])
    x = np.concatenate([b[:m] / n_i, np.zeros(n)])  # warm start at GPA / 0
    r = b - matvec(x)
    stop_norm = residual_tol * np.sqrt(book.num_records)
    if np.linalg.norm(r) <= stop_norm:
        return x[:m], x[m:], 0, True
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        Kp = matvec(p)
        pKp = float(p @ Kp)
        if pKp <= 0.0:
            # Search direction fell into the null space: the range-space
            # residual is already negligible.
            converged = np.linalg.norm(r) <= stop_norm
            break
        alpha = rz / pKp
        x += alpha * p
        r -= alpha * Kp
        if np.linalg.norm(r) <= stop_norm or abs(alpha) * np.max(np.abs(p)) < update_tol:
            converged = True
            break
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x[:m], x[m:], iterations, converged


def fit_ls(
    book: GradeBook,
    *,
    update_tol: float = UPDATE_TOL,
    residual_tol: float = RESIDUAL_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> FitResult:
    """Least-squares fit for a general sparse grade book.

    The returned parameters satisfy both families of stationarity equations
    (per-student and per-course residual sums vanish) and are normalized so
    inflatedness sums to zero within every connected component.  Disconnected
    books are solvable but estimates are only comparable inside a component;
    the component count in the result flags that case.
    """
    labeling = connected_components(book)
    mu, nu, iterations, converged = _solve_stationarity(
        book,
        update_tol=update_tol,
        residual_tol=residual_tol,
        max_iterations=max_iterations,
    )
    _normalize_per_component(book, labeling, mu, nu)
    notes = ()
    if labeling.count > 1:
        notes = (
            f"book has {labeling.count} disconnected components; "
            "estimates are not comparable across components",
        )
    return _package(
        book, labeling, mu, nu,
        method="LS", iterations=iterations, converged=converged, notes=notes,
    )


def estimate_scale_ls(
    book: GradeBook, mu: dict[str, float], nu: dict[str, float]
) -> float:
    """Root mean squared residual of the book at the given parameters.

    Uses divisor N with no degrees-of-freedom correction, mirroring the
    objective-function estimate of the noise variance.
    """
    try:
        mu_vec = np.array([mu[s] for s in book.students], dtype=np.float64)
        nu_vec = np.array([nu[c] for c in book.courses], dtype=np.float64)
    except KeyError as exc:
        raise GradeDataError(f"missing parameter for entity {exc.args[0]!r}") from None
    r = _residuals(book, mu_vec, nu_vec)
    return float(np.sqrt(np.mean(r * r)))


def standard_errors(
    scale: float,
    counts: tuple[dict[str, int], dict[str, int]],
    *,
    exact: bool = False,
) -> tuple[dict[str, float], dict[str, float]]:
    """Error bars: scale divided by the square root of each entity's count.

    ``counts`` is the pair (grades per student, grades per course).  With
    ``exact=True`` -- meaningful only for complete books, where every student
    count equals the course total n and every course count equals the student
    total m -- the inflatedness variance uses the exact complete-data factor
    (1 - 1/n) instead of the square-root-count approximation.
    """
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    counts_mu, counts_nu = counts
    if any(v <= 0 for v in counts_mu.values()) or any(v <= 0 for v in counts_nu.values()):
        raise ValueError("counts must be positive")
    if not exact:
        return (
            {s: scale / np.sqrt(k) for s, k in counts_mu.items()},
            {c: scale / np.sqrt(k) for c, k in counts_nu.items()},
        )
    n_values = set(counts_mu.values())
    m_values = set(counts_nu.values())
    if len(n_values) != 1 or len(m_values) != 1:
        raise ValueError("exact mode requires a complete book (uniform counts)")
    n = n_values.pop()
    m = m_values.pop()
    se_nu = scale * np.sqrt((1.0 - 1.0 / n) / m)
    return (
        {s: scale / np.sqrt(n) for s in counts_mu},
        {c: float(se_nu) for c in counts_nu},
    )
