"""Synthetic school generation and parameter-recovery measurement.

Books are generated from the additive model itself: draw a ground-truth
aptitude per student and inflatedness per course (re-centered to sum to zero
exactly), pick each student's course load uniformly without replacement, and
add i.i.d. noise.  Course selections are redrawn until the enrollment graph
is connected so the fits are identifiable; a book that stays disconnected
after the retry cap is returned with ``connected=False``.

Generation is deterministic for a fixed spec: the PCG64 generator seeded from
``spec.seed`` has a platform-independent stream, and a single generation
consumes it sequentially.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lsq import FitResult
from .model import (
    GradeBook,
    GradeDataError,
    GradeRecord,
    GradeScale,
    build_gradebook,
    connected_components,
)

__all__ = [
    "InfeasibleSpecError",
    "SyntheticSpec",
    "SyntheticSchool",
    "RecoveryMetrics",
    "generate",
    "recovery_metrics",
]

CONNECTIVITY_ATTEMPTS = 100


class InfeasibleSpecError(GradeDataError):
    """Generator parameters that cannot produce a valid book."""


@dataclass(frozen=True)
class SyntheticSpec:
    """Ground-truth generator parameters.

    ``enrollment`` is either a fixed per-student course count or an inclusive
    (low, high) range.  Distributions are ("uniform", a, b) or
    ("normal", mean, sd) tuples, in GPA points.  Generated grades are left
    un-quantized by default so zero-noise books are recovered exactly; pass a
    ``quantize`` scale to snap them to a letter ladder.
    """

    students: int
    courses: int
    enrollment: int | tuple[int, int]
    mu_dist: tuple[str, float, float] = ("uniform", 2.0, 4.0)
    nu_dist: tuple[str, float, float] = ("uniform", -1.0, 1.0)
    noise_sigma: float = 0.0
    seed: int = 0
    quantize: GradeScale | None = None

    def __post_init__(self) -> None:
        if self.students < 1 or self.courses < 1:
            raise InfeasibleSpecError("need at least one student and one course")
        lo, hi = self.enrollment_range
        if lo < 1:
            raise InfeasibleSpecError("per-student enrollment must be at least 1")
        if hi > self.courses:
            raise InfeasibleSpecError(
                f"per-student enrollment {hi} exceeds course count {self.courses}"
            )
        if lo > hi:
            raise InfeasibleSpecError("enrollment range is inverted")
        if self.noise_sigma < 0:
            raise InfeasibleSpecError("noise sigma must be nonnegative")
        for dist in (self.mu_dist, self.nu_dist):
            if dist[0] not in ("uniform", "normal"):
                raise InfeasibleSpecError(f"unknown distribution {dist[0]!r}")

    @property
    def enrollment_range(self) -> tuple[int, int]:
        if isinstance(self.enrollment, int):
            return self.enrollment, self.enrollment
        lo, hi = self.enrollment
        return int(lo), int(hi)


@dataclass(frozen=True)
class SyntheticSchool:
    """A generated book plus the ground truth it was built from."""

    book: GradeBook
    mu: dict[str, float]
    nu: dict[str, float]
    connected: bool


@dataclass(frozen=True)
class RecoveryMetrics:
    """How well a fit recovered the generating parameters."""

    rmse_mu: float
    max_abs_mu: float
    rmse_nu: float
    max_abs_nu: float
    rank_correlation_mu: float


def _draw(rng: np.random.Generator, dist: tuple[str, float, float], size: int) -> np.ndarray:
    kind, a, b = dist
    if kind == "uniform":
        return rng.uniform(a, b, size)
    return rng.normal(a, b, size)


def _is_connected(m: int, n: int, si: np.ndarray, ci: np.ndarray) -> bool:
    """All m students and n courses present and in one component."""
    if len(np.unique(ci)) < n:
        return False
    parent = list(range(m + n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s, c in zip(si, ci):
        ra, rb = find(int(s)), find(m + int(c))
        if ra != rb:
            parent[rb] = ra
    root = find(0)
    return all(find(v) == root for v in range(m + n))


def _student_id(i: int, width: int) -> str:
    return f"s{i + 1:0{width}d}"


def _course_id(j: int, width: int) -> str:
    return f"c{j + 1:0{width}d}"


def generate(spec: SyntheticSpec) -> SyntheticSchool:
    """Generate a book where grade = mu_i + nu_j + noise.

    Course selections are uniform without replacement per student and redrawn
    (up to 100 attempts) until the enrollment graph is connected; if it never
    connects, the last attempt is returned flagged ``connected=False``.
    """
    rng = np.random.default_rng(spec.seed)
    m, n = spec.students, spec.courses
    mu = _draw(rng, spec.mu_dist, m)
    nu = _draw(rng, spec.nu_dist, n)
    nu -= nu.mean()
    lo, hi = spec.enrollment_range

    si = ci = None
    connected = False
    for _ in range(CONNECTIVITY_ATTEMPTS):
        loads = (
            np.full(m, lo) if lo == hi else rng.integers(lo, hi + 1, size=m)
        )
        si = np.repeat(np.arange(m), loads)
        ci = np.concatenate(
            [rng.choice(n, size=int(k), replace=False) for k in loads]
        )
        if _is_connected(m, n, si, ci):
            connected = True
            break

    grades = mu[si] + nu[ci]
    if spec.noise_sigma > 0:
        grades = grades + rng.normal(0.0, spec.noise_sigma, len(si))
    if spec.quantize is not None:
        grades = np.array([spec.quantize.nearest(g) for g in grades])

    s_width = len(str(m))
    c_width = len(str(n))
    records = [
        GradeRecord(_student_id(int(i), s_width), _course_id(int(j), c_width), float(g))
        for i, j, g in zip(si, ci, grades)
    ]
    book = build_gradebook(records)
    truth_mu = {_student_id(i, s_width): float(v) for i, v in enumerate(mu)}
    truth_nu = {_course_id(j, c_width): float(v) for j, v in enumerate(nu)}
    return SyntheticSchool(book=book, mu=truth_mu, nu=truth_nu, connected=connected)


def _spearman(a: np.ndarray, b: np.ndarray) -> float:
    """Spearman rank correlation with average ranks for ties."""
    if len(a) < 2:
        return 1.0

    def ranks(v: np.ndarray) -> np.ndarray:
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v))
        r[order] = np.arange(1, len(v) + 1)
        # average ranks across exact ties
        for val in np.unique(v):
            mask = v == val
            if mask.sum() > 1:
                r[mask] = r[mask].mean()
        return r

    ra, rb = ranks(a), ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = np.sqrt((ra @ ra) * (rb @ rb))
    if denom == 0:
        return 1.0
    return float((ra @ rb) / denom)


def recovery_metrics(
    book: GradeBook,
    truth_mu: dict[str, float],
    truth_nu: dict[str, float],
    fit: FitResult,
) -> RecoveryMetrics:
    """Errors of a fit against ground truth, after normalization alignment.

    Both parameter sets are shifted so inflatedness sums to zero within every
    connected component of ``book`` (the model's fundamental ambiguity moves
    a constant between the two), then RMSE and max-abs errors are measured.
    Rank correlation of the aptitudes captures how well the fit orders
    students, which is the headline use of the model.
    """
    if set(truth_mu) != set(fit.mu) or set(truth_nu) != set(fit.nu):
        raise GradeDataError("fit and ground truth cover different entities")
    if set(truth_mu) != set(book.students) or set(truth_nu) != set(book.courses):
        raise GradeDataError("book does not match the ground-truth entities")

    labeling = connected_components(book)

    def aligned(mu_map: dict[str, float], nu_map: dict[str, float]):
        mu = np.array([mu_map[s] for s in book.students])
        nu = np.array([nu_map[c] for c in book.courses])
        for comp in range(labeling.count):
            cmask = labeling.course_component == comp
            shift = nu[cmask].mean()
            nu[cmask] -= shift
            mu[labeling.student_component == comp] += shift
        return mu, nu

    mu_t, nu_t = aligned(truth_mu, truth_nu)
    mu_f, nu_f = aligned(fit.mu, fit.nu)
    dmu = mu_f - mu_t
    dnu = nu_f - nu_t
    return RecoveryMetrics(
        rmse_mu=float(np.sqrt(np.mean(dmu**2))),
        max_abs_mu=float(np.max(np.abs(dmu))),
        rmse_nu=float(np.sqrt(np.mean(dnu**2))),
        max_abs_nu=float(np.max(np.abs(dnu))),
        rank_correlation_mu=_spearman(mu_t, mu_f),
    )
