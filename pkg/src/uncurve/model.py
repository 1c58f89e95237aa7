"""Core domain types: letter-grade scales, grade records, the sparse grade
book, bipartite connectivity, and the baseline GPA / course-average statistics.

A grade book is an immutable set of (student, course, grade) records together
with first-appearance indexes for both entity kinds.  Students and courses form
a bipartite graph whose connected components delimit where fitted estimates are
comparable; everything downstream (least squares, LAD, reports) consumes the
arrays built here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GradeDataError",
    "DuplicateRecordError",
    "UnknownEntityError",
    "GradeScale",
    "GradeRecord",
    "GradeBook",
    "ComponentLabeling",
    "DEFAULT_SCALE",
    "THIRDS_SCALE",
    "build_gradebook",
    "connected_components",
    "gpa",
    "course_average",
]


class GradeDataError(ValueError):
    """Invalid grade data: bad records, malformed scales, unknown entities."""


class DuplicateRecordError(GradeDataError):
    """More than one grade for the same (student, course) pair."""


class UnknownEntityError(GradeDataError):
    """Student or course id not present in the grade book."""


@dataclass(frozen=True)
class GradeScale:
    """Ordered letter ladder mapping letters to GPA points.

    ``ladder`` runs from the top grade down and must be strictly decreasing in
    points with unique letters.  ``aliases`` are extra accepted spellings
    (e.g. ``A+`` as a synonym for the 4.0 ceiling) that do not participate in
    the strictness check.  Lookup is case-insensitive.
    """

    ladder: tuple[tuple[str, float], ...]
    aliases: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        if not self.ladder:
            raise GradeDataError("grade scale must have at least one ladder entry")
        seen: set[str] = set()
        prev = None
        for letter, points in self.ladder:
            key = letter.strip().upper()
            if not key:
                raise GradeDataError("grade scale letters must be non-empty")
            if key in seen:
                raise GradeDataError(f"duplicate letter in grade scale: {letter!r}")
            seen.add(key)
            if not np.isfinite(points):
                raise GradeDataError(f"non-finite points for letter {letter!r}")
            if prev is not None and points >= prev:
                raise GradeDataError(
                    f"grade scale points must be strictly decreasing; "
                    f"{letter!r} -> {points} does not descend from {prev}"
                )
            prev = points
        for letter, points in self.aliases:
            key = letter.strip().upper()
            if key in seen:
                raise GradeDataError(f"alias duplicates ladder letter: {letter!r}")
            if not np.isfinite(points):
                raise GradeDataError(f"non-finite points for alias {letter!r}")

    def _table(self) -> dict[str, float]:
        table = {letter.strip().upper(): float(p) for letter, p in self.ladder}
        table.update((letter.strip().upper(), float(p)) for letter, p in self.aliases)
        return table

    def points(self, letter: str) -> float:
        """Numeric points for a letter grade; raises GradeDataError if unknown."""
        try:
            return self._table()[letter.strip().upper()]
        except KeyError:
            raise GradeDataError(f"unknown letter grade: {letter!r}") from None

    @property
    def min_points(self) -> float:
        return min(p for _, p in self.ladder)

    @property
    def max_points(self) -> float:
        return max(max(p for _, p in self.ladder),
                   max((p for _, p in self.aliases), default=float("-inf")))

    def nearest(self, value: float) -> float:
        """Ladder points closest to ``value`` (ties go to the higher grade)."""
        return min((p for _, p in self.ladder), key=lambda p: (abs(p - value), -p))


#: Conventional US 4.0 ladder.  A+ is accepted as an alias for the 4.0
#: ceiling, matching registrar data whose maximum recorded grade is 4.0.
DEFAULT_SCALE = GradeScale(
    ladder=(
        ("A", 4.0), ("A-", 3.7),
        ("B+", 3.3), ("B", 3.0), ("B-", 2.7),
        ("C+", 2.3), ("C", 2.0), ("C-", 1.7),
        ("D+", 1.3), ("D", 1.0), ("D-", 0.7),
        ("F", 0.0),
    ),
    aliases=(("A+", 4.0),),
)

#: Variant ladder with exact one-third steps (B- = 8/3, B+ = 10/3, ...).
#: Some published worked examples encode letters this way; kept available for
#: reproducing them and for scale-file-free experimentation.
THIRDS_SCALE = GradeScale(
    ladder=(
        ("A", 4.0), ("A-", 11 / 3),
        ("B+", 10 / 3), ("B", 3.0), ("B-", 8 / 3),
        ("C+", 7 / 3), ("C", 2.0), ("C-", 5 / 3),
        ("D+", 4 / 3), ("D", 1.0), ("D-", 2 / 3),
        ("F", 0.0),
    ),
    aliases=(("A+", 4.0),),
)


@dataclass(frozen=True)
class GradeRecord:
    """One grade: opaque student id, opaque course id, numeric GPA points."""

    student_id: str
    course_id: str
    grade: float


class GradeBook:
    """Immutable sparse collection of grade records with entity indexes.

    Students and courses are numbered in order of first appearance in the
    record list; per-record index arrays and per-entity record groupings are
    precomputed.  Instances are never mutated after construction and are safe
    to share across threads.
    """

    __slots__ = (
        "records", "students", "courses",
        "student_index", "course_index",
        "student_of", "course_of", "grades",
        "student_counts", "course_counts",
        "_student_order", "_student_starts",
        "_course_order", "_course_starts",
    )

    def __init__(self, records: list[GradeRecord] | tuple[GradeRecord, ...]):
        if not records:
            raise GradeDataError("a grade book needs at least one record")
        students: list[str] = []
        courses: list[str] = []
        student_index: dict[str, int] = {}
        course_index: dict[str, int] = {}
        seen_pairs: set[tuple[str, str]] = set()
        si = np.empty(len(records), dtype=np.intp)
        ci = np.empty(len(records), dtype=np.intp)
        grades = np.empty(len(records), dtype=np.float64)
        for k, rec in enumerate(records):
            pair = (rec.student_id, rec.course_id)
            if pair in seen_pairs:
                raise DuplicateRecordError(
                    f"duplicate grade for student {rec.student_id!r} "
                    f"in course {rec.course_id!r}"
                )
            seen_pairs.add(pair)
            if not np.isfinite(rec.grade):
                raise GradeDataError(
                    f"non-finite grade for ({rec.student_id!r}, {rec.course_id!r})"
                )
            if rec.student_id not in student_index:
                student_index[rec.student_id] = len(students)
                students.append(rec.student_id)
            if rec.course_id not in course_index:
                course_index[rec.course_id] = len(courses)
                courses.append(rec.course_id)
            si[k] = student_index[rec.student_id]
            ci[k] = course_index[rec.course_id]
            grades[k] = float(rec.grade)
        self.records = tuple(records)
        self.students = tuple(students)
        self.courses = tuple(courses)
        self.student_index = student_index
        self.course_index = course_index
        self.student_of = si
        self.course_of = ci
        self.grades = grades
        self.student_counts = np.bincount(si, minlength=len(students))
        self.course_counts = np.bincount(ci, minlength=len(courses))
        # CSR-style groupings: record indices sorted by entity, plus offsets.
        self._student_order = np.argsort(si, kind="stable")
        self._student_starts = np.concatenate(
            ([0], np.cumsum(self.student_counts))
        )
        self._course_order = np.argsort(ci, kind="stable")
        self._course_starts = np.concatenate(([0], np.cumsum(self.course_counts)))

    @property
    def num_students(self) -> int:
        return len(self.students)

    @property
    def num_courses(self) -> int:
        return len(self.courses)

    @property
    def num_records(self) -> int:
        return len(self.records)

    @property
    def is_complete(self) -> bool:
        """True when every student took every course."""
        return self.num_records == self.num_students * self.num_courses

    def student_records(self, i: int) -> np.ndarray:
        """Record indices of student slot ``i`` (first-appearance numbering)."""
        return self._student_order[self._student_starts[i]:self._student_starts[i + 1]]

    def course_records(self, j: int) -> np.ndarray:
        """Record indices of course slot ``j``."""
        return self._course_order[self._course_starts[j]:self._course_starts[j + 1]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradeBook):
            return NotImplemented
        return self.records == other.records

    def __hash__(self) -> int:
        return hash(self.records)

    def __repr__(self) -> str:
        return (
            f"GradeBook(m={self.num_students} students, "
            f"n={self.num_courses} courses, N={self.num_records} grades)"
        )


def build_gradebook(records: list[GradeRecord] | tuple[GradeRecord, ...]) -> GradeBook:
    """Validate and index a list of grade records.

    Rejects empty input and duplicate (student, course) pairs; repeat
    enrollments have no term in the additive model, so surfacing them beats
    silently averaging.
    """
    return GradeBook(records)


class _UnionFind:
    """Array union-find with path compression and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected components of the student-course enrollment graph.

    Two entities share a component exactly when a path of grade records links
    them.  Estimates from the additive model are only comparable within one
    component.  Labels are assigned in order of first appearance in the record
    list, so they are deterministic for a given book.
    """

    student_component: np.ndarray
    course_component: np.ndarray
    count: int

    def component_of_student(self, book: GradeBook, student_id: str) -> int:
        return int(self.student_component[book.student_index[student_id]])

    def component_of_course(self, book: GradeBook, course_id: str) -> int:
        return int(self.course_component[book.course_index[course_id]])


def connected_components(book: GradeBook) -> ComponentLabeling:
    """Label students and courses by connected component of the grade graph."""
    m, n = book.num_students, book.num_courses
    uf = _UnionFind(m + n)
    for k in range(book.num_records):
        uf.union(int(book.student_of[k]), m + int(book.course_of[k]))
    labels: dict[int, int] = {}
    student_component = np.empty(m, dtype=np.intp)
    course_component = np.empty(n, dtype=np.intp)
    # Walk records in order so labels follow first appearance.
    for k in range(book.num_records):
        for node in (int(book.student_of[k]), m + int(book.course_of[k])):
            root = uf.find(node)
            if root not in labels:
                labels[root] = len(labels)
    for i in range(m):
        student_component[i] = labels[uf.find(i)]
    for j in range(n):
        course_component[j] = labels[uf.find(m + j)]
    return ComponentLabeling(student_component, course_component, len(labels))


def gpa(book: GradeBook, student_id: str) -> float:
    """Plain grade-point average of one student: mean of their grades."""
    try:
        i = book.student_index[student_id]
    except KeyError:
        raise UnknownEntityError(f"unknown student: {student_id!r}") from None
    recs = book.student_records(i)
    return float(book.grades[recs].mean())


def course_average(book: GradeBook, course_id: str) -> float:
    """Mean grade given in one course."""
    try:
        j = book.course_index[course_id]
    except KeyError:
        raise UnknownEntityError(f"unknown course: {course_id!r}") from None
    recs = book.course_records(j)
    return float(book.grades[recs].mean())
