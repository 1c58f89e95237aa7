"""Independent reference implementations used to verify the package.

Everything here is deliberately brute force and shares no code path with the
library: reachability by breadth-first search, least squares via a dense
design matrix, LP solving by vertex enumeration, and LAD by enumerating
candidate interpolation subsets.
"""

from __future__ import annotations

import itertools

import numpy as np

from uncurve import GradeRecord


# ---------------------------------------------------------------------------
# connectivity

def bfs_component_count(records: list[GradeRecord]) -> int:
    """Number of connected components by breadth-first search."""
    students = {r.student_id for r in records}
    courses = {r.course_id for r in records}
    adjacency: dict[tuple[str, str], set[tuple[str, str]]] = {}
    for r in records:
        a, b = ("s", r.student_id), ("c", r.course_id)
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)
    nodes = {("s", s) for s in students} | {("c", c) for c in courses}
    seen: set[tuple[str, str]] = set()
    count = 0
    for start in nodes:
        if start in seen:
            continue
        count += 1
        frontier = [start]
        seen.add(start)
        while frontier:
            node = frontier.pop()
            for nxt in adjacency.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return count


def same_component_pairs(records: list[GradeRecord]) -> set[frozenset]:
    """All unordered entity pairs that are mutually reachable."""
    adjacency: dict[tuple[str, str], set[tuple[str, str]]] = {}
    for r in records:
        a, b = ("s", r.student_id), ("c", r.course_id)
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)
    pairs: set[frozenset] = set()
    for start in adjacency:
        reached = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency[node]:
                if nxt not in reached:
                    reached.add(nxt)
                    frontier.append(nxt)
        pairs.update(frozenset((start, other)) for other in reached)
    return pairs


# ---------------------------------------------------------------------------
# least squares

def dense_ls(records: list[GradeRecord]):
    """Least squares by a dense design matrix and lstsq.

    Returns (students, courses, mu, nu, mean squared residual) with the
    minimum-norm solution shifted so the nu values average to zero globally
    (valid comparison for connected books).
    """
    students = list(dict.fromkeys(r.student_id for r in records))
    courses = list(dict.fromkeys(r.course_id for r in records))
    si = {s: i for i, s in enumerate(students)}
    ci = {c: j for j, c in enumerate(courses)}
    m, n, N = len(students), len(courses), len(records)
    A = np.zeros((N, m + n))
    b = np.empty(N)
    for k, r in enumerate(records):
        A[k, si[r.student_id]] = 1.0
        A[k, m + ci[r.course_id]] = 1.0
        b[k] = r.grade
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    mu, nu = sol[:m].copy(), sol[m:].copy()
    shift = nu.mean()
    nu -= shift
    mu += shift
    resid = b - A @ np.concatenate([mu, nu])
    return students, courses, mu, nu, float(np.mean(resid**2))


# ---------------------------------------------------------------------------
# linear programming by vertex enumeration

def enumerate_lp_optimum(c, rows, lower, upper, feas_tol=1e-7):
    """Optimal objective of min c@x over {rows, box bounds} by enumerating
    vertices (every n-subset of the hyperplane arrangement).

    Only valid for problems whose feasible region is bounded and nonempty;
    the box bounds must be finite.
    """
    c = np.asarray(c, dtype=float)
    n = len(c)
    planes = []  # (normal, offset) defining normal @ x = offset candidates
    for idx, coef, _rel, rhs in rows:
        normal = np.zeros(n)
        normal[list(idx)] = coef
        planes.append((normal, rhs))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes.append((e, lower[j]))
        planes.append((e.copy(), upper[j]))

    def feasible(x):
        for idx, coef, rel, rhs in rows:
            lhs = float(np.dot(coef, x[list(idx)]))
            if rel == "<=" and lhs > rhs + feas_tol:
                return False
            if rel == ">=" and lhs < rhs - feas_tol:
                return False
            if rel == "=" and abs(lhs - rhs) > feas_tol:
                return False
        return bool(
            np.all(x >= np.asarray(lower) - feas_tol)
            and np.all(x <= np.asarray(upper) + feas_tol)
        )

    best = None
    for combo in itertools.combinations(range(len(planes)), n):
        M = np.array([planes[i][0] for i in combo])
        rhs = np.array([planes[i][1] for i in combo])
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, rhs)
        if feasible(x):
            value = float(c @ x)
            if best is None or value < best:
                best = value
    return best


def random_boxed_lp(rng: np.random.Generator):
    """A random LP with a bounded nonempty feasible region.

    Box bounds keep the region bounded; the right-hand sides are built
    around a random interior point so the region is nonempty.  Returns
    (c, rows, lower, upper) with rows as (indices, coeffs, rel, rhs).
    """
    n = int(rng.integers(2, 5))
    n_rows = int(rng.integers(2, 7))
    lower = [-5.0] * n
    upper = [5.0] * n
    x0 = rng.uniform(-2.0, 2.0, n)
    c = rng.uniform(-2.0, 2.0, n)
    rows = []
    for _ in range(n_rows):
        coef = rng.integers(-3, 4, n).astype(float)
        if not coef.any():
            coef[int(rng.integers(0, n))] = 1.0
        kind = rng.uniform()
        lhs = float(coef @ x0)
        if kind < 0.45:
            rows.append((tuple(range(n)), tuple(coef), "<=", lhs + float(rng.uniform(0.1, 3.0))))
        elif kind < 0.9:
            rows.append((tuple(range(n)), tuple(coef), ">=", lhs - float(rng.uniform(0.1, 3.0))))
        else:
            rows.append((tuple(range(n)), tuple(coef), "=", lhs))
    return c, rows, lower, upper


# ---------------------------------------------------------------------------
# least absolute deviations by candidate enumeration

def lad_optimum(records: list[GradeRecord]) -> float:
    """Globally optimal mean absolute residual by brute force.

    Some optimal LAD solution interpolates enough records to pin down all
    parameters jointly with the per-component zero-sum constraints, so it is
    enough to enumerate record subsets of that size, solve each candidate
    linear system, and keep the best total.
    """
    students = list(dict.fromkeys(r.student_id for r in records))
    courses = list(dict.fromkeys(r.course_id for r in records))
    si = {s: i for i, s in enumerate(students)}
    ci = {c: j for j, c in enumerate(courses)}
    m, n, N = len(students), len(courses), len(records)

    comp = bfs_component_labels(records, students, courses)
    n_comp = len(set(comp.values()))
    need = m + n - n_comp

    grades = np.array([r.grade for r in records])
    rows_idx = [(si[r.student_id], m + ci[r.course_id]) for r in records]

    best = np.inf
    for subset in itertools.combinations(range(N), need):
        A = np.zeros((need + n_comp, m + n))
        b = np.zeros(need + n_comp)
        for row, k in enumerate(subset):
            i, j = rows_idx[k]
            A[row, i] = 1.0
            A[row, j] = 1.0
            b[row] = grades[k]
        for comp_id in range(n_comp):
            for c in courses:
                if comp[("c", c)] == comp_id:
                    A[need + comp_id, m + ci[c]] = 1.0
        try:
            x = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            continue
        resid = grades - np.array([x[i] + x[j] for i, j in rows_idx])
        best = min(best, float(np.mean(np.abs(resid))))
    return best


def bfs_component_labels(records, students, courses):
    """Entity -> component id, labeled in first-appearance order."""
    adjacency: dict[tuple[str, str], set[tuple[str, str]]] = {}
    order: list[tuple[str, str]] = []
    for r in records:
        a, b = ("s", r.student_id), ("c", r.course_id)
        for node in (a, b):
            if node not in adjacency:
                adjacency[node] = set()
                order.append(node)
        adjacency[a].add(b)
        adjacency[b].add(a)
    labels: dict[tuple[str, str], int] = {}
    next_label = 0
    for start in order:
        if start in labels:
            continue
        labels[start] = next_label
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adjacency[node]:
                if nxt not in labels:
                    labels[nxt] = next_label
                    frontier.append(nxt)
        next_label += 1
    return labels


# ---------------------------------------------------------------------------
# random books

def random_book_records(
    rng: np.random.Generator,
    *,
    max_students: int = 5,
    max_courses: int = 5,
    max_records: int = 20,
    grade_choices=None,
    ensure_connected: bool = False,
) -> list[GradeRecord]:
    """Random small record lists (possibly disconnected)."""
    while True:
        m = int(rng.integers(1, max_students + 1))
        n = int(rng.integers(1, max_courses + 1))
        pairs = [(i, j) for i in range(m) for j in range(n)]
        count = int(rng.integers(1, min(len(pairs), max_records) + 1))
        chosen = rng.choice(len(pairs), size=count, replace=False)
        records = []
        for k in chosen:
            i, j = pairs[int(k)]
            if grade_choices is None:
                g = float(rng.uniform(0.0, 4.0))
            else:
                g = float(grade_choices[int(rng.integers(0, len(grade_choices)))])
            records.append(GradeRecord(f"s{i}", f"c{j}", g))
        if not ensure_connected or bfs_component_count(records) == 1:
            return records
