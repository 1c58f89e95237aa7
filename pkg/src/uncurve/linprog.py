"""Self-contained linear programming support for the LAD fits.

The solver is a bounded-variable revised simplex: every constraint row gets a
slack variable (inequality slacks are sign-restricted, equality slacks are
fixed at zero), phase 1 drives artificial variables out where the all-slack
basis is infeasible, and phase 2 minimizes the real objective.  Pricing is
Dantzig (most negative reduced cost) with Bland's smallest-index rule engaged
after a run of degenerate pivots, which guarantees termination.  The basis
factorization is an explicit dense inverse at desk scale and a sparse LU with
product-form eta updates for larger instances; both are refreshed
periodically to bound drift.

Determinism: for a fixed problem (and optional warm basis) every pivot
decision is a pure function of the data, so repeated solves return identical
solutions and iteration counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

__all__ = [
    "LpProblem",
    "LpConstraint",
    "LpSolution",
    "lp_solve",
    "slack_column",
    "to_lp_text",
    "FEASIBILITY_TOL",
    "OPTIMALITY_TOL",
]

# All solver tolerances live here.
FEASIBILITY_TOL = 1e-8    # absolute bound/constraint violation allowed
OPTIMALITY_TOL = 1e-9     # reduced-cost threshold for entering candidates
PIVOT_TOL = 1e-9          # smallest |w| admitted to the ratio test
RATIO_TIE_TOL = 1e-9      # blocking ratios within this of the min tie
DEGENERATE_STEP = 1e-10   # a step this small counts as degenerate
BLAND_TRIGGER = 40        # consecutive degenerate pivots before Bland's rule
INFEASIBILITY_TOL = 1e-7  # phase-1 objective above this means infeasible
DENSE_ROW_LIMIT = 1200    # basis rows at or below this use the dense inverse
DENSE_REFACTOR = 500      # pivots between dense refactorizations
SPARSE_REFACTOR = 64      # eta updates between sparse refactorizations
ITERATION_CAP_FACTOR = 50  # cap = factor * (rows + cols)

_BASIC, _AT_LOWER, _AT_UPPER, _FREE = 0, 1, 2, 3

_RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True)
class LpConstraint:
    """One sparse constraint row: sum(coeffs * x[indices]) REL rhs."""

    indices: tuple[int, ...]
    coeffs: tuple[float, ...]
    rel: str
    rhs: float


@dataclass(frozen=True, eq=False)
class LpProblem:
    """A minimization LP with sparse rows and per-variable bounds.

    ``lower``/``upper`` may use ``-inf``/``+inf`` for unbounded directions.
    Malformed input (bad indices, non-finite coefficients, crossed bounds)
    raises ValueError at construction time.
    """

    objective: tuple[float, ...]
    constraints: tuple[LpConstraint, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.objective)
        if n == 0:
            raise ValueError("LP needs at least one variable")
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bounds must match the variable count")
        if self.names is not None and len(self.names) != n:
            raise ValueError("names must match the variable count")
        if not all(np.isfinite(c) for c in self.objective):
            raise ValueError("objective coefficients must be finite")
        for lo, up in zip(self.lower, self.upper):
            if np.isnan(lo) or np.isnan(up) or lo > up:
                raise ValueError(f"invalid bounds [{lo}, {up}]")
        for row in self.constraints:
            if row.rel not in _RELATIONS:
                raise ValueError(f"unknown relation {row.rel!r}")
            if len(row.indices) != len(row.coeffs) or not row.indices:
                raise ValueError("constraint row must pair indices with coeffs")
            if len(set(row.indices)) != len(row.indices):
                raise ValueError("constraint row repeats a variable index")
            if any(i < 0 or i >= n for i in row.indices):
                raise ValueError("constraint row references an unknown variable")
            if not all(np.isfinite(c) for c in row.coeffs) or not np.isfinite(row.rhs):
                raise ValueError("constraint coefficients and rhs must be finite")

    @property
    def num_variables(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome.

    ``status`` is one of ``optimal``, ``unbounded``, ``infeasible``,
    ``iteration-limit``.  ``x`` holds the structural variable values of the
    final iterate (meaningful as an optimal point only when status is
    optimal); ``objective`` is its objective value (nan when infeasible).
    """

    status: str
    x: np.ndarray
    objective: float
    iterations: int


def slack_column(problem: LpProblem, row: int) -> int:
    """Standard-form column index of the slack attached to ``row``.

    The solver appends one slack per constraint after the structural
    variables, in row order; warm-start bases use this numbering.
    """
    if not 0 <= row < problem.num_rows:
        raise ValueError(f"row {row} out of range")
    return problem.num_variables + row


class _DenseBasis:
    """Explicit dense basis inverse with Gauss-Jordan rank-one updates."""

    def __init__(self, A: sp.csc_matrix):
        self.A = A
        self.Binv: np.ndarray | None = None
        self.pivots_since_factor = 0

    def factor(self, basis: np.ndarray) -> None:
        dense = self.A[:, basis].toarray()
        self.Binv = np.linalg.inv(dense)  # raises LinAlgError if singular
        self.pivots_since_factor = 0

    def ftran(self, v: np.ndarray) -> np.ndarray:
        return self.Binv @ v

    def btran(self, v: np.ndarray) -> np.ndarray:
        return self.Binv.T @ v

    def update(self, w: np.ndarray, p: int) -> None:
        r = self.Binv[p] / w[p]
        self.Binv -= np.outer(w, r)
        self.Binv[p] = r
        self.pivots_since_factor += 1

    @property
    def needs_refactor(self) -> bool:
        return self.pivots_since_factor >= DENSE_REFACTOR


class _SparseLuBasis:
    """Sparse LU of the basis plus a product-form eta file.

    After a pivot replacing basic position p with a column whose ftran image
    is w, solves are corrected by the eta transformation (p, w); the LU is
    rebuilt once the eta file grows past SPARSE_REFACTOR.
    """

    def __init__(self, A: sp.csc_matrix):
        self.A = A
        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []

    def factor(self, basis: np.ndarray) -> None:
        B = self.A[:, basis].tocsc()
        self.lu = splu(B)  # RuntimeError if singular
        self.etas = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        x = self.lu.solve(np.asarray(v, dtype=np.float64))
        for p, w in self.etas:
            xp = x[p] / w[p]
            x -= w * xp
            x[p] = xp
        return x

    def btran(self, v: np.ndarray) -> np.ndarray:
        u = np.array(v, dtype=np.float64, copy=True)
        for p, w in reversed(self.etas):
            u[p] = (u[p] - (w @ u - w[p] * u[p])) / w[p]
        return self.lu.solve(u, trans="T")

    def update(self, w: np.ndarray, p: int) -> None:
        self.etas.append((p, w.copy()))

    @property
    def needs_refactor(self) -> bool:
        return len(self.etas) >= SPARSE_REFACTOR


class _SingularBasis(Exception):
    pass


class _Simplex:
    """One solve of a standard-form LP: A x = b with bounded variables."""

    def __init__(
        self,
        A: sp.csc_matrix,
        b: np.ndarray,
        lower: np.ndarray,
        upper: np.ndarray,
        iteration_cap: int,
    ):
        self.A = A
        self.b = b
        self.lower = lower
        self.upper = upper
        self.nrows, self.ncols = A.shape
        self.cap = iteration_cap
        self.iterations = 0
        self.basis = np.empty(self.nrows, dtype=np.intp)
        self.status = np.empty(self.ncols, dtype=np.int8)
        self.x = np.zeros(self.ncols)
        backend = _DenseBasis if self.nrows <= DENSE_ROW_LIMIT else _SparseLuBasis
        self.backend = backend(A)
        self.fixed = upper - lower <= 0.0

    # -- state helpers ----------------------------------------------------

    def place_nonbasic(self, j: int, value: float | None = None) -> None:
        """Set nonbasic status (and value) for column j from its bounds."""
        lo, up = self.lower[j], self.upper[j]
        if value is not None and np.isinf(lo) and np.isinf(up):
            self.status[j] = _FREE
            self.x[j] = value
        elif np.isfinite(lo):
            self.status[j] = _AT_LOWER
            self.x[j] = lo
        elif np.isfinite(up):
            self.status[j] = _AT_UPPER
            self.x[j] = up
        else:
            self.status[j] = _FREE
            self.x[j] = 0.0

    def refactor(self) -> None:
        try:
            self.backend.factor(self.basis)
        except (np.linalg.LinAlgError, RuntimeError) as exc:
            raise _SingularBasis(str(exc)) from exc
        self.recompute_basics()

    def recompute_basics(self) -> None:
        xn = self.x.copy()
        xn[self.basis] = 0.0
        rhs = self.b - self.A @ xn
        self.x[self.basis] = self.backend.ftran(rhs)

    def basic_infeasibility(self) -> float:
        xb = self.x[self.basis]
        lo, up = self.lower[self.basis], self.upper[self.basis]
        return float(
            max(np.max(np.maximum(lo - xb, 0.0), initial=0.0),
                np.max(np.maximum(xb - up, 0.0), initial=0.0))
        )

    # -- core loop ---------------------------------------------------------

    def run_phase(self, c: np.ndarray) -> str:
        """Iterate to optimality for objective c; returns a status token."""
        degenerate_streak = 0
        fresh_factor = True
        while True:
            if self.iterations >= self.cap:
                return "iteration-limit"
            if self.backend.needs_refactor:
                self.refactor()
                fresh_factor = True

            y = self.backend.btran(c[self.basis])
            d = c - self.A.T @ y
            bland = degenerate_streak >= BLAND_TRIGGER
            q, sigma = self._choose_entering(d, bland)
            if q < 0:
                if fresh_factor:
                    return "optimal"
                # Confirm optimality against a fresh factorization.
                self.refactor()
                fresh_factor = True
                continue

            w = self._column(q)
            t_star, p, flip, unbounded = self._ratio_test(q, sigma, w, bland)
            if unbounded:
                return "unbounded"

            self.x[q] += sigma * t_star
            if t_star != 0.0:
                self.x[self.basis] -= (sigma * t_star) * w
            self.iterations += 1
            degenerate_streak = 0 if t_star > DEGENERATE_STEP else degenerate_streak + 1

            if flip:
                self.status[q] = _AT_UPPER if self.status[q] == _AT_LOWER else _AT_LOWER
                self.x[q] = self.upper[q] if self.status[q] == _AT_UPPER else self.lower[q]
                continue

            leaving = int(self.basis[p])
            if sigma * w[p] > 0:
                self.status[leaving] = _AT_LOWER
                self.x[leaving] = self.lower[leaving]
            else:
                self.status[leaving] = _AT_UPPER
                self.x[leaving] = self.upper[leaving]
            self.basis[p] = q
            self.status[q] = _BASIC
            self.backend.update(w, p)
            fresh_factor = False

    def _column(self, q: int) -> np.ndarray:
        a_q = np.zeros(self.nrows)
        start, end = self.A.indptr[q], self.A.indptr[q + 1]
        a_q[self.A.indices[start:end]] = self.A.data[start:end]
        return self.backend.ftran(a_q)

    def _choose_entering(self, d: np.ndarray, bland: bool) -> tuple[int, int]:
        """Pick the entering column and its direction (+1 grow, -1 shrink)."""
        viol = np.zeros(self.ncols)
        eligible = (self.status != _BASIC) & ~self.fixed
        at_lo = eligible & (self.status == _AT_LOWER) & (d < -OPTIMALITY_TOL)
        at_up = eligible & (self.status == _AT_UPPER) & (d > OPTIMALITY_TOL)
        free = eligible & (self.status == _FREE) & (np.abs(d) > OPTIMALITY_TOL)
        viol[at_lo] = -d[at_lo]
        viol[at_up] = d[at_up]
        viol[free] = np.abs(d[free])
        if not viol.any():
            return -1, 0
        if bland:
            q = int(np.argmax(viol > 0.0))
        else:
            q = int(np.argmax(viol))
        if self.status[q] == _AT_LOWER or (self.status[q] == _FREE and d[q] < 0):
            return q, +1
        return q, -1

    def _ratio_test(
        self, q: int, sigma: int, w: np.ndarray, bland: bool
    ) -> tuple[float, int, bool, bool]:
        """Largest admissible step; returns (step, leaving pos, flip?, unbounded?)."""
        xb = self.x[self.basis]
        rate = sigma * w  # decrease rate of each basic value
        ratios = np.full(self.nrows, np.inf)
        dec = rate > PIVOT_TOL
        inc = rate < -PIVOT_TOL
        with np.errstate(invalid="ignore"):
            ratios[dec] = (xb[dec] - self.lower[self.basis[dec]]) / rate[dec]
            ratios[inc] = (xb[inc] - self.upper[self.basis[inc]]) / rate[inc]
        np.maximum(ratios, 0.0, out=ratios)
        t_block = float(ratios.min()) if self.nrows else np.inf

        lo_q, up_q = self.lower[q], self.upper[q]
        t_flip = up_q - lo_q if np.isfinite(up_q) and np.isfinite(lo_q) else np.inf

        if not np.isfinite(t_block) and not np.isfinite(t_flip):
            return 0.0, -1, False, True
        if t_flip <= t_block:
            return float(t_flip), -1, True, False

        ties = np.flatnonzero(ratios <= t_block + RATIO_TIE_TOL)
        if bland:
            p = ties[np.argmin(self.basis[ties])]
        else:
            p = ties[np.argmax(np.abs(w[ties]))]
        return t_block, int(p), False, False


def _assemble(problem: LpProblem) -> tuple[sp.csc_matrix, np.ndarray, np.ndarray, np.ndarray]:
    """Standard form: structural columns then one slack per row."""
    n, m = problem.num_variables, problem.num_rows
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    b = np.zeros(m)
    lower = np.full(n + m, -np.inf)
    upper = np.full(n + m, np.inf)
    lower[:n] = problem.lower
    upper[:n] = problem.upper
    for k, con in enumerate(problem.constraints):
        rows.extend([k] * len(con.indices))
        cols.extend(con.indices)
        vals.extend(con.coeffs)
        rows.append(k)
        cols.append(n + k)
        vals.append(1.0)
        b[k] = con.rhs
        if con.rel == "<=":
            lower[n + k], upper[n + k] = 0.0, np.inf
        elif con.rel == ">=":
            lower[n + k], upper[n + k] = -np.inf, 0.0
        else:
            lower[n + k], upper[n + k] = 0.0, 0.0
    A = sp.coo_matrix((vals, (rows, cols)), shape=(m, n + m)).tocsc()
    return A, b, lower, upper


def _solve_unconstrained(problem: LpProblem) -> LpSolution:
    """Boxes only: each variable independently hugs its cheap bound."""
    c = np.asarray(problem.objective)
    lower = np.asarray(problem.lower)
    upper = np.asarray(problem.upper)
    x = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
    for j in range(len(c)):
        if c[j] > 0:
            if not np.isfinite(lower[j]):
                return LpSolution("unbounded", x, float("-inf"), 0)
            x[j] = lower[j]
        elif c[j] < 0:
            if not np.isfinite(upper[j]):
                return LpSolution("unbounded", x, float("-inf"), 0)
            x[j] = upper[j]
    return LpSolution("optimal", x, float(c @ x), 0)


def lp_solve(
    problem: LpProblem,
    *,
    warm_basis: list[int] | None = None,
    warm_values: np.ndarray | None = None,
    max_iterations: int | None = None,
) -> LpSolution:
    """Minimize the problem's objective with the revised simplex.

    ``warm_basis`` optionally names one standard-form column per row (see
    ``slack_column`` for the numbering) to start from; ``warm_values`` then
    supplies structural variable values for the nonbasic columns (free
    nonbasic variables rest at their given value).  A singular or infeasible
    warm basis silently falls back to the cold two-phase start.  Fixed pivot
    rules make the solve deterministic.
    """
    if problem.num_rows == 0:
        return _solve_unconstrained(problem)
    A, b, lower, upper = _assemble(problem)
    n, m = problem.num_variables, problem.num_rows
    cap = (
        max_iterations
        if max_iterations is not None
        else ITERATION_CAP_FACTOR * (m + n)
    )
    c_real = np.zeros(n + m)
    c_real[:n] = problem.objective

    solver = _warm_started(problem, A, b, lower, upper, cap, warm_basis, warm_values)
    if solver is None:
        solver, phase1_status = _cold_started(A, b, lower, upper, cap, n, m)
        if phase1_status is not None:
            return _finish(problem, solver, phase1_status, c_real, n)

    c = np.zeros(solver.ncols)
    c[:n] = problem.objective
    status = solver.run_phase(c)
    return _finish(problem, solver, status, c_real, n)


def _warm_started(problem, A, b, lower, upper, cap, warm_basis, warm_values):
    """Try to seat the caller's basis; return a ready solver or None."""
    if warm_basis is None:
        return None
    n, m = problem.num_variables, problem.num_rows
    basis = np.asarray(warm_basis, dtype=np.intp)
    if basis.shape != (m,) or len(np.unique(basis)) != m:
        return None
    if basis.min() < 0 or basis.max() >= n + m:
        return None
    solver = _Simplex(A, b, lower, upper, cap)
    solver.basis = basis.copy()
    values = np.zeros(n) if warm_values is None else np.asarray(warm_values, dtype=np.float64)
    if values.shape != (n,):
        return None
    in_basis = np.zeros(n + m, dtype=bool)
    in_basis[basis] = True
    for j in range(n + m):
        if in_basis[j]:
            solver.status[j] = _BASIC
            continue
        solver.place_nonbasic(j, values[j] if j < n else None)
    try:
        solver.refactor()
    except _SingularBasis:
        return None
    if solver.basic_infeasibility() > 10 * FEASIBILITY_TOL:
        return None
    return solver


def _cold_started(A, b, lower, upper, cap, n, m):
    """All-slack start; adds artificials and runs phase 1 where needed.

    Returns (solver, early_status); early_status is "infeasible" when
    phase 1 cannot reach zero, "iteration-limit" if it ran out of pivots,
    else None.
    """
    probe = _Simplex(A, b, lower, upper, cap)
    for j in range(n + m):
        probe.place_nonbasic(j)
    xn = probe.x.copy()
    residual = b - A @ xn

    art_rows: list[int] = []
    art_signs: list[float] = []
    for k in range(m):
        r = residual[k]
        s_lo, s_up = lower[n + k], upper[n + k]
        if r < s_lo - FEASIBILITY_TOL or r > s_up + FEASIBILITY_TOL:
            art_rows.append(k)
            art_signs.append(1.0 if r > 0 else -1.0)

    if not art_rows:
        solver = _Simplex(A, b, lower, upper, cap)
        for j in range(n + m):
            solver.place_nonbasic(j)
        solver.basis = np.arange(n, n + m, dtype=np.intp)
        solver.status[n:] = _BASIC
        solver.refactor()
        return solver, None

    n_art = len(art_rows)
    art = sp.coo_matrix(
        (art_signs, (art_rows, range(n_art))), shape=(m, n_art)
    ).tocsc()
    A_ext = sp.hstack([A, art], format="csc")
    lower_ext = np.concatenate([lower, np.zeros(n_art)])
    upper_ext = np.concatenate([upper, np.full(n_art, np.inf)])
    solver = _Simplex(A_ext, b, lower_ext, upper_ext, cap)
    for j in range(n + m):
        solver.place_nonbasic(j)
    basis = np.arange(n, n + m, dtype=np.intp)
    for idx, k in enumerate(art_rows):
        basis[k] = n + m + idx
    solver.basis = basis
    solver.status[basis] = _BASIC
    solver.refactor()

    c1 = np.zeros(n + m + n_art)
    c1[n + m:] = 1.0
    status = solver.run_phase(c1)
    if status == "iteration-limit":
        return solver, "iteration-limit"
    if status == "unbounded":  # cannot happen: phase 1 is bounded below
        raise RuntimeError("phase 1 reported unbounded")
    if float(c1 @ solver.x) > INFEASIBILITY_TOL:
        return solver, "infeasible"
    # Freeze the artificials at zero for phase 2.
    solver.lower[n + m:] = 0.0
    solver.upper[n + m:] = 0.0
    solver.fixed[n + m:] = True
    _drive_out_artificials(solver, n + m)
    return solver, None


def _drive_out_artificials(solver: _Simplex, first_artificial: int) -> None:
    """Pivot basic artificials (at zero) out where a structural column can
    replace them; rows with no candidate are redundant and keep theirs."""
    for p in range(solver.nrows):
        col = int(solver.basis[p])
        if col < first_artificial:
            continue
        e_p = np.zeros(solver.nrows)
        e_p[p] = 1.0
        row = solver.backend.btran(e_p)
        alphas = solver.A.T @ row
        alphas[first_artificial:] = 0.0
        alphas[solver.basis] = 0.0
        j = int(np.argmax(np.abs(alphas)))
        if abs(alphas[j]) <= PIVOT_TOL:
            continue
        w = solver._column(j)
        solver.status[col] = _AT_LOWER
        solver.x[col] = 0.0
        solver.basis[p] = j
        solver.status[j] = _BASIC
        solver.backend.update(w, p)
        if solver.backend.needs_refactor:
            solver.refactor()


def _finish(problem, solver, status, c_real, n) -> LpSolution:
    x = solver.x[:n].copy()
    if status == "infeasible":
        return LpSolution("infeasible", x, float("nan"), solver.iterations)
    if status == "unbounded":
        return LpSolution("unbounded", x, float("-inf"), solver.iterations)
    objective = float(c_real[:n] @ x)
    return LpSolution(status, x, objective, solver.iterations)


def to_lp_text(problem: LpProblem) -> str:
    """Render the problem in the conventional LP text format.

    Developer tooling for cross-checking against external solvers; variable
    names default to x0, x1, ... when the problem carries none.
    """
    names = problem.names or tuple(f"x{j}" for j in range(problem.num_variables))

    def term(coef: float, name: str, first: bool) -> str:
        sign = "-" if coef < 0 else ("" if first else "+")
        return f"{sign} {abs(coef):.12g} {name}"

    lines = ["Minimize", " obj:"]
    parts = [
        term(c, names[j], j == 0)
        for j, c in enumerate(problem.objective)
        if c != 0
    ] or ["0 " + names[0]]
    lines[1] += " " + " ".join(parts)
    lines.append("Subject To")
    rel_text = {"<=": "<=", ">=": ">=", "=": "="}
    for k, con in enumerate(problem.constraints):
        body = " ".join(
            term(c, names[j], i == 0)
            for i, (j, c) in enumerate(zip(con.indices, con.coeffs))
        )
        lines.append(f" c{k}: {body} {rel_text[con.rel]} {con.rhs:.12g}")
    lines.append("Bounds")
    for j in range(problem.num_variables):
        lo, up = problem.lower[j], problem.upper[j]
        if np.isinf(lo) and np.isinf(up):
            lines.append(f" {names[j]} free")
        elif np.isinf(up):
            lines.append(f" {names[j]} >= {lo:.12g}")
        elif np.isinf(lo):
            lines.append(f" {names[j]} <= {up:.12g}")
        else:
            lines.append(f" {lo:.12g} <= {names[j]} <= {up:.12g}")
    lines.append("End")
    return "\n".join(lines) + "\n"
