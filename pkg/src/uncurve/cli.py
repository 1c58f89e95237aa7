"""Command-line interface: ingest grade records, fit, render ranked reports.

Input files hold one record per line -- student id, course id, grade --
separated by whitespace or commas, with ``#`` starting a comment.  Grades are
numeric GPA points or letters resolved through the active scale.  Reports
are written as two ranked text tables (courses by rising inflatedness,
students by falling aptitude) plus a full-precision CSV; diagnostics go to
standard error.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable

from .lad import fit_lad_alternating, fit_lad_lp
from .lsq import FitResult, fit_ls
from .model import (
    DEFAULT_SCALE,
    GradeBook,
    GradeDataError,
    GradeRecord,
    GradeScale,
    build_gradebook,
)
from .simulate import SyntheticSpec, generate, recovery_metrics

__all__ = [
    "ParseError",
    "ReportRow",
    "parse_input_file",
    "render_records",
    "load_scale_file",
    "course_report",
    "student_report",
    "estimates_csv",
    "main",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_DATA",
    "EXIT_SOLVER",
]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

_METHODS = {
    "ls": fit_ls,
    "lad": fit_lad_lp,
    "lad-alt": fit_lad_alternating,
}


class ParseError(GradeDataError):
    """Malformed input line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class ReportRow:
    """One rendered report line: entity, estimate, error bar, grade count."""

    entity_id: str
    estimate: float
    stderr: float
    count: int

    def render(self, width: int, *, signed: bool) -> str:
        est = f"{self.estimate:+.2f}" if signed else f"{self.estimate:.2f}"
        return (
            f"{self.entity_id:<{width}}  {est:>7} ± {self.stderr:5.2f}  "
            f"{self.count:6d}"
        )


def _split_fields(line: str) -> list[str]:
    if "," in line:
        return [f.strip() for f in line.split(",")]
    return line.split()


def _parse_grade(token: str, scale: GradeScale, line_no: int, strict_range: bool) -> float:
    try:
        value = float(token)
    except ValueError:
        try:
            return scale.points(token)
        except GradeDataError:
            raise ParseError(line_no, f"unrecognized grade {token!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ParseError(line_no, f"non-finite grade {token!r}")
    if strict_range and not scale.min_points <= value <= scale.max_points:
        raise ParseError(
            line_no,
            f"grade {token!r} outside scale range "
            f"[{scale.min_points}, {scale.max_points}]",
        )
    return value


def _iter_lines(source: str | Path | IO[str]) -> Iterable[str]:
    if hasattr(source, "read"):
        yield from source
    else:
        with open(source, "r", encoding="utf-8") as handle:
            yield from handle


def parse_input_file(
    source: str | Path | IO[str],
    scale: GradeScale = DEFAULT_SCALE,
    *,
    strict_range: bool = False,
) -> GradeBook:
    """Read a record file (or stream) into a grade book.

    Every parse error names its line; duplicate (student, course) pairs are
    rejected by the book builder.  With ``strict_range`` numeric grades must
    fall inside the active scale's range; otherwise any finite number is
    accepted, since registrar conventions vary.
    """
    records: list[GradeRecord] = []
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = _split_fields(line)
        if len(fields) != 3:
            raise ParseError(
                line_no, f"expected 3 fields (student course grade), got {len(fields)}"
            )
        student, course, grade_token = fields
        grade = _parse_grade(grade_token, scale, line_no, strict_range)
        records.append(GradeRecord(student, course, grade))
    if not records:
        raise GradeDataError("input contains no grade records")
    return build_gradebook(records)


def render_records(book: GradeBook) -> str:
    """Inverse of parsing: one whitespace-separated record per line.

    Grades are written with ``repr`` so numeric values round-trip exactly.
    """
    return "".join(
        f"{r.student_id} {r.course_id} {r.grade!r}\n" for r in book.records
    )


def load_scale_file(path: str | Path) -> GradeScale:
    """Read a letter-grade ladder override.

    Each line is ``LETTER POINTS`` (points may be a decimal or a p/q
    fraction); append ``alias`` to add a synonym outside the strictly
    decreasing ladder, e.g. ``A+ 4.0 alias``.
    """
    ladder: list[tuple[str, float]] = []
    aliases: list[tuple[str, float]] = []
    for line_no, raw in enumerate(_iter_lines(path), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (2, 3) or (len(fields) == 3 and fields[2] != "alias"):
            raise ParseError(line_no, f"expected 'LETTER POINTS [alias]': {line!r}")
        try:
            points = float(Fraction(fields[1]))
        except (ValueError, ZeroDivisionError):
            raise ParseError(line_no, f"bad points value {fields[1]!r}") from None
        (aliases if len(fields) == 3 else ladder).append((fields[0], points))
    return GradeScale(ladder=tuple(ladder), aliases=tuple(aliases))


def _report(
    rows: list[ReportRow], heading: str, notes: tuple[str, ...], *, signed: bool
) -> str:
    width = max((len(r.entity_id) for r in rows), default=2)
    width = max(width, 2)
    lines = [f"# {heading}"]
    lines.extend(f"# {note}" for note in notes)
    lines.extend(row.render(width, signed=signed) for row in rows)
    return "\n".join(lines) + "\n"


def course_report(fit: FitResult, *, min_enrollment: int = 1) -> str:
    """Courses sorted by rising inflatedness (ties broken by id)."""
    rows = [
        ReportRow(c, fit.nu[c], fit.stderr_nu[c], fit.counts_nu[c])
        for c in sorted(fit.nu, key=lambda c: (fit.nu[c], c))
        if fit.counts_nu[c] >= min_enrollment
    ]
    return _report(
        rows,
        f"course inflatedness ({fit.method}); columns: id, estimate ± stderr, enrollment",
        fit.notes,
        signed=True,
    )


def student_report(fit: FitResult, *, min_enrollment: int = 1) -> str:
    """Students sorted by falling aptitude (ties broken by id)."""
    rows = [
        ReportRow(s, fit.mu[s], fit.stderr_mu[s], fit.counts_mu[s])
        for s in sorted(fit.mu, key=lambda s: (-fit.mu[s], s))
        if fit.counts_mu[s] >= min_enrollment
    ]
    return _report(
        rows,
        f"student aptitude ({fit.method}); columns: id, estimate ± stderr, grade count",
        fit.notes,
        signed=False,
    )


def estimates_csv(fit: FitResult) -> str:
    """All estimates at full precision, students then courses."""
    lines = ["entity_type,id,estimate,stderr,count"]
    for s in sorted(fit.mu, key=lambda s: (-fit.mu[s], s)):
        lines.append(
            f"student,{s},{fit.mu[s]!r},{fit.stderr_mu[s]!r},{fit.counts_mu[s]}"
        )
    for c in sorted(fit.nu, key=lambda c: (fit.nu[c], c)):
        lines.append(
            f"course,{c},{fit.nu[c]!r},{fit.stderr_nu[c]!r},{fit.counts_nu[c]}"
        )
    return "\n".join(lines) + "\n"


def _print_diagnostics(fit: FitResult) -> None:
    err = sys.stderr
    print(f"method: {fit.method}", file=err)
    if fit.components > 1:
        print(
            f"warning: {fit.components} disconnected components; "
            "estimates are not comparable across components",
            file=err,
        )
    else:
        print("components: 1", file=err)
    state = "converged" if fit.converged else "NOT CONVERGED"
    print(f"iterations: {fit.iterations} ({state})", file=err)
    print(f"objective: {fit.objective:.6g}", file=err)
    print(f"scale: {fit.scale:.6g}", file=err)
    for note in fit.notes:
        print(f"note: {note}", file=err)


def _write_reports(fit: FitResult, outdir: Path, min_enrollment: int) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "courses.txt").write_text(
        course_report(fit, min_enrollment=min_enrollment), encoding="utf-8"
    )
    (outdir / "students.txt").write_text(
        student_report(fit, min_enrollment=min_enrollment), encoding="utf-8"
    )
    (outdir / "estimates.csv").write_text(estimates_csv(fit), encoding="utf-8")


def cmd_fit(args: argparse.Namespace) -> int:
    scale = load_scale_file(args.scale) if args.scale else DEFAULT_SCALE
    book = parse_input_file(args.input, scale, strict_range=args.strict_range)
    fit = _METHODS[args.method](book)
    _print_diagnostics(fit)
    _write_reports(fit, Path(args.output), args.min_enrollment)
    if not fit.converged:
        print("error: solver did not converge", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _parse_enrollment(text: str) -> int | tuple[int, int]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return int(lo), int(hi)
    return int(text)


def cmd_simulate(args: argparse.Namespace) -> int:
    scale = load_scale_file(args.scale) if args.scale else DEFAULT_SCALE
    spec = SyntheticSpec(
        students=args.students,
        courses=args.courses,
        enrollment=_parse_enrollment(args.per_student),
        noise_sigma=args.sigma,
        seed=args.seed,
        quantize=scale if args.quantize else None,
    )
    school = generate(spec)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    out_file = outdir / "grades.txt"
    out_file.write_text(render_records(school.book), encoding="utf-8")
    if not school.connected:
        print("warning: generated book is not connected", file=sys.stderr)
    print(
        f"wrote {school.book.num_records} grades for "
        f"{school.book.num_students} students in "
        f"{school.book.num_courses} courses to {out_file}"
    )
    if args.fit:
        fit = _METHODS[args.method](school.book)
        _print_diagnostics(fit)
        metrics = recovery_metrics(school.book, school.mu, school.nu, fit)
        print(
            "recovery: "
            f"rmse_mu={metrics.rmse_mu:.3e} "
            f"max_abs_mu={metrics.max_abs_mu:.3e} "
            f"rmse_nu={metrics.rmse_nu:.3e} "
            f"max_abs_nu={metrics.max_abs_nu:.3e} "
            f"rank_correlation_mu={metrics.rank_correlation_mu:.6f}"
        )
        if not fit.converged:
            print("error: solver did not converge", file=sys.stderr)
            return EXIT_SOLVER
    return EXIT_OK


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage errors, not argparse's 2
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="uncurve",
        description=(
            "Fit grade records to the additive aptitude + inflatedness model "
            "and rank students and courses on the adjusted estimates."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a grade file and write reports")
    fit.add_argument("--input", required=True, help="grade record file")
    fit.add_argument(
        "--method", choices=sorted(_METHODS), default="ls",
        help="ls = least squares, lad = LAD linear program, "
             "lad-alt = alternating medians",
    )
    fit.add_argument("--scale", help="letter ladder override file")
    fit.add_argument(
        "--min-enrollment", type=int, default=1, metavar="K",
        help="hide report rows backed by fewer than K grades (fit unaffected)",
    )
    fit.add_argument(
        "--strict-range", action="store_true",
        help="reject numeric grades outside the scale range",
    )
    fit.add_argument("--output", default=".", help="report directory")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="generate a synthetic school")
    sim.add_argument("--students", type=int, required=True)
    sim.add_argument("--courses", type=int, required=True)
    sim.add_argument(
        "--per-student", required=True,
        help="courses per student: a count like 5 or a range like 4:6",
    )
    sim.add_argument("--sigma", type=float, default=0.0, help="noise scale")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument(
        "--quantize", action="store_true",
        help="snap generated grades to the letter ladder",
    )
    sim.add_argument("--scale", help="letter ladder override file")
    sim.add_argument("--fit", action="store_true", help="fit and report recovery")
    sim.add_argument("--method", choices=sorted(_METHODS), default="ls")
    sim.add_argument("--output", default=".", help="output directory")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except GradeDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
