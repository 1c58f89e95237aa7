"""Shared fixtures: the three worked example books.

The Beatle University example uses the conventional decimal ladder.  The
staircase and circulant examples are encoded with exact one-third letter
steps (B- = 8/3, B+ = 10/3, ...), which is the encoding that makes the
staircase grades exactly additive and reproduces the published estimates for
both; see the README on grade scales.
"""

from __future__ import annotations

import pytest

from uncurve import DEFAULT_SCALE, THIRDS_SCALE, GradeRecord, build_gradebook

# Tolerance for matching values published rounded to two decimals: the
# rounding half-interval plus float-representation slop for boundary cases
# like 3.175 vs a printed 3.18.
PUBLISHED_TOL = 0.005 + 1e-9

BEATLE_ROWS = {
    "John":    [("MAT", "B-"), ("CHE", "B"), ("ANT", "B+"), ("REL", "A-")],
    "Paul":    [("MAT", "C+"), ("CHE", "B-"), ("REL", "B+"), ("POL", "A-")],
    "George":  [("CHE", "C+"), ("ANT", "B-"), ("POL", "B+"), ("ECO", "A-")],
    "Ringo":   [("ANT", "C+"), ("REL", "B-"), ("POL", "B"), ("ECO", "B+")],
}

STAIRCASE_ROWS = {
    "Sean":    [("MAT", "B+"), ("CHE", "A-"), ("ANT", "A")],
    "Yoko":    [("MAT", "B"), ("CHE", "B+"), ("ANT", "A-"), ("REL", "A")],
    "John":    [("MAT", "B-"), ("CHE", "B"), ("ANT", "B+"), ("REL", "A-"), ("POL", "A")],
    "Paul":    [("CHE", "B-"), ("ANT", "B"), ("REL", "B+"), ("POL", "A-"), ("ECO", "A")],
    "George":  [("ANT", "B-"), ("REL", "B"), ("POL", "B+"), ("ECO", "A-"), ("HIS", "A")],
    "Ringo":   [("REL", "B-"), ("POL", "B"), ("ECO", "B+"), ("HIS", "A-"), ("SOC", "A")],
    "Jane":    [("POL", "B-"), ("ECO", "B"), ("HIS", "B+"), ("SOC", "A-")],
    "Heather": [("ECO", "B-"), ("HIS", "B"), ("SOC", "B+")],
}

CIRCULANT_ROWS = {
    "Sean":    [("MAT", "B+"), ("CHE", "A-"), ("ANT", "A"), ("HIS", "B-"), ("SOC", "B")],
    "Yoko":    [("MAT", "B"), ("CHE", "B+"), ("ANT", "A-"), ("REL", "A"), ("SOC", "B-")],
    "John":    [("MAT", "B-"), ("CHE", "B"), ("ANT", "B+"), ("REL", "A-"), ("POL", "A")],
    "Paul":    [("CHE", "B-"), ("ANT", "B"), ("REL", "B+"), ("POL", "A-"), ("ECO", "A")],
    "George":  [("ANT", "B-"), ("REL", "B"), ("POL", "B+"), ("ECO", "A-"), ("HIS", "A")],
    "Ringo":   [("REL", "B-"), ("POL", "B"), ("ECO", "B+"), ("HIS", "A-"), ("SOC", "A")],
    "Jane":    [("MAT", "A"), ("POL", "B-"), ("ECO", "B"), ("HIS", "B+"), ("SOC", "A-")],
    "Heather": [("MAT", "A-"), ("CHE", "A"), ("ECO", "B-"), ("HIS", "B"), ("SOC", "B+")],
}

# Published reference estimates for the three examples (to +/- 0.005).
BEATLE_MU = {"John": 3.51, "Paul": 3.16, "George": 2.84, "Ringo": 2.49}
BEATLE_NU = {
    "MAT": -0.84, "CHE": -0.50, "ANT": -0.18,
    "REL": +0.18, "POL": +0.50, "ECO": +0.84,
}
BEATLE_GPA = {"John": 3.18, "Paul": 3.00, "George": 3.00, "Ringo": 2.83}
# Course averages recomputed from the grades; the published table agrees on
# every course except CHE, where it prints 2.70 for a column whose grades
# (B, B-, C+) average 8.0/3 = 2.67 -- an arithmetic slip in the source.
BEATLE_AVG = {
    "MAT": 2.50, "CHE": 8.0 / 3, "ANT": 2.77,
    "REL": 3.23, "POL": 3.33, "ECO": 3.50,
}

STAIRCASE_MU = {
    "Sean": 4.50, "Yoko": 4.17, "John": 3.83, "Paul": 3.50,
    "George": 3.17, "Ringo": 2.83, "Jane": 2.50, "Heather": 2.17,
}
STAIRCASE_NU = {
    "MAT": -1.17, "CHE": -0.83, "ANT": -0.50, "REL": -0.17,
    "POL": +0.17, "ECO": +0.50, "HIS": +0.83, "SOC": +1.17,
}


def records_from_rows(rows, scale):
    return [
        GradeRecord(student, course, scale.points(letter))
        for student, courses in rows.items()
        for course, letter in courses
    ]


def book_from_rows(rows, scale):
    return build_gradebook(records_from_rows(rows, scale))


@pytest.fixture(scope="session")
def beatle_book():
    return book_from_rows(BEATLE_ROWS, DEFAULT_SCALE)


@pytest.fixture(scope="session")
def staircase_book():
    return book_from_rows(STAIRCASE_ROWS, THIRDS_SCALE)


@pytest.fixture(scope="session")
def circulant_book():
    return book_from_rows(CIRCULANT_ROWS, THIRDS_SCALE)
