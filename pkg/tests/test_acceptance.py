"""Acceptance suite: one test per criterion, one printed line per criterion.

Run with `pytest -s tests/test_acceptance.py` to see the pass/fail lines as
they complete; the suite takes a couple of minutes.  All criteria run at
their pinned tolerances from one fixed master seed (the statistical checks
are exact-level tests, so the suite is deterministic).
"""

import pytest

from celldiv.acceptance import CRITERIA, DEFAULT_SEED, run_acceptance

NAMES = {
    1: "fragmentation dislocation law",
    2: "geometric vs abstract fragmentation chain",
    3: "poisson division counts",
    4: "typical-cell volume law",
    5: "reference-model cell volume variability",
    6: "backward zero-cell chain time law",
    7: "explosion diagnostic verdicts",
    8: "zero-cell law and scaling",
    9: "oracle identities and reproducibility",
}


@pytest.fixture(scope="session")
def results():
    out = {r.number: r for r in run_acceptance(seed=DEFAULT_SEED)}
    return out


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, results):
    r = results[number]
    print("\n" + r.report())
    assert r.name == NAMES[number]
    assert r.passed, r.report()
