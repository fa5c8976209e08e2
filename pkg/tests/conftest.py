"""Test-wide fixtures. Support helpers live in support.py next to this file."""

import re

import pytest

from remis.model import ProcessEntity, ProcessModel, Relation

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_0?(\d+)")


def pytest_runtest_logreport(report):
    """One verdict line per acceptance criterion, visible in any run."""
    match = _CRITERION.search(report.nodeid)
    if match is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\ncriterion {match.group(1)}: {outcome}")


@pytest.fixture
def base_model() -> ProcessModel:
    return ProcessModel(
        (
            ProcessEntity("A1", "activity", (("name", "Design"),)),
            ProcessEntity("A2", "activity", (("name", "Coding"),)),
            ProcessEntity("D1", "artifact", (("name", "Design Document"),)),
        ),
        (
            Relation("follows", "A2", "A1"),
            Relation("produces", "A1", "D1"),
        ),
    )


@pytest.fixture
def fixed_clock():
    return lambda: "2026-08-14T12:00:00Z"
