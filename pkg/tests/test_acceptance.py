"""Acceptance suite: one test per criterion, each printing its pass/fail
line. The same functions back the ``dagci selftest`` subcommand.
"""

import time

import pytest

from dagci import selftest


def _run(criterion):
    start = time.monotonic()
    result = criterion()
    elapsed = time.monotonic() - start
    status = "PASS" if result.passed else "FAIL"
    print(f"{status} {result.name} ({elapsed:.1f}s): {result.detail}")
    assert result.passed, f"{result.name}: {result.detail}"
    return elapsed


def test_criterion_1_dsep_soundness():
    elapsed = _run(selftest.criterion_1_dsep_soundness)
    assert elapsed < 60


def test_criterion_2_oracle_completeness():
    elapsed = _run(selftest.criterion_2_oracle_completeness)
    assert elapsed < 300


def test_criterion_3_dsep_cross_validation():
    _run(selftest.criterion_3_dsep_cross_validation)


def test_criterion_4_combination_phenomenon():
    elapsed = _run(selftest.criterion_4_combination_phenomenon)
    assert elapsed < 1


def test_criterion_5_smaller_support():
    elapsed = _run(selftest.criterion_5_smaller_support)
    assert elapsed < 120


def test_criterion_6_iid_extension():
    elapsed = _run(selftest.criterion_6_iid_extension)
    assert elapsed < 60


def test_criterion_7_sufficient_statistics():
    _run(selftest.criterion_7_sufficient_statistics)


def test_criterion_8_reduction_fixture():
    elapsed = _run(selftest.criterion_8_reduction_fixture)
    assert elapsed < 30


def test_criterion_9_rewriting_witness():
    elapsed = _run(selftest.criterion_9_rewriting_witness)
    assert elapsed < 120


def test_criterion_10_inclusion():
    elapsed = _run(selftest.criterion_10_inclusion)
    assert elapsed < 60
