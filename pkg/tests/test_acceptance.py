"""Acceptance criteria 1-10 at the full level, one PASS/FAIL line each."""

import sys

import pytest

from kawahara.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number, "full")
    # written past the capture so the line lands in the log with or without -s
    with capsys.disabled():
        sys.stdout.write("\n" + result.line() + "\n")
        sys.stdout.flush()
    assert result.error is None, result.error
    assert result.passed, result.line()
