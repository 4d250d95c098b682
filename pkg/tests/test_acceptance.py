"""The twelve acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line (visible with ``pytest -s`` and in the
captured output of failures) and asserts the verdict.
"""
import pytest

from gbelab.acceptance import CHECKS, run_check


@pytest.mark.slow
@pytest.mark.parametrize("number", [c[0] for c in CHECKS],
                         ids=[f"{c[0]:02d}-{c[1].replace(' ', '-')}" for c in CHECKS])
def test_acceptance(number):
    r = run_check(number)
    print(r.line())
    assert r.passed, r.line()
