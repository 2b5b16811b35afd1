"""Randomised property suites, 200 generated cases each."""

import pytest

from properties import SUITES, run_suite


@pytest.mark.parametrize("name,strategy,check", SUITES, ids=[s[0] for s in SUITES])
def test_property(name, strategy, check):
    assert run_suite(strategy, check) >= 200
