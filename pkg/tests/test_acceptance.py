"""All twelve acceptance criteria at their stated tolerances, one PASS/FAIL line each.

The grid preset defaults to "full"; set PLURIPOT_PRESET=fast for the quicker grids.
"""

import os

import pytest

from pluripot import acceptance

PRESET = os.environ.get("PLURIPOT_PRESET", "full")
_cache: dict = {}


@pytest.mark.parametrize("number", range(1, 13))
def test_criterion(number, capsys):
    r = acceptance.run_criterion(number, PRESET, _cache)
    with capsys.disabled():
        print("\n" + r.line())
        if not r.passed:
            for d in r.details:
                print("    " + d)
    assert r.passed, r.line()
