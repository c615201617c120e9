"""Acceptance battery: one test per criterion, each printing a single pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines; criterion 8
(TDW brute-force oracle) dominates the runtime at about three minutes.
"""

import pytest

from reprolab.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("cid", sorted(CRITERIA), ids=[f"criterion{c:02d}" for c in sorted(CRITERIA)])
def test_criterion(cid, capsys):
    res = run_criterion(cid)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.error is None, res.error
    failed = [c.to_dict() for c in res.checks if not c.passed]
    assert res.passed, failed
