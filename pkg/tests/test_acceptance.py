"""End-to-end acceptance battery: one test per numbered criterion.

Each test prints a single ``criterion NN [PASS|FAIL] name`` line and
asserts the criterion's own verdict, so ``pytest -v`` gives one line per
criterion and the details dict is attached to any failure message.
"""

import pytest

from biqsp import acceptance


@pytest.mark.parametrize("cid", sorted(acceptance.CRITERIA))
def test_criterion(cid):
    fn, _tags = acceptance.CRITERIA[cid]
    result = fn()
    verdict = "PASS" if result["passed"] else "FAIL"
    print(f"criterion {cid:02d} [{verdict}] {result['name']}")
    assert result["passed"], (
        f"criterion {cid:02d} ({result['name']}) failed: "
        f"{result['details']}")


def test_subset_filter_matches_tags():
    results = acceptance.run_all(subset="sos")
    assert [r["id"] for r in results] == [2, 8]
