"""The thirteen acceptance criteria, each run at its stated tolerance.

One line per criterion is printed to the terminal (bypassing output capture) and
collected in ``acceptance_summary``; every criterion is also a separate test.
"""

import pytest

from se3conv.verify import ACCEPTANCE, get_check, run_check

_RESULTS = {}


def _criterion(n):
    if n not in _RESULTS:
        _RESULTS[n] = [run_check(get_check(name)) for name in ACCEPTANCE[n]]
    return _RESULTS[n]


def _line(n, results):
    status = "PASS" if all(r.passed for r in results) else "FAIL"
    detail = "; ".join(f"{r.name} err={r.max_abs_error:.3e} tol={r.tolerance:.3e}" for r in results)
    return f"criterion {n:2d}: {status}  {detail}"


@pytest.mark.parametrize("n", sorted(ACCEPTANCE))
def test_criterion(n, capsys):
    results = _criterion(n)
    with capsys.disabled():
        print("\n" + _line(n, results))
    for r in results:
        assert r.passed, r.line()


def test_acceptance_summary(capsys):
    lines = [_line(n, _criterion(n)) for n in sorted(ACCEPTANCE)]
    with capsys.disabled():
        print("\n" + "\n".join(lines))
    assert all(" PASS " in s for s in lines)
