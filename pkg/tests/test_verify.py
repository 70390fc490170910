import pytest

from se3conv.verify import ACCEPTANCE, SUITES, all_checks, get_check, run_check, run_suite

ACCEPTANCE_NAMES = {n for names in ACCEPTANCE.values() for n in names}
OTHER = [c.name for c in all_checks() if c.name not in ACCEPTANCE_NAMES]


def test_registry_consistent():
    names = [c.name for c in all_checks()]
    assert len(names) == len(set(names))
    assert ACCEPTANCE_NAMES <= set(names)
    assert {c.suite for c in all_checks()} <= set(SUITES)
    assert sorted(ACCEPTANCE) == list(range(1, 14))


@pytest.mark.parametrize("name", OTHER)
def test_supporting_check_passes(name):
    res = run_check(get_check(name))
    assert res.passed, res.line()


def test_seeded_runs_repeat():
    c = get_check("cg_orthogonality")
    assert run_check(c, seed=5).max_abs_error == run_check(c, seed=5).max_abs_error


def test_tolerance_override_and_unknown_suite():
    rep = run_suite("clebsch", tolerance=-1.0)
    assert rep.n_passed == 0 and len(rep.checks) > 0
    with pytest.raises(KeyError):
        run_suite("nope")
    with pytest.raises(KeyError):
        get_check("nope")
