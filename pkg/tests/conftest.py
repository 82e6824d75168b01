import pytest

from harqpred.roc import RocCurve, RocSet

# filled by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE = {}


def point_curve(fp, fn):
    """A valid ROC curve passing exactly through ``(fp, fn)``."""
    if fp == 0.0:
        return RocCurve([(0.0, fn), (1.0, 0.0)])
    if fp == 1.0:
        return RocCurve([(0.0, 1.0), (1.0, fn)])
    return RocCurve([(0.0, 1.0), (fp, fn), (1.0, 0.0)])


def point_rocs(p_fp, p_fn):
    return RocSet(tuple(point_curve(a, b) for a, b in zip(p_fp, p_fn)))


@pytest.fixture
def scenario_factory():
    from harqpred.model import ErrorProfile, Scenario

    def make(eps, delay, budget=None, target=0.5, roc=None, n_bits=1000, p_rv=1.0):
        budget = budget if budget is not None else max(len(eps), delay + 1)
        return Scenario(budget, delay, n_bits, p_rv, target, ErrorProfile(tuple(eps)), roc)

    return make


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
