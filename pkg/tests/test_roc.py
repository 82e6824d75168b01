import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from harqpred import ConfigurationError, DomainError, RocCurve, RocSet, ValidationError, binormal_curve, fn_at
from harqpred.roc import chance_curve, load_roc_set, save_roc_set
from oracles import binormal_fn, interp_fn


def test_chance_diagonal():
    assert fn_at(RocCurve([(0, 1), (1, 0)]), 0.3) == pytest.approx(0.7, abs=1e-15)


def test_exact_at_knots():
    c = RocCurve([(0.0, 0.6), (0.2, 0.3), (0.5, 0.1)])
    assert fn_at(c, 0.0) == 0.6
    assert fn_at(c, 0.2) == 0.3
    assert c.points[-1] == (1.0, 0.0)


def test_closure_adds_endpoints():
    c = RocCurve([(0.2, 0.5)])
    assert c.points == [(0.0, 1.0), (0.2, 0.5), (1.0, 0.0)]


def test_curve_validation():
    with pytest.raises(ConfigurationError):
        RocCurve([])
    with pytest.raises(ConfigurationError):
        RocCurve([(0.1, 0.2), (0.3, 0.4)])
    with pytest.raises(ConfigurationError):
        RocCurve([(0.3, 0.2), (0.3, 0.1)])
    with pytest.raises(DomainError):
        fn_at(chance_curve(), 1.2)


def test_binormal_zero_separation_is_chance():
    c = binormal_curve(0.0, knots=51)
    assert np.max(np.abs(np.array(c.p_fn) - (1.0 - np.array(c.p_fp)))) <= 1e-12


def test_binormal_known_values():
    assert fn_at(binormal_curve(1.0), 0.5) == pytest.approx(norm.cdf(-1.0), abs=1e-12)
    assert fn_at(binormal_curve(6.0), 0.01) < 1e-3
    assert fn_at(binormal_curve(2.0), 0.1) == pytest.approx(binormal_fn(2.0, 0.1), abs=1e-9)
    with pytest.raises(DomainError):
        binormal_curve(-0.5)


@pytest.mark.parametrize("d", [0.5, 2.0, 4.0])
def test_binormal_against_quadrature(d):
    c = binormal_curve(d, knots=21)
    for x, y in c.points:
        assert y == pytest.approx(binormal_fn(d, x), abs=1e-9)


def test_binormal_approaches_perfect():
    c = binormal_curve(float("inf"))
    assert max(c.p_fn) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 1.0)), min_size=1, max_size=8))
def test_interpolation_monotone_and_bounded(raw):
    xs = sorted({round(x, 6) for x, _ in raw})
    ys = sorted((y for _, y in raw), reverse=True)[: len(xs)]
    ys += [ys[-1]] * (len(xs) - len(ys))
    c = RocCurve(list(zip(xs, ys)))
    grid = np.linspace(0.0, 1.0, 1000)
    vals = fn_at(c, grid)
    assert np.all(np.diff(vals) <= 0.0)
    pts = c.points
    for x in grid[::37]:
        lo = max(i for i, p in enumerate(pts) if p[0] <= x)
        hi = min(i for i, p in enumerate(pts) if p[0] >= x)
        assert pts[hi][1] - 1e-15 <= fn_at(c, x) <= pts[lo][1] + 1e-15
        assert fn_at(c, x) == pytest.approx(interp_fn(pts, x), abs=1e-12)


def _roc_text(rows):
    return "rv_index,p_fp,p_fn\n" + "".join(f"{r},{x},{y}\n" for r, x, y in rows)


def test_load_well_formed():
    rows = [(rv, x, 1 - x) for rv in range(1, 5) for x in (0.0, 0.5, 1.0)]
    roc = load_roc_set(io.StringIO(_roc_text(rows)))
    assert len(roc) == 4


def test_load_rejects_increasing_fn_naming_rv():
    rows = [(1, 0.1, 0.5), (1, 0.2, 0.4), (2, 0.1, 0.3), (2, 0.2, 0.6)]
    with pytest.raises(ValidationError, match="RV 2"):
        load_roc_set(io.StringIO(_roc_text(rows)))


@pytest.mark.parametrize(
    "text, where",
    [
        ("rv_index,p_fp,p_fn\n1,0.1,0.5\n3,0.1,0.5\n", "missing"),
        ("rv_index,p_fp,p_fn\n1,0.1,0.5\n1,abc,0.5\n", ":3"),
        ("rv_index,p_fp,p_fn\n1,0.2,0.5\n1,0.1,0.6\n", ":3"),
        ("rv_index,p_fp,p_fn\n1,0.2,1.5\n", ":2"),
        ("rv,fp,fn\n1,0.2,0.5\n", ":1"),
        ("rv_index,p_fp,p_fn\n1,0.2\n", ":2"),
        ("", "header"),
    ],
)
def test_load_rejects_malformed(text, where):
    with pytest.raises(ValidationError, match=where):
        load_roc_set(io.StringIO(text))


def test_round_trip(tmp_path):
    roc = RocSet((binormal_curve(2.0, 17), binormal_curve(3.3, 9), RocCurve([(0.1, 0.7), (0.4, 0.2)])))
    path = tmp_path / "roc.csv"
    save_roc_set(roc, path)
    back = load_roc_set(path)
    for a, b in zip(roc.curves, back.curves):
        assert fn_at(b, np.array(a.p_fp)) == pytest.approx(np.array(a.p_fn), abs=1e-12)


def test_rocset_false_negatives_shape():
    roc = RocSet.uniform(chance_curve(), 3)
    assert roc.false_negatives([0.1, 0.2, 0.3]) == pytest.approx([0.9, 0.8, 0.7])
    with pytest.raises(ConfigurationError):
        roc.false_negatives([0.1, 0.2])
