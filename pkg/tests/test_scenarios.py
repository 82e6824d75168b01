from pathlib import Path

import pytest

from harqpred import ValidationError, evaluate_proactive
from harqpred.roc import save_roc_set, RocSet, binormal_curve
from harqpred.scenarios import default_pack_path, load_scenarios, lognormal_profile

DATA = Path(__file__).parent / "data"


def _write(tmp_path, text, name="s.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


BASE = """\
version: 1
scenarios:
  - id: a
    delay_budget: 6
    feedback_delays: [1, 2]
    eps_targets: [0.1]
    n_bits: [100, 200]
    profile:
{profile}
{extra}
"""


def test_small_file_expands():
    f = load_scenarios(DATA / "small.yaml")
    assert len(f) == 4 + 4
    assert f.cases[0].id == "tiny/fb1/t0.05/b500"
    assert f.cases[-1].id == "syn/fb3/t0.01/b360"
    assert f.cases[-1].scenario.roc is not None and f.cases[0].scenario.roc is None


def test_default_pack_is_synthetic_and_valid():
    f = load_scenarios(default_pack_path())
    assert "SYNTHETIC" in f.label
    assert len(f) == 4 * 3 * 4 + 8 * 3 * 4
    budgets = {c.scenario.delay_budget for c in f.cases}
    assert budgets == {14, 28}
    delays = {c.scenario.delay_budget: set() for c in f.cases}
    for c in f.cases:
        delays[c.scenario.delay_budget].add(c.scenario.feedback_delay)
    assert delays == {14: {2, 3, 4, 5}, 28: set(range(5, 13))}


def test_profile_sources_agree(tmp_path):
    prof = lognormal_profile(2.0, 0.4, 6)
    (tmp_path / "p.csv").write_text("rv_index,eps\n" + "".join(f"{i},{e!r}\n" for i, e in enumerate(prof.eps, 1)))
    inline = "      eps: [" + ", ".join(repr(e) for e in prof.eps) + "]"
    synth = "      synthetic: {family: lognormal, m50: 2.0, spread: 0.4}"
    filed = "      file: p.csv"
    evs = []
    for spec in (inline, synth, filed):
        f = load_scenarios(_write(tmp_path, BASE.format(profile=spec, extra="")))
        evs.append(evaluate_proactive(f.cases[0].scenario))
    assert evs[0] == evs[1] == evs[2]


def test_roc_file_source(tmp_path):
    save_roc_set(RocSet.uniform(binormal_curve(2.0, 11), 6), tmp_path / "roc.csv")
    extra = "    roc: {file: roc.csv}"
    f = load_scenarios(_write(tmp_path, BASE.format(profile="      eps: [0.5, 0.4, 0.3, 0.2, 0.1, 0.0]", extra=extra)))
    assert len(f.cases[0].scenario.roc) == 6


@pytest.mark.parametrize(
    "profile, extra, match",
    [
        ("      eps: [0.5, 0.4, 0.3, 0.2, 0.1, 0.1, 0.0]", "", "7 RVs"),
        ("      eps: [0.5, 1.4]", "", "eps"),
        ("      file: missing.csv", "", "cannot read"),
        ("      eps: [0.5, 0.4, 0.1]", "    roc: {file: nope.csv}", "not found"),
        ("      eps: [0.5, 0.4, 0.1]", "    roc: {binormal: {dprime: [1, 2]}}", "dprime list"),
        ("      eps: [0.5, 0.4, 0.1]", "    operating_point: [0.1]", "operating_point"),
        ("      eps: [0.5, 0.4, 0.1]", "    schedule: [3, 3]", "slots"),
        ("      synthetic: {family: weibull, m50: 2}", "", "family"),
        ("      eps: [0.5]\n      file: x.csv", "", "exactly one"),
        ("      eps: [0.5, 0.4, 0.1]", "    colour: red", "unknown keys"),
    ],
)
def test_validation_errors_carry_location(tmp_path, profile, extra, match):
    with pytest.raises(ValidationError, match=match) as info:
        load_scenarios(_write(tmp_path, BASE.format(profile=profile, extra=extra)))
    assert str(tmp_path) in str(info.value)


def test_delay_not_below_budget_is_rejected(tmp_path):
    text = BASE.format(profile="      eps: [0.5, 0.1]", extra="").replace("[1, 2]", "[2, 6]")
    with pytest.raises(ValidationError, match=r"s.yaml:3: a/fb6.*feedback_delay"):
        load_scenarios(_write(tmp_path, text))


def test_yaml_syntax_error_location(tmp_path):
    with pytest.raises(ValidationError, match=r"s.yaml:\d+"):
        load_scenarios(_write(tmp_path, "scenarios: [\n  - {id: a\n"))


def test_profile_file_errors(tmp_path):
    (tmp_path / "p.csv").write_text("rv_index,eps\n1,0.5\n3,0.4\n")
    with pytest.raises(ValidationError, match=r"p.csv:3"):
        load_scenarios(_write(tmp_path, BASE.format(profile="      file: p.csv", extra="")))
