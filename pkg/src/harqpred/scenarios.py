"""Scenario files: a YAML vocabulary for batches of HARQ scenarios.

A file holds a list of scenario entries. Each entry fixes the delay
budget, energy per RV, error profile and (optionally) predictor ROCs, and
lists feedback delays, BLER targets and payload sizes; the entry expands
to their Cartesian product::

    version: 1
    label: free text
    scenarios:
      - id: short
        delay_budget: 14
        feedback_delays: [2, 3, 4, 5]
        eps_targets: [0.1, 0.01]
        n_bits: [360, 1000]
        p_rv: 1.0
        profile:
          synthetic: {family: lognormal, m50: 3.0, spread: 0.35}
        roc:
          binormal: {dprime: 4.0, knots: 101}

Profiles come from ``eps: [...]`` (inline), ``file: path`` (CSV with
header ``rv_index,eps``) or ``synthetic``. ``by_n_bits`` maps payload
sizes to separate profile sources. ROCs come from ``file: path`` (see
:func:`harqpred.roc.load_roc_set`) or ``binormal`` with a scalar or
per-RV ``dprime``. Optional ``operating_point`` and ``schedule`` pin the
predictive operating point and reactive schedule instead of optimizing.
Relative paths resolve against the scenario file's directory.

The whole file is validated before anything is returned.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from scipy.stats import norm

from .errors import HarqError, ValidationError
from .model import ErrorProfile, OperatingPoint, Scenario, evaluate_reactive
from .roc import RocSet, binormal_curve, load_roc_set

__all__ = [
    "ScenarioCase",
    "ScenarioFile",
    "load_scenarios",
    "default_pack_path",
    "lognormal_profile",
    "PROFILE_HEADER",
]

FORMAT_VERSION = 1
PROFILE_HEADER = ("rv_index", "eps")

_ENTRY_KEYS = {
    "id", "delay_budget", "feedback_delays", "eps_targets", "n_bits", "p_rv",
    "profile", "roc", "operating_point", "schedule",
}


class _Mapping(dict):
    line = None


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    out = _Mapping(loader.construct_mapping(node, deep=True))
    out.line = node.start_mark.line + 1
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


@dataclass(frozen=True)
class ScenarioCase:
    """One expanded scenario plus the pinned solutions, if any."""

    id: str
    group: str
    scenario: Scenario
    location: str
    op_point: OperatingPoint | None = None
    schedule: tuple[int, ...] | None = None


@dataclass(frozen=True)
class ScenarioFile:
    path: str
    label: str
    cases: tuple[ScenarioCase, ...]

    def __len__(self):
        return len(self.cases)


def default_pack_path() -> Path:
    """Location of the bundled synthetic scenario pack."""
    return Path(str(resources.files("harqpred") / "data" / "default_pack.yaml"))


def lognormal_profile(m50: float, spread: float, n: int) -> ErrorProfile:
    """Synthetic waterfall: failure after ``m`` RVs is ``Phi((ln m50 - ln m) / spread)``.

    ``m50`` is the (fractional) RV count at which half the blocks decode.
    """
    if not (m50 > 0 and spread > 0 and n >= 1):
        raise ValueError("need m50 > 0, spread > 0 and n >= 1")
    m = np.arange(1, n + 1, dtype=float)
    return ErrorProfile.from_cumulative(norm.cdf((math.log(m50) - np.log(m)) / spread).tolist())


def _load_profile_file(path, where):
    eps = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read profile file ({exc.strerror})", where) from None
    with fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    if not rows or tuple(c.strip().lower() for c in rows[0][1]) != PROFILE_HEADER:
        raise ValidationError(f"expected header {','.join(PROFILE_HEADER)}", f"{path}:1")
    for expected, (line, row) in enumerate(rows[1:], start=1):
        try:
            rv, e = int(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise ValidationError("malformed row", f"{path}:{line}") from None
        if rv != expected:
            raise ValidationError(f"expected rv_index {expected}, got {rv}", f"{path}:{line}")
        if not 0.0 <= e <= 1.0:
            raise ValidationError("eps must lie in [0, 1]", f"{path}:{line}")
        eps.append(e)
    if not eps:
        raise ValidationError("profile file has no rows", str(path))
    return ErrorProfile(tuple(eps))


def _require(mapping, key, where):
    if key not in mapping:
        raise ValidationError(f"missing key '{key}'", where)
    return mapping[key]


def _single_key(spec, options, what, where):
    if not isinstance(spec, dict):
        raise ValidationError(f"{what} must be a mapping", where)
    keys = [k for k in options if k in spec]
    if len(keys) != 1 or len(spec) != 1:
        raise ValidationError(f"{what} needs exactly one of {', '.join(options)}", where)
    return keys[0], spec[keys[0]]


def _guarded(build, where):
    try:
        return build()
    except ValidationError:
        raise
    except (HarqError, TypeError, ValueError) as exc:
        raise ValidationError(str(exc), where) from None


def _profile(spec, base, budget, where):
    return _guarded(lambda: _build_profile(spec, base, budget, where), where)


def _roc(spec, base, n, where):
    return _guarded(lambda: _build_roc(spec, base, n, where), where)


def _build_profile(spec, base, budget, where):
    kind, value = _single_key(spec, ("eps", "file", "synthetic"), "profile", where)
    if kind == "eps":
        if not isinstance(value, list):
            raise ValidationError("profile eps must be a list", where)
        return ErrorProfile(tuple(float(v) for v in value))
    if kind == "file":
        return _load_profile_file(base / str(value), where)
    if not isinstance(value, dict):
        raise ValidationError("synthetic profile must be a mapping", where)
    family = value.get("family", "lognormal")
    if family != "lognormal":
        raise ValidationError(f"unknown profile family '{family}'", where)
    unknown = set(value) - {"family", "m50", "spread", "n"}
    if unknown:
        raise ValidationError(f"unknown synthetic profile keys {sorted(unknown)}", where)
    n = int(value.get("n", budget))
    return lognormal_profile(float(_require(value, "m50", where)), float(_require(value, "spread", where)), n)


def _build_roc(spec, base, n, where):
    kind, value = _single_key(spec, ("file", "binormal"), "roc", where)
    if kind == "file":
        path = base / str(value)
        if not path.is_file():
            raise ValidationError(f"ROC file not found: {path}", where)
        return load_roc_set(path)
    if not isinstance(value, dict):
        raise ValidationError("binormal roc must be a mapping", where)
    dprime = _require(value, "dprime", where)
    knots = int(value.get("knots", 101))
    if isinstance(dprime, list):
        if len(dprime) != n:
            raise ValidationError(f"dprime list has {len(dprime)} entries, profile has {n} RVs", where)
        return RocSet(tuple(binormal_curve(float(d), knots) for d in dprime))
    return RocSet.uniform(binormal_curve(float(dprime), knots), n)


def _as_list(entry, key, where, cast):
    value = _require(entry, key, where)
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ValidationError(f"'{key}' is empty", where)
    try:
        return [cast(v) for v in values]
    except (TypeError, ValueError):
        raise ValidationError(f"'{key}' has a non-numeric entry", where) from None


def _integer(v):
    if isinstance(v, bool) or not float(v).is_integer():
        raise ValueError(v)
    return int(v)


def _target_tag(t):
    return format(t, "g")


def _expand(entry, index, name, base):
    where = f"{name}:{getattr(entry, 'line', None) or '?'}"
    if not isinstance(entry, dict):
        raise ValidationError("scenario entry must be a mapping", where)
    unknown = set(entry) - _ENTRY_KEYS
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)}", where)
    group = str(entry.get("id", f"s{index}"))
    budget = _as_list(entry, "delay_budget", where, _integer)
    if len(budget) != 1:
        raise ValidationError("delay_budget must be a single integer", where)
    budget = budget[0]
    delays = _as_list(entry, "feedback_delays", where, _integer)
    targets = _as_list(entry, "eps_targets", where, float)
    bits = _as_list(entry, "n_bits", where, _integer)
    try:
        p_rv = float(entry.get("p_rv", 1.0))
    except (TypeError, ValueError):
        raise ValidationError("'p_rv' must be a number", where) from None

    pspec = _require(entry, "profile", where)
    pwhere = f"{name}:{getattr(pspec, 'line', None) or where.rsplit(':', 1)[1]}"
    if isinstance(pspec, dict) and "by_n_bits" in pspec:
        table = pspec["by_n_bits"]
        if len(pspec) != 1 or not isinstance(table, dict):
            raise ValidationError("by_n_bits must be the only profile key and a mapping", pwhere)
        missing = [b for b in bits if b not in table]
        if missing:
            raise ValidationError(f"by_n_bits lacks payload sizes {missing}", pwhere)
        profiles = {b: _profile(table[b], base, budget, pwhere) for b in bits}
    else:
        shared = _profile(pspec, base, budget, pwhere)
        profiles = {b: shared for b in bits}

    rocs = {}
    if entry.get("roc") is not None:
        rwhere = f"{name}:{getattr(entry['roc'], 'line', None) or where.rsplit(':', 1)[1]}"
        cache = {}
        for b, prof in profiles.items():
            if prof.n not in cache:
                cache[prof.n] = _roc(entry["roc"], base, prof.n, rwhere)
            rocs[b] = cache[prof.n]

    op_point = None
    if entry.get("operating_point") is not None:
        try:
            op_point = OperatingPoint(tuple(float(v) for v in entry["operating_point"]))
        except (TypeError, ValueError, HarqError) as exc:
            raise ValidationError(f"bad operating_point ({exc})", where) from None
    schedule = None
    if entry.get("schedule") is not None:
        try:
            schedule = tuple(_integer(v) for v in entry["schedule"])
        except (TypeError, ValueError):
            raise ValidationError("schedule entries must be integers", where) from None

    cases = []
    for delay, target, b in itertools.product(delays, targets, bits):
        cid = f"{group}/fb{delay}/t{_target_tag(target)}/b{b}"
        try:
            sc = Scenario(budget, delay, b, p_rv, target, profiles[b], rocs.get(b))
        except HarqError as exc:
            raise ValidationError(f"{cid}: {exc}", where) from None
        if op_point is not None and len(op_point) != sc.n:
            raise ValidationError(f"{cid}: operating_point has {len(op_point)} entries, need {sc.n}", where)
        if schedule is not None:
            try:
                evaluate_reactive(sc, schedule)
            except HarqError as exc:
                raise ValidationError(f"{cid}: {exc}", where) from None
        cases.append(ScenarioCase(cid, group, sc, where, op_point, schedule))
    return cases


def load_scenarios(path) -> ScenarioFile:
    """Parse and fully validate a scenario file.

    Raises ValidationError (with ``file:line`` location) on the first
    problem found; nothing is computed for a file that fails validation.
    """
    path = Path(path)
    name = str(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file ({exc.strerror})", name) from None
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{name}:{mark.line + 1}" if mark is not None else name
        raise ValidationError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", loc) from None
    if not isinstance(doc, dict):
        raise ValidationError("top level must be a mapping", name)
    version = doc.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValidationError(f"unsupported format version {version!r}", name)
    entries = doc.get("scenarios")
    if not isinstance(entries, list) or not entries:
        raise ValidationError("'scenarios' must be a non-empty list", name)
    cases = []
    for i, entry in enumerate(entries):
        cases.extend(_expand(entry, i, name, path.parent))
    seen = set()
    for case in cases:
        if case.id in seen:
            raise ValidationError(f"duplicate scenario id {case.id}", case.location)
        seen.add(case.id)
    return ScenarioFile(name, str(doc.get("label", "")), tuple(cases))
