"""Per-RV false-positive / false-negative tradeoff of a decodability predictor.

A predictor that answers ACK/NACK for an RV cannot drive both error types
to zero; lowering its threshold trades false negatives (NACK although the
block is decodable) for false positives (ACK although it is not). Each RV
index has its own curve because a separate predictor is trained per
subcode length.

Curve files are plain CSV with a header row::

    rv_index,p_fp,p_fn
    1,0.0,1.0
    1,0.05,0.31
    ...

Rows are sorted by ``(rv_index, p_fp)``; RV indices start at 1 and must
not have gaps.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm

from .errors import ConfigurationError, DomainError, ValidationError

__all__ = [
    "RocCurve",
    "RocSet",
    "fn_at",
    "binormal_curve",
    "chance_curve",
    "perfect_curve",
    "load_roc_set",
    "save_roc_set",
]

ROC_HEADER = ("rv_index", "p_fp", "p_fn")


def _close(points):
    # Boundary operating points must stay reachable for the optimizer.
    pts = list(points)
    if not pts or pts[0][0] > 0.0:
        pts.insert(0, (0.0, 1.0))
    if pts[-1][0] < 1.0:
        pts.append((1.0, 0.0))
    return pts


def _check_points(points):
    """Return a message describing the first invariant violation, or None."""
    for k, (x, y) in enumerate(points):
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            return f"knot {k} ({x!r}, {y!r}) outside [0, 1]"
    for k in range(1, len(points)):
        if not points[k][0] > points[k - 1][0]:
            return f"p_fp not strictly increasing at knot {k}"
        if points[k][1] > points[k - 1][1]:
            return f"p_fn increases with p_fp at knot {k}"
    return None


@dataclass(frozen=True)
class RocCurve:
    """Monotone mapping from false-positive to false-negative probability.

    Construct with any ordered knot list; the endpoints ``(0, 1)`` and
    ``(1, 0)`` are appended when no knot sits at ``p_fp = 0`` or ``p_fp = 1``.
    """

    p_fp: tuple[float, ...]
    p_fn: tuple[float, ...]

    def __init__(self, points: Iterable[Sequence[float]]):
        raw = [(float(x), float(y)) for x, y in points]
        if not raw:
            raise ConfigurationError("ROC curve has no knots")
        pts = _close(raw)
        problem = _check_points(pts)
        if problem is not None:
            raise ConfigurationError(f"invalid ROC curve: {problem}")
        object.__setattr__(self, "p_fp", tuple(p[0] for p in pts))
        object.__setattr__(self, "p_fn", tuple(p[1] for p in pts))

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.p_fp, self.p_fn))

    def __len__(self):
        return len(self.p_fp)

    def __call__(self, p_fp):
        return fn_at(self, p_fp)


def fn_at(curve: RocCurve, p_fp):
    """False-negative probability at the given false-positive probability.

    Linear interpolation between the two bracketing knots; exact at knots.
    Accepts scalars or arrays.
    """
    if len(curve.p_fp) == 0:
        raise ConfigurationError("ROC curve has no knots")
    x = np.asarray(p_fp, dtype=float)
    if np.any(~((x >= 0.0) & (x <= 1.0))):
        raise DomainError(f"p_fp must lie in [0, 1], got {p_fp!r}")
    y = np.interp(x, curve.p_fp, curve.p_fn)
    return float(y) if y.ndim == 0 else y


@dataclass(frozen=True)
class RocSet:
    """One curve per RV index (``curves[0]`` belongs to RV 1)."""

    curves: tuple[RocCurve, ...]

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        if not self.curves:
            raise ConfigurationError("ROC set is empty")

    def __len__(self):
        return len(self.curves)

    def false_negatives(self, p_fp) -> np.ndarray:
        """Vector of P_fn for a full vector of per-RV P_fp values."""
        p_fp = np.asarray(p_fp, dtype=float)
        if p_fp.shape[-1] != len(self.curves):
            raise ConfigurationError(
                f"operating point has {p_fp.shape[-1]} entries, ROC set has {len(self.curves)}"
            )
        out = np.empty_like(p_fp)
        for i, curve in enumerate(self.curves):
            out[..., i] = fn_at(curve, p_fp[..., i])
        return out

    @classmethod
    def uniform(cls, curve: RocCurve, n: int) -> "RocSet":
        return cls((curve,) * n)


def binormal_curve(dprime: float, knots: int = 101) -> RocCurve:
    """Equal-variance binormal ROC with separation ``dprime``.

    Scores of undecodable blocks are N(0, 1), of decodable blocks N(d', 1);
    thresholding at tau gives ``p_fp = 1 - Phi(tau)`` and
    ``p_fn = Phi(tau - d')``.
    """
    if not dprime >= 0.0:
        raise DomainError(f"dprime must be non-negative, got {dprime!r}")
    if knots < 2:
        raise DomainError(f"need at least 2 knots, got {knots}")
    x = np.linspace(0.0, 1.0, int(knots))
    if math.isinf(dprime):
        y = np.zeros_like(x)
    else:
        y = norm.cdf(norm.isf(x) - dprime)
    # isf(0) = inf and isf(1) = -inf already give the exact endpoints
    y = np.minimum.accumulate(np.clip(y, 0.0, 1.0))
    return RocCurve(zip(x.tolist(), y.tolist()))


def chance_curve() -> RocCurve:
    """Uninformative predictor: ``p_fn = 1 - p_fp``."""
    return RocCurve([(0.0, 1.0), (1.0, 0.0)])


def perfect_curve() -> RocCurve:
    """Error-free predictor: ``p_fn = 0`` already at ``p_fp = 0``."""
    return RocCurve([(0.0, 0.0), (1.0, 0.0)])


def _rows(source):
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            yield from enumerate(csv.reader(fh), start=1)
    else:
        yield from enumerate(csv.reader(source), start=1)


def load_roc_set(source) -> RocSet:
    """Read a ROC CSV (path or open text stream) into a validated RocSet.

    Raises ValidationError naming the line or RV index on malformed rows,
    unsorted or non-monotone curves, or gaps in the RV indices.
    """
    name = str(source) if isinstance(source, (str, Path)) else getattr(source, "name", "<stream>")
    by_rv: dict[int, list[tuple[float, float]]] = {}
    last_key = None
    header_seen = False
    for line, row in _rows(source):
        if not row or all(not c.strip() for c in row):
            continue
        cells = [c.strip() for c in row]
        if not header_seen:
            if tuple(c.lower() for c in cells) != ROC_HEADER:
                raise ValidationError(f"expected header {','.join(ROC_HEADER)}", f"{name}:{line}")
            header_seen = True
            continue
        if len(cells) != 3:
            raise ValidationError(f"expected 3 columns, got {len(cells)}", f"{name}:{line}")
        try:
            rv = int(cells[0])
            x, y = float(cells[1]), float(cells[2])
        except ValueError as exc:
            raise ValidationError(f"malformed row ({exc})", f"{name}:{line}") from None
        if not (math.isfinite(x) and math.isfinite(y)) or not (0 <= x <= 1 and 0 <= y <= 1):
            raise ValidationError("probabilities must lie in [0, 1]", f"{name}:{line}")
        if rv < 1:
            raise ValidationError("rv_index starts at 1", f"{name}:{line}")
        key = (rv, x)
        if last_key is not None and key <= last_key:
            raise ValidationError("rows not sorted by (rv_index, p_fp)", f"{name}:{line}")
        last_key = key
        by_rv.setdefault(rv, []).append((x, y))
    if not header_seen:
        raise ValidationError("missing header row", name)
    if not by_rv:
        raise ValidationError("no curve rows", name)
    expected = list(range(1, max(by_rv) + 1))
    missing = sorted(set(expected) - set(by_rv))
    if missing:
        raise ValidationError(f"RV indices missing: {missing}", name)
    curves = []
    for rv in expected:
        problem = _check_points(_close(by_rv[rv]))
        if problem is not None:
            raise ValidationError(f"RV {rv}: {problem}", name)
        curves.append(RocCurve(by_rv[rv]))
    return RocSet(tuple(curves))


def save_roc_set(roc: RocSet, dest) -> None:
    """Write ``roc`` in the CSV format read by :func:`load_roc_set`.

    Floats are written with ``repr`` so a reload is bit-identical.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROC_HEADER)
    for rv, curve in enumerate(roc.curves, start=1):
        for x, y in curve.points:
            writer.writerow((rv, repr(x), repr(y)))
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(buf.getvalue(), encoding="utf-8")
    else:
        dest.write(buf.getvalue())
