"""Result tables and their CSV serialization.

Files start with ``#`` metadata lines, then a header and one row per
result. Floats carry 12 significant digits and missing values are
written as ``NA``. EEG values are never stored: they are recomputed from
the energy-efficiency columns every time a table is written.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from . import __version__
from .model import eeg

__all__ = [
    "ResultTable",
    "RESULT_COLUMNS",
    "SIM_COLUMNS",
    "SCHEMA_VERSION",
    "NA",
    "format_value",
]

SCHEMA_VERSION = 1
NA = "NA"

_KEY = ("scheme", "scenario", "delay_budget", "feedback_delay", "eps_target", "n_bits", "status")
RESULT_COLUMNS = _KEY + (
    "expected_transmissions",
    "total_bler",
    "energy_efficiency",
    "baseline",
    "baseline_energy_efficiency",
    "eeg",
    "solution",
)
SIM_COLUMNS = _KEY + (
    "trials",
    "mean_t",
    "ci_halfwidth_t",
    "bler_hat",
    "ci_halfwidth_bler",
    "eta_hat",
    "ci_halfwidth_eta",
    "analytic_t",
    "analytic_bler",
    "analytic_eta",
    "solution",
)


def format_value(value) -> str:
    if value is None:
        return NA
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return NA if math.isnan(value) else format(value, ".12g")
    if isinstance(value, (tuple, list)):
        return " ".join(format_value(v) for v in value)
    return str(value)


def _row_eeg(row):
    eta, base = row.get("energy_efficiency"), row.get("baseline_energy_efficiency")
    if eta is None or base is None or not eta > 0.0:
        return None
    return eeg(eta, base)


@dataclass
class ResultTable:
    """Rows of results plus run metadata.

    ``add_mean`` appends an aggregate row whose EEG is the mean over the
    listed member rows that have one; like every EEG it is derived when
    the table is written.
    """

    columns: tuple[str, ...]
    metadata: list[tuple[str, object]] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    _members: dict[int, list[int]] = field(default_factory=dict, repr=False)

    def add(self, **values) -> int:
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        values.pop("eeg", None)
        self.rows.append(values)
        return len(self.rows) - 1

    def add_mean(self, members: list[int], **values) -> int:
        idx = self.add(status="mean", **values)
        self._members[idx] = list(members)
        return idx

    def eeg_values(self) -> list[float | None]:
        out = [None if i in self._members else _row_eeg(r) for i, r in enumerate(self.rows)]
        for idx, members in self._members.items():
            vals = [out[m] for m in members if out[m] is not None]
            out[idx] = math.fsum(vals) / len(vals) if vals else None
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# harqpred {__version__}\n")
        buf.write(f"# schema: {SCHEMA_VERSION}\n")
        for key, value in self.metadata:
            buf.write(f"# {key}: {format_value(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        thetas = self.eeg_values()
        for row, theta in zip(self.rows, thetas):
            cells = []
            for col in self.columns:
                cells.append(format_value(theta if col == "eeg" else row.get(col)))
            writer.writerow(cells)
        return buf.getvalue()

    def write(self, dest) -> None:
        """Write to a path, or to a text stream when ``dest`` has ``write``."""
        text = self.to_csv()
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
