"""Distribution files, transform reports, and channel sweeps as JSON/CSV."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dist import AlphaDistribution, DistributionError, make_bec, make_bsc
from .polar2 import transform_report

SWEEP_COLUMNS = ("v_in", "v_minus", "v_plus", "cov", "cov1", "cov2")


class ParseError(ValueError):
    """A distribution file is malformed or violates the distribution invariants."""


def _line_of_atom(text: str, index: int) -> int:
    hits = [m.start() for m in re.finditer(r'"alpha"', text)]
    if index < len(hits):
        return text.count("\n", 0, hits[index]) + 1
    return 1


def parse_distribution(text: str, source: str = "<string>") -> AlphaDistribution:
    """Parse ``{"atoms": [{"alpha": a, "mass": m}, ...]}``; duplicate alphas are merged."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("atoms"), list):
        raise ParseError(f'{source}:1: expected an object with an "atoms" list')
    alphas, masses = [], []
    for k, atom in enumerate(doc["atoms"]):
        line = _line_of_atom(text, k)
        if not isinstance(atom, dict) or set(atom) != {"alpha", "mass"}:
            raise ParseError(f'{source}:{line}: atom {k} must have exactly "alpha" and "mass"')
        a, m = atom["alpha"], atom["mass"]
        if isinstance(a, bool) or isinstance(m, bool) or not all(
                isinstance(v, (int, float)) for v in (a, m)):
            raise ParseError(f"{source}:{line}: atom {k} has non-numeric fields")
        if not 0.0 <= a <= 1.0:
            raise ParseError(f"{source}:{line}: atom {k} alpha {a!r} outside [0, 1]")
        if not m > 0.0:
            raise ParseError(f"{source}:{line}: atom {k} mass {m!r} must be positive")
        alphas.append(float(a))
        masses.append(float(m))
    try:
        return AlphaDistribution(alphas, masses)
    except DistributionError as exc:
        raise ParseError(f"{source}:1: {exc}") from exc


def load_distribution(path) -> AlphaDistribution:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read: {exc.strerror}") from exc
    return parse_distribution(text, str(path))


def distribution_to_dict(F: AlphaDistribution) -> dict:
    return {"atoms": [{"alpha": a, "mass": m} for a, m in F.atoms()]}


def dump_distribution(F: AlphaDistribution, path) -> None:
    Path(path).write_text(json.dumps(distribution_to_dict(F), indent=2) + "\n")


def fmt(x: float) -> str:
    """17 significant digits, locale-independent."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepSpec:
    channel: str
    param_start: float
    param_end: float
    param_step: float
    outputs: tuple[str, ...] = field(default=SWEEP_COLUMNS)

    def __post_init__(self):
        if self.channel not in ("bsc", "bec"):
            raise ValueError(f"unknown channel {self.channel!r}")
        cap = 0.5 if self.channel == "bsc" else 1.0
        if not 0.0 <= self.param_start <= self.param_end <= cap:
            raise ValueError(f"need 0 <= start <= end <= {cap:g} for {self.channel}")
        if not self.param_step > 0:
            raise ValueError("step must be positive")
        bad = [c for c in self.outputs if c not in SWEEP_COLUMNS]
        if bad or not self.outputs:
            raise ValueError(f"unknown sweep columns {bad}; choose from {SWEEP_COLUMNS}")

    def grid(self) -> np.ndarray:
        count = int(np.floor((self.param_end - self.param_start) / self.param_step + 1e-9)) + 1
        pts = self.param_start + self.param_step * np.arange(count)
        return np.minimum(pts, self.param_end)


def sweep_rows(spec: SweepSpec) -> list[dict[str, float]]:
    make = make_bsc if spec.channel == "bsc" else make_bec
    rows = []
    for eps in spec.grid():
        F = make(float(eps))
        r = transform_report(F, F)
        full = {
            "eps": float(eps),
            "v_in": r.v_in[0],
            "v_minus": r.v_out[0],
            "v_plus": r.v_out[1],
            "cov": r.cov_total,
            "cov1": r.cov1,
            "cov2": r.cov2,
        }
        rows.append({k: full[k] for k in ("eps",) + tuple(spec.outputs)})
    return rows


def sweep_csv(spec: SweepSpec) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = ("eps",) + tuple(spec.outputs)
    writer.writerow(cols)
    for row in sweep_rows(spec):
        writer.writerow([fmt(row[c]) for c in cols])
    return buf.getvalue()
