"""Run records and their on-disk layout.

A run directory contains:
    config.echo        resolved configuration, one `key = value` per line
    diagnostics.csv    time series table, one row per recorded step
    snapshots/*.csv    time-tagged fields or ensembles
    provenance.json    tool version, wall clock, seed

diagnostics.csv is byte-identical across reruns of the same configuration;
wall-clock and anything else non-reproducible lives only in provenance.json.
Floats are written with repr (shortest round-trip form), CSV is RFC-4180
style with a header row, UTF-8, '.' decimal separator.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


@dataclass
class RunRecord:
    """In-memory result of one simulation run."""

    kind: str  # 'plane' or 'exterior'
    config: dict
    diagnostics: dict  # column name -> array; must contain 't'
    snapshots: list  # [(t, {'name': array, ...}), ...]
    static: dict = field(default_factory=dict)  # arrays shared by all snapshots
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.diagnostics.get("t", []), dtype=float)
        if t.size and np.any(np.diff(t) <= 0):
            raise ValueError("diagnostic times must be strictly increasing")
        self.provenance.setdefault("tool_version", __version__)
        self.provenance.setdefault("seed", "none")

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.diagnostics["t"], dtype=float)

    def snapshot_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])


def write_csv(path, columns: dict):
    """Write named columns of equal length as an RFC-4180 style CSV file."""
    path = Path(path)
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[k])) for k in names]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ValueError("csv columns must have equal length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(names)
        for i in range(n):
            w.writerow([_fmt(a[i]) for a in arrays])


def read_csv(path) -> dict:
    """Read a CSV written by write_csv back into float columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in data]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def write_config_echo(path, config: dict):
    lines = [f"{k} = {_fmt(v)}" for k, v in config.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_run(record: RunRecord, outdir) -> Path:
    """Persist a RunRecord; returns the run directory path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_config_echo(outdir / "config.echo", record.config)
    write_csv(outdir / "diagnostics.csv", record.diagnostics)

    snapdir = outdir / "snapshots"
    snapdir.mkdir(exist_ok=True)
    for idx, (t, payload) in enumerate(record.snapshots):
        path = snapdir / f"snap_{idx:04d}.csv"
        if record.kind == "plane":
            pos = payload["positions"]
            write_csv(
                path,
                {
                    "t": np.full(pos.shape[0], t),
                    "x1": pos[:, 0],
                    "x2": pos[:, 1],
                    "weight": record.static["weights"],
                    "q_value": record.static["q_values"],
                },
            )
        else:
            q = payload["q"]
            r = record.static["r"]
            theta = record.static["theta"]
            rr = np.repeat(r, theta.size)
            tt = np.tile(theta, r.size)
            write_csv(
                path,
                {
                    "t": np.full(rr.size, t),
                    "r": rr,
                    "theta": tt,
                    "q": q.ravel(),
                },
            )

    prov = dict(record.provenance)
    prov.setdefault("wall_clock_utc", time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
    (outdir / "provenance.json").write_text(
        json.dumps(prov, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return outdir
