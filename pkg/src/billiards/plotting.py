"""Emit standalone matplotlib scripts for the CSV artifacts written by the CLI.

The package itself never imports matplotlib; the emitted scripts do.
"""
from __future__ import annotations

import csv
from pathlib import Path

__all__ = ["SCAN_COLUMNS", "MANIFOLD_COLUMNS", "read_columns", "emit_plot_script"]

SCAN_COLUMNS = ("theta0", "r0", "frequency", "chaotic", "gap")
MANIFOLD_COLUMNS = ("branch", "iterate", "sigma", "theta", "r")


def read_columns(path) -> tuple[list[str], int]:
    """Column names of a CLI CSV (after the ``#`` metadata lines) and its data row count."""
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows, None)
        if header is None:
            raise ValueError(f"{path}: no header row")
        return header, sum(1 for _ in rows)


def _check(path, expected):
    header, n = read_columns(path)
    if tuple(header) != expected:
        raise ValueError(f"{path}: columns {header} do not match {list(expected)}")
    return n


_PRELUDE = '''\
import csv
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


fig, ax = plt.subplots(figsize=(8, 6))
'''

_SCAN = '''\
scan = load({scan!r})
reg = [row for row in scan if row["chaotic"] == "0"]
cha = [row for row in scan if row["chaotic"] == "1"]
ax.scatter([float(r["theta0"]) for r in cha], [float(r["r0"]) for r in cha],
           s=2, c="0.6", label="chaotic")
sc = ax.scatter([float(r["theta0"]) for r in reg], [float(r["r0"]) for r in reg],
                s=2, c=[float(r["frequency"]) for r in reg], cmap="viridis")
fig.colorbar(sc, ax=ax, label="frequency")
'''

_MANIFOLD = '''\
man = load({manifold!r})
strands = {{}}
for row in man:
    strands.setdefault((row["branch"], row["iterate"]), []).append(row)
for (branch, _), rows in strands.items():
    color = "red" if branch.startswith("u") else "blue"
    ax.plot([float(r["theta"]) for r in rows], [float(r["r"]) for r in rows],
            ".", ms=1, color=color)
'''

_FOOTER = '''\
ax.set_xlim(0, 1)
ax.set_ylim(-1, 1)
ax.set_xlabel("theta")
ax.set_ylabel("r")
fig.savefig({png!r}, dpi=200)
'''


def emit_plot_script(out, scan=None, manifold=None) -> Path:
    """Write a plotting script for ``scan`` and/or ``manifold`` CSVs to ``out``.

    Headers are validated. An empty manifold file yields a scan-only script with
    a warning comment.
    """
    if scan is None and manifold is None:
        raise ValueError("need at least one input CSV")
    out = Path(out)
    parts = [_PRELUDE]
    if scan is not None:
        _check(scan, SCAN_COLUMNS)
        parts.append(_SCAN.format(scan=str(scan)))
    if manifold is not None:
        if _check(manifold, MANIFOLD_COLUMNS) == 0:
            parts.insert(0, f"# WARNING: {manifold} has no samples; plotting the scan only\n")
        else:
            parts.append(_MANIFOLD.format(manifold=str(manifold)))
    parts.append(_FOOTER.format(png=str(out.with_suffix(".png"))))
    out.write_text("".join(parts))
    return out
