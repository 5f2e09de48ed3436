"""Byte-stable CSV tables.

Floats are written with ``repr`` (shortest round-trip form), so identical
data always produces identical bytes and a read-back reproduces the exact
binary values.
"""

from __future__ import annotations

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, table: dict) -> None:
    """Write a column table {name: array-like}; columns keep dict order."""
    names = list(table.keys())
    cols = [np.asarray(table[n]).ravel() for n in names]
    if cols and any(len(c) != len(cols[0]) for c in cols):
        raise ValueError("CSV columns differ in length")
    lines = [",".join(names)]
    for row in range(len(cols[0]) if cols else 0):
        lines.append(",".join(_fmt(c[row]) for c in cols))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> dict:
    """Read a column table; numeric columns become float arrays."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    names = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    table: dict = {}
    for j, name in enumerate(names):
        raw = [r[j] for r in rows]
        try:
            table[name] = np.asarray([float(v) for v in raw])
        except ValueError:
            table[name] = np.asarray(raw)
    return table
