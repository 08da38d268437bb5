"""Deterministic CSV and manifest output.

CSV bodies must be byte-identical across reruns of the same config and seed:
floats are written with repr (shortest round-trip form), rows arrive already
sorted by the caller, and no timestamps enter the body.  Each file opens with
a '#'-prefixed header block naming the experiment and the column meanings.
"""

from __future__ import annotations

import os

import numpy as np


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, float):
        # normalizes numpy scalars to the plain shortest round-trip form
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def write_csv(path, comments, columns, rows):
    """Write one CSV file; returns the number of data rows."""
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return len(rows)


def csv_body_bytes(path):
    """File content with '#' comment lines stripped (the determinism contract)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    return b"\n".join(l for l in raw.split(b"\n") if not l.startswith(b"#"))


class Manifest:
    """Collects run metadata and writes manifest.txt."""

    def __init__(self, config, version):
        self.config = config
        self.version = version
        self.files = []
        self.fitted = []
        self.checks = []
        self.errors = []
        self.wall_seconds = None

    def add_file(self, name, columns, row_count):
        self.files.append((name, tuple(columns), int(row_count)))

    def add_fit(self, label, value):
        self.fitted.append((label, value))

    def add_check(self, label, passed, detail=""):
        self.checks.append((label, bool(passed), detail))

    def add_error(self, message):
        self.errors.append(str(message))

    @property
    def all_passed(self):
        return not self.errors and all(p for _, p, _ in self.checks)

    def write(self, output_dir):
        lines = [
            f"tool_version: {self.version}",
            f"experiment: {self.config.experiment}",
            f"wall_seconds: {self.wall_seconds if self.wall_seconds is not None else 'n/a'}",
            "",
            "[config]",
        ]
        lines += self.config.as_lines()
        lines += ["", "[files]"]
        for name, columns, count in self.files:
            lines.append(f"{name}: rows={count} columns={','.join(columns)}")
        if self.fitted:
            lines += ["", "[fitted]"]
            for label, value in self.fitted:
                lines.append(f"{label} = {format_value(value)}")
        lines += ["", "[checks]"]
        for label, passed, detail in self.checks:
            suffix = f"  ({detail})" if detail else ""
            lines.append(f"{'PASS' if passed else 'FAIL'}  {label}{suffix}")
        if self.errors:
            lines += ["", "[errors]"]
            lines += self.errors
        lines += ["", f"summary: {'PASS' if self.all_passed else 'FAIL'}"]
        path = os.path.join(output_dir, "manifest.txt")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        return path
