"""Byte-stable CSV output.

Floats are written with ``repr`` (shortest round-trip decimal) so identical
inputs always produce identical files.
"""

from __future__ import annotations

import os
from typing import Iterable, Sequence


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool,)):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path):
    """Read a file written by :func:`write_csv`; returns (comments, header, rows of floats)."""
    comments, header, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([_parse(v) for v in line.split(",")])
    return comments, header, rows


def _parse(text):
    try:
        return float(text)
    except ValueError:
        return text
