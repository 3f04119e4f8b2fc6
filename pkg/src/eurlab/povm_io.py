"""Plain-text operator and POVM files.

An operator is written as a ``dim N`` header followed by N rows of N
``re,im`` pairs separated by whitespace. A POVM file holds several operators
separated by ``---`` lines and may end with a ``null: k`` line naming the
null element. Blank lines and ``#`` comments are ignored.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .operators import MatrixPovm


class FormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_operator(op: np.ndarray) -> str:
    op = np.asarray(op, dtype=complex)
    n = op.shape[0]
    rows = [" ".join(f"{_fmt(v.real)},{_fmt(v.imag)}" for v in row) for row in op]
    return "\n".join([f"dim {n}", *rows]) + "\n"


def _clean(lines):
    for lineno, raw in lines:
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_operator(block: list) -> np.ndarray:
    if not block:
        raise FormatError("empty operator block")
    lineno, header = block[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "dim":
        raise FormatError(f"line {lineno}: expected 'dim N', got {header!r}")
    try:
        n = int(parts[1])
    except ValueError:
        raise FormatError(f"line {lineno}: bad dimension {parts[1]!r}") from None
    if n < 1:
        raise FormatError(f"line {lineno}: dimension must be positive")
    rows = block[1:]
    if len(rows) != n:
        raise FormatError(f"line {lineno}: expected {n} rows, found {len(rows)}")
    op = np.empty((n, n), dtype=complex)
    for i, (ln, row) in enumerate(rows):
        entries = row.split()
        if len(entries) != n:
            raise FormatError(f"line {ln}: expected {n} entries, found {len(entries)}")
        for j, entry in enumerate(entries):
            try:
                re, im = entry.split(",")
                op[i, j] = complex(float(re), float(im))
            except ValueError:
                raise FormatError(f"line {ln}: bad entry {entry!r} (want re,im)") from None
    return op


def parse_operator(text: str) -> np.ndarray:
    return _parse_operator(list(_clean(enumerate(text.splitlines(), 1))))


def parse_povm(text: str) -> MatrixPovm:
    blocks: list = [[]]
    null_index = None
    for lineno, line in _clean(enumerate(text.splitlines(), 1)):
        if line == "---":
            blocks.append([])
        elif line.startswith("null:"):
            try:
                null_index = int(line.split(":", 1)[1])
            except ValueError:
                raise FormatError(f"line {lineno}: bad null index in {line!r}") from None
        else:
            if null_index is not None:
                raise FormatError(f"line {lineno}: 'null:' must be the last line")
            blocks[-1].append((lineno, line))
    ops = [_parse_operator(b) for b in blocks if b]
    if not ops:
        raise FormatError("no operators found")
    if null_index is not None and not 0 <= null_index < len(ops):
        raise FormatError(f"null index {null_index} out of range for {len(ops)} elements")
    return MatrixPovm(tuple(ops), null_index)


def format_povm(p: MatrixPovm) -> str:
    text = "---\n".join(format_operator(e) for e in p.elements)
    if p.null_index is not None:
        text += f"null: {p.null_index}\n"
    return text


def read_povm(path) -> MatrixPovm:
    return parse_povm(Path(path).read_text())


def write_povm(path, p: MatrixPovm) -> None:
    Path(path).write_text(format_povm(p))


def read_operator(path) -> np.ndarray:
    return parse_operator(Path(path).read_text())


def write_operator(path, op: np.ndarray) -> None:
    Path(path).write_text(format_operator(op))
