"""Sectioned plain-text format for raw quadratic program data.

A file holds whitespace-separated numbers under dimension headers::

    # comment lines start with '#'
    Q 2 2
    1.0 0.0
    0.0 2.0
    c 2
    -1.0 0.5
    A 1 2        # optional, together with b
    1.0 1.0
    b 1
    1.0

``Q`` and ``c`` are required; ``A`` and ``b`` are optional but must appear
together.  Values may wrap across lines arbitrarily.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError

_SECTIONS = ("Q", "c", "A", "b")


def read_qp(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Parse a sectioned matrix file into (Q, c, A, b); empty A/b when absent."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    tokens: list[str] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())

    pos = 0
    found: dict[str, np.ndarray] = {}
    while pos < len(tokens):
        name = tokens[pos]
        if name not in _SECTIONS:
            raise DataError(f"{path}: unknown section {name!r}, expected one of {_SECTIONS}")
        if name in found:
            raise DataError(f"{path}: duplicate section {name!r}")
        ndims = 2 if name in ("Q", "A") else 1
        dims = tokens[pos + 1 : pos + 1 + ndims]
        try:
            shape = tuple(int(d) for d in dims)
        except ValueError as exc:
            raise DataError(f"{path}: bad dimensions {dims} for section {name!r}") from exc
        if len(shape) != ndims or any(d < 0 for d in shape):
            raise DataError(f"{path}: bad dimensions {shape} for section {name!r}")
        count = int(np.prod(shape)) if shape else 0
        pos += 1 + ndims
        raw = tokens[pos : pos + count]
        if len(raw) != count:
            raise DataError(
                f"{path}: section {name!r} expects {count} values, found {len(raw)}"
            )
        try:
            values = np.array([float(v) for v in raw])
        except ValueError as exc:
            raise DataError(f"{path}: non-numeric value in section {name!r}") from exc
        found[name] = values.reshape(shape)
        pos += count

    if "Q" not in found or "c" not in found:
        raise DataError(f"{path}: sections Q and c are required")
    if ("A" in found) != ("b" in found):
        raise DataError(f"{path}: sections A and b must appear together")
    Q, c = found["Q"], found["c"]
    n = c.shape[0]
    A = found.get("A", np.zeros((0, n)))
    b = found.get("b", np.zeros(0))
    return Q, c, A, b


def write_qp(path, Q, c, A=None, b=None) -> None:
    """Write (Q, c[, A, b]) in the sectioned format accepted by :func:`read_qp`."""
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    c = np.ravel(np.asarray(c, dtype=np.float64))
    lines = [f"Q {Q.shape[0]} {Q.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in Q]
    lines.append(f"c {c.shape[0]}")
    lines.append(" ".join(repr(float(v)) for v in c))
    if A is not None and b is not None:
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        b = np.ravel(np.asarray(b, dtype=np.float64))
        if A.shape[0]:
            lines.append(f"A {A.shape[0]} {A.shape[1]}")
            lines += [" ".join(repr(float(v)) for v in row) for row in A]
            lines.append(f"b {b.shape[0]}")
            lines.append(" ".join(repr(float(v)) for v in b))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
