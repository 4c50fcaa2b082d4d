"""Plain-text interchange formats.

Matrices travel as headerless CSV of decimal floats (row-major, dimension
inferred); subsets as comma-separated zero-based indices, one set per line,
with a blank line standing for the empty set.  Floats are written with
``repr`` so identical values always produce identical bytes.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .kernel import Subset


def save_matrix_csv(path, matrix: np.ndarray) -> None:
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-d matrix, got shape {arr.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise InvalidArgumentError(f"no rows found in {path}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InvalidArgumentError(f"ragged rows in {path}: widths {sorted(widths)}")
    return np.array(rows, dtype=float)


def format_subset(subset: Subset) -> str:
    return ",".join(str(i) for i in subset.indices)


def parse_subset(text: str, n: int) -> Subset:
    text = text.strip()
    if not text:
        return Subset.empty(n)
    try:
        items = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot parse subset from {text!r}") from exc
    return Subset.of(items, n)


def write_trajectory(path, sets: list[Subset]) -> None:
    """One line per time step; a blank line is the empty set."""
    with open(path, "w", encoding="utf-8") as fh:
        for subset in sets:
            fh.write(format_subset(subset))
            fh.write("\n")


def read_trajectory(path, n: int) -> list[Subset]:
    with open(path, encoding="utf-8") as fh:
        return [parse_subset(line.rstrip("\n"), n) for line in fh]
