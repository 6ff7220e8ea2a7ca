"""Plain-text dump of standard-form QP matrices.

Each block is written as a header line ``<name> <rows> <cols>`` followed by
one line per row with ``%.17g``-formatted entries, so external solvers can
cross-check a problem exactly.
"""

from __future__ import annotations

import numpy as np

BLOCKS = ("P", "a", "A", "b", "G", "h")


def dump_standard_qp(qp, path):
    with open(path, "w") as fh:
        for name in BLOCKS:
            block = np.atleast_2d(np.asarray(getattr(qp, name), dtype=float))
            if name in ("a", "b", "h"):
                block = block.reshape(-1, 1)
            fh.write(f"{name} {block.shape[0]} {block.shape[1]}\n")
            for row in block:
                fh.write(" ".join("%.17g" % v for v in row) + "\n")


def load_standard_qp(path):
    from .problem import StandardQP

    blocks = {}
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    pos = 0
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        name, rows, cols = lines[pos].split()
        rows, cols = int(rows), int(cols)
        data = np.zeros((rows, cols))
        for i in range(rows):
            data[i] = np.fromstring(lines[pos + 1 + i], sep=" ")
        blocks[name] = data
        pos += 1 + rows
    missing = [name for name in BLOCKS if name not in blocks]
    if missing:
        raise ValueError(f"dump file is missing blocks: {missing}")
    return StandardQP(
        P=blocks["P"],
        a=blocks["a"].reshape(-1),
        A=blocks["A"],
        b=blocks["b"].reshape(-1),
        G=blocks["G"],
        h=blocks["h"].reshape(-1),
    )
