"""CSV matrices, JSON-lines path export, and graph serialization.

Floats are written with Python's shortest round-trip repr, so
save -> load reproduces every value bit-exactly.  All writers go through
a temp-file-then-rename so a crash never leaves a partial output file.
Files ending in .gz are transparently gzip-compressed.
"""

from __future__ import annotations

import gzip
import json
import os
import tempfile

import numpy as np

from .lattice import VoxelGraph, graph_from_edges


class ParseError(ValueError):
    """Malformed input file; carries 1-based line/column context."""

    def __init__(self, path, line, column, message):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = str(path)
        self.line = line
        self.column = column


def _open_text(path, mode):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def atomic_write(path, write_fn):
    """Write via a temp file in the same directory, then rename over path."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        if str(path).endswith(".gz"):
            with gzip.open(tmp, "wt", encoding="utf-8") as fh:
                write_fn(fh)
        else:
            with open(tmp, "w", encoding="utf-8") as fh:
                write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_matrix_csv(matrix, path, header=None):
    """Comma-separated values, one row per line, shortest-repr floats."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))

    def write(fh):
        if header is not None:
            fh.write(",".join(str(h) for h in header) + "\n")
        for row in matrix:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")

    atomic_write(path, write)


def load_matrix_csv(path, header=False):
    """Load a rectangular CSV of floats; errors carry line and column."""
    with _open_text(path, "r") as fh:
        lines = fh.read().splitlines()
    start = 1 if header else 0
    rows = [line.split(",") for line in lines[start:] if line != ""]
    if not rows:
        raise ParseError(path, start + 1, 1, "no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                path, start + i + 1, 1,
                f"ragged row: expected {width} cells, found {len(row)}",
            )
    try:
        return np.array(rows, dtype=float)
    except ValueError:
        for i, row in enumerate(rows):
            for j, cell in enumerate(row):
                try:
                    float(cell)
                except ValueError:
                    raise ParseError(
                        path, start + i + 1, j + 1,
                        f"non-numeric cell {cell!r}",
                    ) from None
        raise


def _sparse_map(vec):
    vec = np.asarray(vec)
    idx = np.flatnonzero(vec != 0.0)
    return {str(int(i)): float(vec[i]) for i in idx}


def _point_record(pt):
    return {
        "t": int(pt.t),
        "loss": pt.diagnostics["loss"],
        "aug_loss": pt.diagnostics["aug_loss"],
        "support_size": int(pt.diagnostics["support_size"]),
        "dist_pre_les": pt.diagnostics["dist_pre_les"],
        "beta0": float(pt.beta0),
        "beta_pre": [float(x) for x in pt.beta_pre],
        "beta_les": _sparse_map(pt.beta_les),
        "s_v": [int(i) for i in pt.s_v],
        "s_g": [int(i) for i in pt.s_g],
    }


def export_path_jsonl(path_obj, file):
    """One JSON object per recorded point; beta_les and supports sparse."""

    def write(fh):
        for pt in path_obj.points:
            fh.write(json.dumps(_point_record(pt), sort_keys=True) + "\n")

    atomic_write(file, write)


def load_path_jsonl(file):
    """Parsed point records (dicts) in path order."""
    records = []
    with _open_text(file, "r") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def sparse_map_to_vector(mapping, p):
    vec = np.zeros(int(p))
    for key, val in mapping.items():
        vec[int(key)] = float(val)
    return vec


def save_graph_json(graph: VoxelGraph, path, rho=None):
    payload = {
        "dims": [int(d) for d in graph.dims],
        "mask": [bool(b) for b in np.asarray(graph.mask).ravel()],
        "nodes": [int(n) for n in graph.nodes],
        "edges": [[int(i), int(j)] for i, j in graph.edges],
    }
    if rho is not None:
        payload["rho"] = float(rho)
    atomic_write(path, lambda fh: fh.write(json.dumps(payload, sort_keys=True)))


def load_graph_json(path):
    with _open_text(path, "r") as fh:
        payload = json.load(fh)
    dims = tuple(int(d) for d in payload["dims"])
    graph = VoxelGraph(
        dims=dims,
        mask=np.array(payload["mask"], dtype=bool).reshape(dims),
        nodes=np.array(payload["nodes"], dtype=int),
        edges=np.array(payload["edges"], dtype=int).reshape(-1, 2),
    )
    return graph, payload.get("rho")


def save_json(payload, path):
    atomic_write(
        path, lambda fh: fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    )
