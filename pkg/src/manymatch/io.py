"""Instance files and solution documents.

Instance format (UTF-8 text)::

    # comment
    d=2 n=3 p=2
    red 0.0 0.0
    blue 1.0 0.0
    red 2.5 1.0

Color labels are arbitrary tokens, remapped to dense ids in order of first
appearance. Solutions are written as JSON with sorted keys and sorted edges
so that identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .geometry import ColoredPointSet, remap_labels
from .penalties import as_edges

_HEADER_KEYS = ("d", "n", "p")


@dataclass(frozen=True)
class Instance:
    points: ColoredPointSet
    p: float
    labels: list


def _parse_header(line: str, lineno: int) -> tuple[int, int, float]:
    fields = {}
    for tok in line.split():
        key, sep, val = tok.partition("=")
        if not sep or key not in _HEADER_KEYS or key in fields:
            raise InvalidInputError(f"line {lineno}: bad header token {tok!r}")
        fields[key] = val
    if set(fields) != set(_HEADER_KEYS):
        raise InvalidInputError(f"line {lineno}: header needs d=, n= and p=")
    try:
        d, n, p = int(fields["d"]), int(fields["n"]), float(fields["p"])
    except ValueError as exc:
        raise InvalidInputError(f"line {lineno}: {exc}") from None
    if d < 1 or n < 0 or not (p >= 1):
        raise InvalidInputError(f"line {lineno}: need d >= 1, n >= 0, p >= 1")
    return d, n, p


def parse_instance(text: str) -> Instance:
    header = None
    labels, rows = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = _parse_header(line, lineno)
            continue
        d = header[0]
        toks = line.split()
        if len(toks) != d + 1:
            raise InvalidInputError(f"line {lineno}: expected a label and {d} coordinates")
        try:
            xs = [float(t) for t in toks[1:]]
        except ValueError:
            raise InvalidInputError(f"line {lineno}: coordinates must be decimal numbers") from None
        if not all(math.isfinite(v) for v in xs):
            raise InvalidInputError(f"line {lineno}: coordinates must be finite")
        labels.append(toks[0])
        rows.append(xs)
    if header is None:
        raise InvalidInputError("missing header line 'd=<int> n=<int> p=<real>'")
    d, n, p = header
    if len(rows) != n:
        raise InvalidInputError(f"header announces {n} points, found {len(rows)}")
    ids, table = remap_labels(labels)
    coords = np.array(rows, dtype=np.float64).reshape(n, d)
    return Instance(ColoredPointSet(coords, ids), p, table)


def read_instance(path) -> Instance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    return parse_instance(text)


def format_instance(S: ColoredPointSet, p: float = 2.0, labels=None) -> str:
    """Text form of an instance; ``repr`` of each float round-trips exactly."""
    out = [f"d={S.dim} n={S.n} p={p!r}"]
    for i in range(S.n):
        c = int(S.colors[i])
        lab = labels[c] if labels is not None else f"c{c}"
        out.append(" ".join([str(lab)] + [repr(float(v)) for v in S.coords[i]]))
    return "\n".join(out) + "\n"


def solution_document(cost: float, edges, params: dict, stats: dict) -> dict:
    E = as_edges(edges)
    return {"cost": float(cost), "edges": E.tolist(), "params": params, "stats": stats}


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True) + "\n"


def read_edges(path) -> np.ndarray:
    """Edge list from a solution document (the ``edges`` field) or a bare JSON array."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"cannot read edges from {path}: {exc}") from None
    E = doc["edges"] if isinstance(doc, dict) else doc
    try:
        A = np.asarray(E, dtype=np.int64)
    except (TypeError, ValueError):
        raise InvalidInputError("edges must be pairs of integer indices") from None
    if A.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if A.ndim != 2 or A.shape[1] != 2:
        raise InvalidInputError("edges must be pairs of integer indices")
    return A
