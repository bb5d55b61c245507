"""Versioned text serialization for models and CSV dataset IO.

Floats are written with Python's shortest round-trip repr, so load(save(m))
reproduces every field bit for bit, including infinities in stump
thresholds.  The model format is line-oriented with named sections; loading
reports the line and section of the first problem it finds.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .boosting import BoostModel
from .cascade import CascadeModel, ExitNode
from .data import DecisionStump, Dataset, InputError

FORMAT_NAME = "nodeboost-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Malformed or wrong-version model file."""


def _fmt(x: float) -> str:
    return repr(float(x))


def save_model(model, path) -> None:
    """Write a BoostModel or CascadeModel to a versioned text file."""
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}"]
    if isinstance(model, BoostModel):
        lines.append("type boost")
        lines.append(f"stumps {len(model.stumps)}")
        lines += [_stump_line(s) for s in model.stumps]
        lines.append(f"weights {len(model.w)}")
        lines += [_fmt(wj) for wj in model.w]
        lines.append(f"offset {_fmt(model.b)}")
        lines.append(f"converged {int(model.converged)}")
    elif isinstance(model, CascadeModel):
        lines.append("type cascade")
        lines.append(f"stumps {len(model.stumps)}")
        lines += [_stump_line(s) for s in model.stumps]
        lines.append(f"nodes {len(model.nodes)}")
        for node in model.nodes:
            lines.append(f"node {node.weak_count} {_fmt(node.b)} "
                         f"{_fmt(node.d_t)} {_fmt(node.f_t)}")
            lines.append(" ".join(_fmt(wj) for wj in node.w))
    else:
        raise InputError(f"cannot serialize {type(model).__name__}")
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n")


def _stump_line(s: DecisionStump) -> str:
    return f"{s.feature_index} {_fmt(s.threshold)} {s.polarity}"


class _Reader:
    def __init__(self, path):
        self.path = str(path)
        self.lines = Path(path).read_text().splitlines()
        self.pos = 0

    def next(self, section: str) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"{self.path}: unexpected end of file, "
                                   f"missing section '{section}'")
        line = self.lines[self.pos].strip()
        self.pos += 1
        return line

    def expect(self, keyword: str):
        line = self.next(keyword)
        parts = line.split()
        if not parts or parts[0] != keyword:
            raise ModelFormatError(f"{self.path}:{self.pos}: expected '{keyword}', "
                                   f"got {line!r}")
        return parts[1:]

    def fail(self, msg: str):
        raise ModelFormatError(f"{self.path}:{self.pos}: {msg}")


def load_model(path):
    """Read a model file back; inverse of save_model on every field."""
    r = _Reader(path)
    header = r.next("header").split()
    if len(header) != 2 or header[0] != FORMAT_NAME:
        r.fail(f"not a {FORMAT_NAME} file")
    if header[1] != str(FORMAT_VERSION):
        r.fail(f"unsupported version {header[1]} (expected {FORMAT_VERSION})")
    kind = r.expect("type")
    if kind == ["boost"]:
        stumps = _read_stumps(r)
        (n_w,) = r.expect("weights")
        w = np.array([_read_float(r, "weight") for _ in range(int(n_w))])
        (b,) = r.expect("offset")
        (conv,) = r.expect("converged")
        r.expect("end")
        return BoostModel(stumps=stumps, w=w, b=float(b), converged=bool(int(conv)))
    if kind == ["cascade"]:
        stumps = _read_stumps(r)
        (n_nodes,) = r.expect("nodes")
        nodes = []
        for _ in range(int(n_nodes)):
            fields = r.expect("node")
            if len(fields) != 4:
                r.fail(f"node line needs 4 fields, got {len(fields)}")
            weak_count, b, d_t, f_t = int(fields[0]), float(fields[1]), \
                float(fields[2]), float(fields[3])
            w = np.array([float(tok) for tok in r.next("node weights").split()])
            if w.size != weak_count:
                r.fail(f"node weight count {w.size} != weak_count {weak_count}")
            nodes.append(ExitNode(weak_count=weak_count, w=w, b=b, d_t=d_t, f_t=f_t))
        r.expect("end")
        return CascadeModel(stumps=stumps, nodes=nodes)
    r.fail(f"unknown model type {kind}")


def _read_stumps(r: _Reader) -> list[DecisionStump]:
    (n,) = r.expect("stumps")
    stumps = []
    for _ in range(int(n)):
        parts = r.next("stump").split()
        if len(parts) != 3:
            r.fail(f"stump line needs 3 fields, got {parts!r}")
        stumps.append(DecisionStump(feature_index=int(parts[0]),
                                    threshold=float(parts[1]),
                                    polarity=int(parts[2])))
    return stumps


def _read_float(r: _Reader, what: str) -> float:
    line = r.next(what)
    try:
        return float(line)
    except ValueError:
        r.fail(f"expected a float {what}, got {line!r}")


def save_dataset_csv(data: Dataset, path, header: bool = True) -> None:
    """CSV with the label (+1/-1) first and the features after it."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["label"] + [f"x{j}" for j in range(data.d)])
        for yi, xi in zip(data.y, data.X):
            writer.writerow([int(yi)] + [repr(float(v)) for v in xi])


def load_dataset_csv(path) -> Dataset:
    """Read a dataset CSV; a non-numeric first row is treated as a header."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append(row)
    if not rows:
        raise InputError(f"{path}: empty dataset file")
    start = 0
    try:
        float(rows[0][0])
    except ValueError:
        start = 1
    labels, feats = [], []
    for i, row in enumerate(rows[start:], start=start + 1):
        try:
            labels.append(int(float(row[0])))
            feats.append([float(v) for v in row[1:]])
        except ValueError as exc:
            raise InputError(f"{path}: line {i}: {exc}") from None
    return Dataset.from_arrays(np.array(feats), np.array(labels))


def write_csv(path, header: list[str], rows) -> None:
    """Write a harness CSV (header + numeric rows)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read back any CSV written by write_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise InputError(f"{path}: empty CSV")
    header = rows[0]
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return header, data
