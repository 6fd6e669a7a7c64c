"""JSON documents for the domain types.

Formats (all indices 0-based):

* multigraph ``{"n", "edges": [[u, v, mult], ...]}``
* test graph ``{"k", "space": {"dim", "basis"}, "edges": [[i, j, [vec]], ...]}``
* target graph ``{"n", "space", "moment_mode", "decorations": [[u, v, [vec]], ...]}``
* step graphon ``{"measures", "kernels": [[[...]]], "basis"}``
* step kernel ``{"measures", "values"}``
* moment sequence ``{"moments", "witness"}``

Floats are written with ``repr`` precision, so parsing a written document
reproduces every value bit for bit.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .core import Multigraph, MomentSeq, Partition, StepGraphon, StepKernel, TargetGraph, TestGraph
from .errors import ValidationError

_KINDS = {
    "multigraph": Multigraph,
    "test_graph": TestGraph,
    "target_graph": TargetGraph,
    "step_graphon": StepGraphon,
    "step_kernel": StepKernel,
    "moment_seq": MomentSeq,
    "partition": Partition,
}


def detect_kind(doc):
    if not isinstance(doc, dict):
        raise ValidationError("expected a JSON object")
    keys = set(doc)
    if "kernels" in keys:
        return "step_graphon"
    if "values" in keys and "measures" in keys:
        return "step_kernel"
    if "k" in keys and "edges" in keys:
        return "test_graph"
    if "decorations" in keys:
        return "target_graph"
    if "n" in keys and "edges" in keys:
        return "multigraph"
    if "moments" in keys:
        return "moment_seq"
    if keys == {"measures"}:
        return "partition"
    raise ValidationError(f"cannot tell the document type from keys {sorted(keys)}")


def from_document(doc, kind=None):
    """Build a domain object from a parsed JSON document."""
    kind = kind or detect_kind(doc)
    if kind not in _KINDS:
        raise ValidationError(f"unknown document kind {kind!r}")
    try:
        return _KINDS[kind].from_dict(doc)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed {kind} document: {exc}") from exc


def to_document(obj):
    if not hasattr(obj, "to_dict"):
        raise ValidationError(f"cannot serialize {type(obj).__name__}")
    return obj.to_dict()


def dumps(doc):
    """Deterministic JSON text (UTF-8 safe, LF line endings, trailing newline)."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def loads(text, kind=None):
    return from_document(json.loads(text), kind)


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def load(path, kind=None):
    return from_document(read_json(path), kind)


def save(obj, path):
    write_text(path, dumps(to_document(obj)))


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def file_sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_battery(path):
    """Battery file: a list of graphs, or ``{"battery": [{"name", "graph"}, ...]}``.

    Returns ``[(name, object), ...]``; unnamed entries are numbered.
    """
    doc = read_json(path)
    entries = doc["battery"] if isinstance(doc, dict) and "battery" in doc else doc
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"{path}: battery must be a non-empty list")
    out = []
    for i, e in enumerate(entries):
        if isinstance(e, dict) and "graph" in e:
            out.append((str(e.get("name", f"F{i}")), from_document(e["graph"])))
        else:
            out.append((f"F{i}", from_document(e)))
    return out
