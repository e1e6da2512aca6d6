"""JSON instance files.

Layout::

    {"dimension": n,
     "vertices": [{"id": ..., "weight": ...}, ...],
     "edges": [{"u": ..., "v": ..., "length": ...}, ...],
     "faces": [[a, b, c], ...],          # optional
     "marked_loops": [[v0, ..., v0], ...], # optional
     "metadata": {...}}                   # optional
"""

from __future__ import annotations

import json
from pathlib import Path

from ..metric_core import InstanceError, MetricSpace

__all__ = ["instance_to_dict", "instance_from_dict", "load_instance", "save_instance", "dumps"]


def instance_to_dict(s: MetricSpace) -> dict:
    out: dict = {
        "dimension": s.dimension,
        "vertices": [{"id": vid, "weight": w} for vid, w in zip(s.ids, s.weights)],
        "edges": [{"u": s.ids[u], "v": s.ids[v], "length": length} for u, v, length in s.edges],
    }
    if s.faces:
        out["faces"] = [[s.ids[x] for x in f] for f in s.faces]
    if s.marked_loops is not None:
        out["marked_loops"] = [list(loop) for loop in s.marked_loops]
    if s.metadata:
        out["metadata"] = dict(s.metadata)
    return out


def instance_from_dict(data: dict) -> MetricSpace:
    try:
        vertices = [(v["id"], v["weight"]) for v in data["vertices"]]
        edges = [(e["u"], e["v"], e["length"]) for e in data["edges"]]
        dimension = data["dimension"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance: missing field {exc}") from None
    return MetricSpace(
        dimension=dimension,
        vertices=vertices,
        edges=edges,
        faces=data.get("faces") or (),
        marked_loops=data.get("marked_loops"),
        metadata=data.get("metadata"),
    )


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def load_instance(path: str | Path) -> MetricSpace:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(data)


def save_instance(s: MetricSpace, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_dict(s)), encoding="utf-8")
