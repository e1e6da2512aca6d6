"""Test-instance generators: cycles, grid tori, genus-g surfaces, sampled surfaces."""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..metric_core import InstanceError, MetricSpace

__all__ = ["gen_cycle", "gen_grid_torus", "gen_genus_surface", "gen_sampled"]

# sampled lengths and weights are snapped to dyadic grids so that every
# path sum and volume sum downstream is exact in binary floating point
LENGTH_GRID = 2.0**-24
WEIGHT_GRID = 2.0**-32


def gen_cycle(k: int) -> MetricSpace:
    if k < 3:
        raise InstanceError(f"cycle needs k >= 3, got {k}")
    return MetricSpace(
        dimension=1,
        vertices=[(i, 1.0) for i in range(k)],
        edges=[(i, (i + 1) % k, 1.0) for i in range(k)],
        metadata={"generator": "cycle", "k": k},
    )


def gen_grid_torus(m: int, with_faces: bool = True) -> MetricSpace:
    """m x m periodic grid; with faces each square is split along (i,j)-(i+1,j+1)."""
    if m < 3:
        raise InstanceError(f"grid torus needs m >= 3, got {m}")

    def vid(i: int, j: int) -> int:
        return (i % m) * m + (j % m)

    edges = []
    faces = []
    for i in range(m):
        for j in range(m):
            edges.append((vid(i, j), vid(i + 1, j), 1.0))
            edges.append((vid(i, j), vid(i, j + 1), 1.0))
            if with_faces:
                edges.append((vid(i, j), vid(i + 1, j + 1), 1.0))
                faces.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
                faces.append((vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)))
    return MetricSpace(
        dimension=2,
        vertices=[(v, 1.0) for v in range(m * m)],
        edges=edges,
        faces=faces,
        metadata={"generator": "grid_torus", "m": m, "with_faces": with_faces},
    )


class _DeltaComplex:
    """2-dimensional Delta-complex with possibly repeated vertices and multi-edges.

    ``edges[e] = (end0, end1)``.  A triangle is ``(corners, sides)`` where
    side ``k`` joins corners ``k`` and ``(k+1) % 3`` and is stored as
    ``(edge, flip)``; ``flip == 0`` means the edge's ``end0`` sits at corner ``k``.
    """

    def __init__(self, n_vertices, edges, triangles):
        self.n_vertices = n_vertices
        self.edges = edges
        self.triangles = triangles

    def subdivide(self) -> "_DeltaComplex":
        nv, ne = self.n_vertices, len(self.edges)
        ebary = lambda e: nv + e  # noqa: E731
        tbary = lambda t: nv + ne + t  # noqa: E731

        edges: list[tuple[int, int]] = []
        ve_edge = {}
        for e, ends in enumerate(self.edges):
            for j in (0, 1):
                ve_edge[e, j] = len(edges)
                edges.append((ends[j], ebary(e)))
        et_edge = {}
        vt_edge = {}
        for t, (corners, sides) in enumerate(self.triangles):
            for k in range(3):
                et_edge[t, k] = len(edges)
                edges.append((ebary(sides[k][0]), tbary(t)))
            for i in range(3):
                vt_edge[t, i] = len(edges)
                edges.append((corners[i], tbary(t)))

        triangles = []
        for t, (corners, sides) in enumerate(self.triangles):
            for k, (e, flip) in enumerate(sides):
                for corner in (k, (k + 1) % 3):
                    # which end of edge e sits at this corner
                    end = (0 if corner == k else 1) ^ flip
                    triangles.append(
                        (
                            (corners[corner], ebary(e), tbary(t)),
                            ((ve_edge[e, end], 0), (et_edge[t, k], 0), (vt_edge[t, corner], 1)),
                        )
                    )
        return _DeltaComplex(nv + ne + len(self.triangles), edges, triangles)


def _polygon_cone(g: int) -> _DeltaComplex:
    """Cone triangulation of the 4g-gon with word a1 b1 a1^-1 b1^-1 ...

    Vertex 0 is the common corner, vertex 1 the cone point.  Edges ``0..2g-1``
    are the side classes, then the 4g spokes.
    """
    sides = 4 * g
    edges = [(0, 0)] * (2 * g) + [(1, 0)] * sides
    triangles = []
    for k in range(sides):
        label = 2 * (k // 4) + (k % 2)
        flip = 1 if k % 4 >= 2 else 0
        spoke, next_spoke = 2 * g + k, 2 * g + (k + 1) % sides
        triangles.append(((1, 0, 0), ((spoke, 0), (label, flip), (next_spoke, 1))))
    return _DeltaComplex(2, edges, triangles)


def gen_genus_surface(g: int, subdiv: int = 1) -> MetricSpace:
    """Closed orientable genus-g surface with unit edges and unit weights.

    The cone triangulation of the identified 4g-gon is not simplicial, so it
    is barycentrically subdivided once to fix that and then ``subdiv`` more
    times.
    """
    if g < 1:
        raise InstanceError(f"genus must be >= 1, got {g}")
    if subdiv < 1:
        raise InstanceError(f"subdiv must be >= 1, got {subdiv}")
    cx = _polygon_cone(g)
    for _ in range(subdiv + 1):
        cx = cx.subdivide()
    pairs = {tuple(sorted(e)) for e in cx.edges}
    if len(pairs) != len(cx.edges) or any(a == b for a, b in pairs):
        raise AssertionError("subdivided complex is not simplicial")
    faces = [corners for corners, _ in cx.triangles]
    return MetricSpace(
        dimension=2,
        vertices=[(v, 1.0) for v in range(cx.n_vertices)],
        edges=[(a, b, 1.0) for a, b in cx.edges],
        faces=faces,
        metadata={"generator": "genus_surface", "g": g, "subdiv": subdiv},
    )


def _sample_sphere(rng: np.random.Generator, count: int) -> tuple[np.ndarray, float]:
    pts = rng.standard_normal((count, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts, 4.0 * math.pi


def _sample_torus(rng: np.random.Generator, count: int) -> tuple[np.ndarray, float]:
    big, small = 2.0, 1.0
    out = np.empty((0, 3))
    while len(out) < count:
        u = rng.uniform(0, 2 * math.pi, count)
        v = rng.uniform(0, 2 * math.pi, count)
        keep = rng.uniform(0, big + small, count) < big + small * np.cos(v)
        u, v = u[keep], v[keep]
        ring = big + small * np.cos(v)
        out = np.vstack([out, np.column_stack([ring * np.cos(u), ring * np.sin(u), small * np.sin(v)])])
    return out[:count], 4.0 * math.pi**2 * big * small


def gen_sampled(kind: str, count: int, knn: int, seed: int) -> MetricSpace:
    """kNN graph on seeded uniform samples of an embedded torus or sphere.

    No faces are produced, so homology is the graph cycle rank.
    """
    samplers = {"torus_embed": _sample_torus, "sphere_embed": _sample_sphere}
    if kind not in samplers:
        raise InstanceError(f"unknown sampled kind {kind!r}")
    if knn < 1 or count < knn + 1:
        raise InstanceError(f"need count >= knn + 1 >= 2, got count={count}, knn={knn}")
    rng = np.random.default_rng(seed)
    pts, area = samplers[kind](rng, count)
    tree = cKDTree(pts)
    weight = max(WEIGHT_GRID, round(area / count / WEIGHT_GRID) * WEIGHT_GRID)

    k = knn
    for _ in range(4):
        kk = min(k, count - 1)
        _, nbrs = tree.query(pts, k=kk + 1)
        pairs = sorted({(min(i, int(j)), max(i, int(j))) for i in range(count) for j in nbrs[i, 1:] if j != i})
        a = np.array([p[0] for p in pairs])
        b = np.array([p[1] for p in pairs])
        adj = coo_matrix((np.ones(len(pairs)), (a, b)), shape=(count, count))
        n_comp, _ = connected_components(adj, directed=False)
        if n_comp == 1:
            break
        k += 2
    else:
        raise InstanceError(f"sampled graph disconnected after retries (knn up to {k - 2})")

    edges = []
    for i, j in pairs:
        length = float(np.linalg.norm(pts[i] - pts[j]))
        edges.append((i, j, max(LENGTH_GRID, round(length / LENGTH_GRID) * LENGTH_GRID)))
    return MetricSpace(
        dimension=2,
        vertices=[(i, weight) for i in range(count)],
        edges=edges,
        metadata={
            "generator": "sampled",
            "kind": kind,
            "count": count,
            "knn": knn,
            "knn_used": k,
            "seed": seed,
            "homology_notion": "graph_cycle_rank",
            "note": "no face data",
        },
    )
