"""Finite metric spaces carried by weighted graphs with optional triangle faces.

Distances are shortest-path lengths, balls are closed (``d <= r``) and the
volume of a ball is the sum of the weights of its member vertices.  Volumes
are tracked both as floats and as exact rationals; every inequality check in
the package compares the exact values.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

VertexId = Hashable

__all__ = [
    "InstanceError",
    "MetricSpace",
    "Ball",
    "VolumeProfile",
    "distance",
    "ball",
    "total_volume",
    "density",
    "breakpoints",
]


class InstanceError(ValueError):
    """Raised for malformed instances and invalid arguments."""


@dataclass(frozen=True)
class Ball:
    center: VertexId
    radius: float
    members: frozenset
    volume: float


class VolumeProfile:
    """The step function ``r -> vol(B(p, r))`` for one center.

    ``radii`` are the distinct finite distances from the center in increasing
    order (the first is always 0) and ``volumes[i]`` is the volume of the ball
    of radius ``radii[i]``.
    """

    __slots__ = ("radii", "volumes", "exact")

    def __init__(self, dist_row: np.ndarray, weights: Sequence[float]):
        finite = np.flatnonzero(np.isfinite(dist_row))
        order = finite[np.argsort(dist_row[finite], kind="stable")]
        radii: list[float] = []
        exact: list[Fraction] = []
        running = Fraction(0)
        for idx in order:
            d = float(dist_row[idx])
            running += Fraction(weights[idx])
            if radii and radii[-1] == d:
                exact[-1] = running
            else:
                radii.append(d)
                exact.append(running)
        self.radii = radii
        self.exact = exact
        # float(Fraction) is correctly rounded, so this agrees with math.fsum
        self.volumes = [float(v) for v in exact]

    def _slot(self, r: float) -> int:
        return bisect.bisect_right(self.radii, r) - 1

    def volume(self, r: float) -> float:
        i = self._slot(r)
        return self.volumes[i] if i >= 0 else 0.0

    def exact_volume(self, r: float) -> Fraction:
        i = self._slot(r)
        return self.exact[i] if i >= 0 else Fraction(0)

    def jumps(self, cap: float) -> list[float]:
        """Positive radii ``<= cap`` where the volume steps up."""
        hi = bisect.bisect_right(self.radii, cap)
        return self.radii[1:hi]


class MetricSpace:
    """Immutable weighted graph with an optional set of triangle faces.

    ``vertices`` holds ``(id, weight)`` pairs, ``edges`` holds
    ``(u, v, length)`` triples and ``faces`` holds vertex triples.  Vertex
    declaration order defines the internal index used for all tie-breaks.
    """

    def __init__(
        self,
        dimension: int,
        vertices: Iterable[tuple[VertexId, float]],
        edges: Iterable[tuple[VertexId, VertexId, float]],
        faces: Iterable[Sequence[VertexId]] = (),
        marked_loops: Iterable[Sequence[VertexId]] | None = None,
        metadata: dict | None = None,
    ):
        if isinstance(dimension, bool) or not isinstance(dimension, int) or dimension < 1:
            raise InstanceError(f"dimension must be a positive integer, got {dimension!r}")
        self.dimension = dimension

        ids: list[VertexId] = []
        weights: list[float] = []
        index: dict[VertexId, int] = {}
        for vid, w in vertices:
            if vid in index:
                raise InstanceError(f"duplicate vertex id {vid!r}")
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise InstanceError(f"vertex {vid!r} has invalid weight {w!r}")
            index[vid] = len(ids)
            ids.append(vid)
            weights.append(w)
        if not ids:
            raise InstanceError("instance has no vertices")
        if not any(w > 0 for w in weights):
            raise InstanceError("at least one vertex weight must be positive")
        self.ids: tuple[VertexId, ...] = tuple(ids)
        self.weights: tuple[float, ...] = tuple(weights)
        self.index = index

        edge_list: list[tuple[int, int, float]] = []
        edge_index: dict[tuple[int, int], int] = {}
        for u, v, length in edges:
            iu, iv = self._lookup(u), self._lookup(v)
            if iu == iv:
                raise InstanceError(f"self-loop at {u!r}")
            length = float(length)
            if not math.isfinite(length) or length <= 0:
                raise InstanceError(f"edge ({u!r}, {v!r}) has invalid length {length!r}")
            key = (min(iu, iv), max(iu, iv))
            if key in edge_index:
                raise InstanceError(f"duplicate edge ({u!r}, {v!r})")
            edge_index[key] = len(edge_list)
            edge_list.append((key[0], key[1], length))
        self.edges: tuple[tuple[int, int, float], ...] = tuple(edge_list)
        self.edge_index = edge_index

        face_list: list[tuple[int, int, int]] = []
        seen_faces: set[tuple[int, int, int]] = set()
        for face in faces:
            if len(face) != 3:
                raise InstanceError(f"face {face!r} is not a triangle")
            tri = tuple(self._lookup(x) for x in face)
            if len(set(tri)) != 3:
                raise InstanceError(f"degenerate face {face!r}")
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])):
                if (min(a, b), max(a, b)) not in edge_index:
                    raise InstanceError(f"face {face!r} uses a missing edge")
            key = tuple(sorted(tri))
            if key in seen_faces:
                raise InstanceError(f"duplicate face {face!r}")
            seen_faces.add(key)
            face_list.append(key)
        self.faces: tuple[tuple[int, int, int], ...] = tuple(face_list)

        self.marked_loops = (
            None if marked_loops is None else tuple(tuple(loop) for loop in marked_loops)
        )
        self.metadata = dict(metadata or {})

    def _lookup(self, vid: VertexId) -> int:
        try:
            return self.index[vid]
        except (KeyError, TypeError):
            raise InstanceError(f"unknown vertex id {vid!r}") from None

    @property
    def n_vertices(self) -> int:
        return len(self.ids)

    @property
    def has_faces(self) -> bool:
        return bool(self.faces)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, float, int], ...], ...]:
        """Per vertex, sorted ``(neighbor, length, edge_idx)`` triples."""
        nbrs: list[list[tuple[int, float, int]]] = [[] for _ in self.ids]
        for e, (u, v, length) in enumerate(self.edges):
            nbrs[u].append((v, length, e))
            nbrs[v].append((u, length, e))
        return tuple(tuple(sorted(row)) for row in nbrs)

    @cached_property
    def _csr(self) -> csr_matrix:
        n = self.n_vertices
        if not self.edges:
            return csr_matrix((n, n))
        u, v, w = zip(*self.edges)
        rows = np.array(u + v)
        cols = np.array(v + u)
        data = np.array(w + w, dtype=float)
        return csr_matrix((data, (rows, cols)), shape=(n, n))

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs shortest-path matrix; ``inf`` between components."""
        d = dijkstra(self._csr, directed=False)
        d.setflags(write=False)
        return d

    @cached_property
    def component_labels(self) -> np.ndarray:
        _, labels = connected_components(self._csr, directed=False)
        return labels

    @property
    def n_components(self) -> int:
        return int(self.component_labels.max()) + 1

    @cached_property
    def _profiles(self) -> dict[int, VolumeProfile]:
        return {}

    def profile(self, i: int) -> VolumeProfile:
        prof = self._profiles.get(i)
        if prof is None:
            prof = VolumeProfile(self.distances[i], self.weights)
            self._profiles[i] = prof
        return prof

    @cached_property
    def exact_total_volume(self) -> Fraction:
        return sum((Fraction(w) for w in self.weights), Fraction(0))

    def members_within(self, i: int, r: float) -> np.ndarray:
        """Sorted vertex indices of the closed ball of radius ``r`` about index ``i``."""
        return np.flatnonzero(self.distances[i] <= r)

    def __repr__(self) -> str:
        return (
            f"MetricSpace(n={self.dimension}, V={self.n_vertices}, "
            f"E={len(self.edges)}, F={len(self.faces)})"
        )


def distance(s: MetricSpace, p: VertexId, q: VertexId) -> float:
    """Shortest-path distance; ``math.inf`` across components."""
    return float(s.distances[s._lookup(p), s._lookup(q)])


def ball(s: MetricSpace, p: VertexId, r: float) -> Ball:
    if not r >= 0:
        raise InstanceError(f"ball radius must be nonnegative, got {r!r}")
    i = s._lookup(p)
    members = frozenset(s.ids[j] for j in s.members_within(i, r))
    return Ball(center=p, radius=float(r), members=members, volume=s.profile(i).volume(r))


def total_volume(s: MetricSpace) -> float:
    return float(s.exact_total_volume)


def density(s: MetricSpace, p: VertexId, r: float) -> float:
    """``vol(B(p, r)) / r**n`` with ``n`` the declared dimension."""
    if not r > 0:
        raise InstanceError(f"density radius must be positive, got {r!r}")
    return s.profile(s._lookup(p)).volume(r) / r**s.dimension


def breakpoints(s: MetricSpace, p: VertexId, cap: float) -> list[float]:
    if not cap > 0:
        raise InstanceError(f"cap must be positive, got {cap!r}")
    return list(s.profile(s._lookup(p)).jumps(cap))
