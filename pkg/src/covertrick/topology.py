"""GF(2) homology of a weighted graph / 2-complex: Betti number, short basis, systole.

Cycles are edge bitsets (Python ints, bit ``e`` for edge index ``e``).  The
first homology is the cycle space modulo face boundaries.  We pick a
spanning forest, row-reduce the face boundaries restricted to the non-tree
edges, and read off one linear functional per free coordinate.  Those
functionals evaluate the homology class of any cycle as a ``b``-bit
signature, so triviality and independence tests are a few XORs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .metric_core import Ball, InstanceError, MetricSpace, VertexId, total_volume

__all__ = [
    "Loop",
    "HomologyBasis",
    "NoSystoleError",
    "gf2_rank",
    "betti1",
    "homology_basis",
    "systole",
    "is_trivial_cycle",
    "ball_contractible",
    "systolic_ratio",
    "loop_from_walk",
]


class NoSystoleError(InstanceError):
    """The space has trivial first homology, so no systole exists."""


@dataclass(frozen=True)
class Loop:
    vertices: tuple  # closed walk, first == last
    length: float
    support: frozenset  # edge indices traversed
    cycle: int = field(repr=False, compare=False)  # GF(2) edge vector


@dataclass(frozen=True)
class HomologyBasis:
    loops: tuple[Loop, ...]
    carrier: frozenset

    def __len__(self) -> int:
        return len(self.loops)


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of bitset rows."""
    pivots: dict[int, int] = {}
    for x in rows:
        while x:
            top = x.bit_length() - 1
            if top not in pivots:
                pivots[top] = x
                break
            x ^= pivots[top]
    return len(pivots)


class _SignatureBasis:
    """Incremental echelon basis for homology signatures."""

    def __init__(self) -> None:
        self.pivots: dict[int, int] = {}

    def reduce(self, x: int) -> int:
        while x:
            top = x.bit_length() - 1
            row = self.pivots.get(top)
            if row is None:
                return x
            x ^= row
        return 0

    def add(self, x: int) -> bool:
        x = self.reduce(x)
        if x:
            self.pivots[x.bit_length() - 1] = x
            return True
        return False


class _Homology:
    """Cached homology machinery for one space."""

    def __init__(self, s: MetricSpace):
        self.s = s
        n_edges = len(s.edges)

        # spanning forest by BFS from the lowest unvisited index
        tree: set[int] = set()
        seen = [False] * s.n_vertices
        for root in range(s.n_vertices):
            if seen[root]:
                continue
            seen[root] = True
            frontier = [root]
            while frontier:
                nxt = []
                for u in frontier:
                    for v, _, e in s.adjacency[u]:
                        if not seen[v]:
                            seen[v] = True
                            tree.add(e)
                            nxt.append(v)
                frontier = nxt
        cotree = [e for e in range(n_edges) if e not in tree]

        # reduced row echelon form of face boundaries on the cotree coordinates
        rows: dict[int, int] = {}
        pivot_mask = 0
        for face in s.faces:
            x = 0
            for e in _face_edges(s, face):
                if e not in tree:
                    x ^= 1 << e
            while True:
                hit = x & pivot_mask
                if not hit:
                    break
                low = (hit & -hit).bit_length() - 1
                x ^= rows[low]
            if not x:
                continue
            low = (x & -x).bit_length() - 1
            for c, r in rows.items():
                if (r >> low) & 1:
                    rows[c] = r ^ x
            rows[low] = x
            pivot_mask |= 1 << low

        free = [e for e in cotree if not (pivot_mask >> e) & 1]
        functionals = []
        for q in free:
            phi = 1 << q
            for c, r in rows.items():
                if (r >> q) & 1:
                    phi |= 1 << c
            functionals.append(phi)
        self.rank = len(free)

        edge_sig = [0] * n_edges
        for k, phi in enumerate(functionals):
            while phi:
                low = phi & -phi
                edge_sig[low.bit_length() - 1] |= 1 << k
                phi ^= low
        self.edge_sig = edge_sig

    def signature(self, cycle: int) -> int:
        sig = 0
        while cycle:
            low = cycle & -cycle
            sig ^= self.edge_sig[low.bit_length() - 1]
            cycle ^= low
        return sig

    @cached_property
    def candidates(self) -> list[Loop]:
        """Distinct nontrivial fundamental cycles of all shortest-path trees, sorted."""
        s = self.s
        dist = s.distances
        found: dict[int, tuple] = {}
        for r in range(s.n_vertices):
            row = dist[r]
            reach = [v for v in range(s.n_vertices) if math.isfinite(row[v])]
            reach.sort(key=lambda v: (row[v], v))
            parent: dict[int, tuple[int, int]] = {}
            depth = {r: 0}
            sig = {r: 0}
            for v in reach[1:]:
                for u, length, e in s.adjacency[v]:
                    if row[u] < row[v] and row[u] + length == row[v]:
                        parent[v] = (u, e)
                        depth[v] = depth[u] + 1
                        sig[v] = sig[u] ^ self.edge_sig[e]
                        break
                else:  # pragma: no cover - only for non-reproducible float sums
                    raise RuntimeError(f"no shortest-path parent for vertex {v} from {r}")
            tree_edges = {e for _, e in parent.values()}
            for v in reach:
                for u, _, e in s.adjacency[v]:
                    if u < v or e in tree_edges:
                        continue
                    if not (sig[u] ^ sig[v] ^ self.edge_sig[e]):
                        continue
                    cycle, verts = _tree_cycle(parent, depth, u, v, e)
                    if cycle not in found:
                        found[cycle] = verts
        loops = [_make_loop(s, verts, cycle) for cycle, verts in found.items()]
        loops.sort(key=lambda lp: (lp.length, _canonical(lp.vertices)))
        return loops

    @cached_property
    def basis(self) -> tuple[Loop, ...]:
        chosen: list[Loop] = []
        span = _SignatureBasis()
        for loop in self.candidates:
            if len(chosen) == self.rank:
                break
            if span.add(self.signature(loop.cycle)):
                chosen.append(loop)
        return tuple(chosen)


def _face_edges(s: MetricSpace, face: Sequence[int]) -> list[int]:
    a, b, c = face
    return [s.edge_index[(min(x, y), max(x, y))] for x, y in ((a, b), (b, c), (a, c))]


def _tree_cycle(parent, depth, u: int, v: int, e: int) -> tuple[int, list[int]]:
    """Cycle ``u -> lca -> v -> u`` through the tree plus edge ``e``."""
    cycle = 1 << e
    left, right = [u], [v]
    a, b = u, v
    while a != b:
        if depth[a] >= depth[b]:
            a, pe = parent[a]
            cycle ^= 1 << pe
            left.append(a)
        else:
            b, pe = parent[b]
            cycle ^= 1 << pe
            right.append(b)
    # left ends at lca, right ends at lca too
    verts = left + right[-2::-1] + [u]
    return cycle, verts


def _make_loop(s: MetricSpace, verts: Sequence[int], cycle: int) -> Loop:
    edges = [s.edge_index[(min(a, b), max(a, b))] for a, b in zip(verts, verts[1:])]
    length = math.fsum(s.edges[e][2] for e in edges)
    return Loop(vertices=tuple(verts), length=length, support=frozenset(edges), cycle=cycle)


def _canonical(verts: Sequence[int]) -> tuple[int, ...]:
    ring = list(verts[:-1])
    start = ring.index(min(ring))
    fwd = ring[start:] + ring[:start]
    bwd = [fwd[0]] + fwd[:0:-1]
    return tuple(min(fwd, bwd))


def _homology(s: MetricSpace) -> _Homology:
    h = s.__dict__.get("_homology")
    if h is None:
        h = _Homology(s)
        s.__dict__["_homology"] = h
    return h


def _loop_to_ids(s: MetricSpace, loop: Loop) -> Loop:
    return Loop(
        vertices=tuple(s.ids[i] for i in loop.vertices),
        length=loop.length,
        support=loop.support,
        cycle=loop.cycle,
    )


def loop_from_walk(s: MetricSpace, walk: Sequence[VertexId]) -> Loop:
    """Validate a closed walk given by vertex ids and build its Loop."""
    if len(walk) < 3 or walk[0] != walk[-1]:
        raise InstanceError(f"walk {list(walk)!r} is not closed")
    idx = [s._lookup(v) for v in walk]
    cycle = 0
    edges = []
    for a, b in zip(idx, idx[1:]):
        e = s.edge_index.get((min(a, b), max(a, b)))
        if e is None:
            raise InstanceError(f"walk uses missing edge ({s.ids[a]!r}, {s.ids[b]!r})")
        edges.append(e)
        cycle ^= 1 << e
    length = math.fsum(s.edges[e][2] for e in edges)
    return Loop(vertices=tuple(walk), length=length, support=frozenset(edges), cycle=cycle)


def betti1(s: MetricSpace) -> int:
    """First Betti number over GF(2): cycle rank modulo face boundaries."""
    return _homology(s).rank


def homology_basis(s: MetricSpace) -> HomologyBasis:
    """Shortest-first greedy basis, or the instance's marked loops when given.

    Marked loops must be independent and as many as ``betti1(s)``.
    """
    h = _homology(s)
    if s.marked_loops is not None:
        loops = tuple(loop_from_walk(s, walk) for walk in s.marked_loops)
        span = _SignatureBasis()
        for loop in loops:
            if not span.add(h.signature(loop.cycle)):
                raise InstanceError(f"marked loop {list(loop.vertices)!r} is dependent or trivial")
        if len(loops) != h.rank:
            raise InstanceError(f"{len(loops)} marked loops for betti1 = {h.rank}")
    else:
        loops = tuple(_loop_to_ids(s, lp) for lp in h.basis)
    carrier = frozenset(v for lp in loops for v in lp.vertices)
    return HomologyBasis(loops=loops, carrier=carrier)


def systole(s: MetricSpace) -> float:
    """Length of the shortest homologically nontrivial cycle."""
    cands = _homology(s).candidates
    if not cands:
        raise NoSystoleError("betti1 = 0: no systole")
    return cands[0].length


def shortest_nontrivial_loop(s: MetricSpace) -> Loop:
    cands = _homology(s).candidates
    if not cands:
        raise NoSystoleError("betti1 = 0: no systole")
    return _loop_to_ids(s, cands[0])


def is_trivial_cycle(s: MetricSpace, loop: Loop | Sequence[VertexId]) -> bool:
    if not isinstance(loop, Loop):
        loop = loop_from_walk(s, loop)
    return _homology(s).signature(loop.cycle) == 0


def subcomplex_betti(s: MetricSpace, members: Iterable[VertexId]) -> tuple[int, int]:
    """(components, betti1) of the subcomplex induced on ``members``."""
    keep = sorted({s._lookup(v) for v in members})
    if not keep:
        return 0, 0
    inside = set(keep)
    parent = {v: v for v in keep}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    n_edges = 0
    for u, v, _ in s.edges:
        if u in inside and v in inside:
            n_edges += 1
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    n_comp = sum(1 for v in keep if find(v) == v)
    boundaries = [
        sum(1 << e for e in _face_edges(s, f))
        for f in s.faces
        if f[0] in inside and f[1] in inside and f[2] in inside
    ]
    return n_comp, n_edges - len(keep) + n_comp - gf2_rank(boundaries)


def ball_contractible(s: MetricSpace, b: Ball) -> bool:
    """Connected and GF(2)-acyclic in degree one on the induced subcomplex."""
    n_comp, b1 = subcomplex_betti(s, b.members)
    return n_comp == 1 and b1 == 0


def systolic_ratio(s: MetricSpace) -> float:
    """Total volume over the squared systole for this single metric."""
    if s.dimension != 2:
        raise InstanceError("systolic ratio is defined for dimension 2")
    return total_volume(s) / systole(s) ** 2
