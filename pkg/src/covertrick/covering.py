"""Admissible balls, maximal disjoint ball systems on a carrier set, nerve counts,
and the volume inequality chain bounding the number of doubled-ball intersections.

All inequalities are decided on exact rationals built from the float data, so
a reported pass is a proof for the stored numbers and not a rounding accident.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import bounds
from .metric_core import Ball, InstanceError, MetricSpace, VertexId
from .topology import HomologyBasis

__all__ = [
    "AdmissibleBall",
    "BallSystem",
    "NerveStats",
    "ChainReport",
    "admissible_radius",
    "admissible_candidates",
    "k_index",
    "empirical_beta",
    "theta_alpha",
    "build_system",
    "system_from_balls",
    "doubled_cover_check",
    "nerve_stats",
    "containment_check",
    "verify_chain",
]

LINKS = ("L1", "L2", "L3", "L4", "L5")


@dataclass(frozen=True)
class AdmissibleBall:
    """Ball at the admissible radius with its growth certificate.

    ``sup_radius`` is the real supremum of admissible radii; it equals
    ``ball.radius`` when attained and otherwise is the next float above it.
    ``grid_radius`` is the largest breakpoint-grid radius satisfying the
    growth condition, or None when only radii below the first grid point do.
    """

    ball: Ball
    k: int
    vol_R: float
    vol_5R: float
    alpha_used: float
    sup_radius: float
    grid_radius: float | None
    exact_vol_R: Fraction = field(repr=False, compare=False)
    exact_vol_5R: Fraction = field(repr=False, compare=False)

    @property
    def center(self) -> VertexId:
        return self.ball.center

    @property
    def radius(self) -> float:
        return self.ball.radius


@dataclass(frozen=True)
class BallSystem:
    balls: tuple[AdmissibleBall, ...]
    R0: float
    alpha: float
    carrier: frozenset
    # carrier vertices rejected for overlap while not yet covered; empty unless
    # rounding broke the triangle inequality
    rejected: tuple = ()

    @property
    def N(self) -> int:
        return len(self.balls)


@dataclass(frozen=True)
class NerveStats:
    N: int
    T: int
    C: int
    pairs: tuple[tuple[int, int], ...] = field(default=(), repr=False)

    @property
    def cycle_rank(self) -> int:
        return self.T - self.N + self.C


@dataclass
class ChainReport:
    V: float
    sum_vol_R: float
    sum_vol_5R: float
    double_sum: float
    beta_hat: float
    R0: float
    alpha: float
    theta: float
    n: int
    N: int
    T: int
    flags: dict[str, bool]
    failures: dict[str, list[str]]
    k_bound: float | None
    t_bound: float
    t_bound_holds: bool
    max_k: int

    @property
    def passed(self) -> bool:
        return all(self.flags.values()) and self.t_bound_holds

    @property
    def failing_link(self) -> str | None:
        for name in LINKS:
            if not self.flags[name]:
                return name
        return None if self.t_bound_holds else "T_bound"


def _growth_ok(vol_5r: Fraction, vol_r: Fraction, alpha: float) -> bool:
    return vol_5r <= Fraction(alpha) * vol_r


def _first_float_with_quintuple_at_least(d: float) -> float:
    """Smallest float r with fl(5 r) >= d."""
    r = d / 5
    while 5 * r < d:
        r = math.nextafter(r, math.inf)
    while True:
        below = math.nextafter(r, 0.0)
        if below > 0 and 5 * below >= d:
            r = below
        else:
            return r


def admissible_candidates(s: MetricSpace, i: int, R0: float) -> list[float]:
    """Sorted radii in (0, R0] where the growth condition can change value."""
    prof = s.profile(i)
    cands = {R0}
    cands.update(prof.jumps(R0))
    for d in prof.jumps(5 * R0):
        r = _first_float_with_quintuple_at_least(d)
        if 0 < r <= R0:
            cands.add(r)
    return sorted(cands)


def _admissible_at(s: MetricSpace, i: int, R0: float, alpha: float) -> AdmissibleBall:
    prof = s.profile(i)

    def ok(r: float) -> bool:
        return _growth_ok(prof.exact_volume(5 * r), prof.exact_volume(r), alpha)

    grid = admissible_candidates(s, i, R0)
    if ok(R0):
        radius = sup = grid_radius = R0
    else:
        # the condition is constant on [grid[j], grid[j+1]) and true on (0, grid[0])
        sup, grid_radius = grid[0], None
        for j in range(len(grid) - 2, -1, -1):
            if ok(grid[j]):
                sup, grid_radius = grid[j + 1], grid[j]
                break
        radius = math.nextafter(sup, 0.0)
    members = frozenset(s.ids[j] for j in s.members_within(i, radius))
    exact_r, exact_5r = prof.exact_volume(radius), prof.exact_volume(5 * radius)
    return AdmissibleBall(
        ball=Ball(center=s.ids[i], radius=radius, members=members, volume=float(exact_r)),
        k=k_index(radius, R0),
        vol_R=float(exact_r),
        vol_5R=float(exact_5r),
        alpha_used=alpha,
        sup_radius=sup,
        grid_radius=grid_radius,
        exact_vol_R=exact_r,
        exact_vol_5R=exact_5r,
    )


def _check_r0_alpha(R0: float, alpha: float) -> None:
    if not R0 > 0:
        raise InstanceError(f"R0 must be positive, got {R0!r}")
    if not alpha > 1:
        raise InstanceError(f"alpha must exceed 1, got {alpha!r}")


def admissible_radius(s: MetricSpace, p: VertexId, R0: float, alpha: float) -> AdmissibleBall:
    """Largest radius r in (0, R0] with vol(B(p, 5r)) <= alpha vol(B(p, r)).

    When the supremum is not attained the returned radius is the float just
    below it, which satisfies the condition while every larger float up to
    R0 violates it.
    """
    _check_r0_alpha(R0, alpha)
    return _admissible_at(s, s._lookup(p), float(R0), float(alpha))


def k_index(R: float, R0: float) -> int:
    """The k >= 0 with 5^-k R0 <= R < 5^(1-k) R0, and k = 0 exactly when R = R0."""
    if not (0 < R <= R0):
        raise InstanceError(f"need 0 < R <= R0, got R={R!r}, R0={R0!r}")
    if R == R0:
        return 0
    r, r0 = Fraction(R), Fraction(R0)
    k = 1
    while r * 5**k < r0:
        k += 1
    return k


def _round_down(q: Fraction) -> float:
    f = float(q)
    if Fraction(f) > q:
        f = math.nextafter(f, -math.inf)
    return f


def empirical_beta(s: MetricSpace, R0: float) -> float:
    """inf over vertices p and r in (0, R0] of vol(B(p, r)) / r^n.

    The density is v / r^n on each step of the volume profile, so the
    infimum is taken at the right end of each step (clipped to R0).  The
    exact minimum is rounded down so vol(B(p, R)) >= beta R^n holds exactly.
    """
    if not R0 > 0:
        raise InstanceError(f"R0 must be positive, got {R0!r}")
    n = s.dimension
    r0 = Fraction(R0)
    best: Fraction | None = None
    for i in range(s.n_vertices):
        prof = s.profile(i)
        radii, vols = prof.radii, prof.exact
        for j, start in enumerate(radii):
            if start >= R0 and j > 0:
                break
            end = r0 if j + 1 == len(radii) else min(Fraction(radii[j + 1]), r0)
            val = vols[j] / end**n
            if best is None or val < best:
                best = val
    return _round_down(best)


def theta_alpha(V: float, beta: float, R0: float, n: int) -> tuple[float, float]:
    """theta = sqrt(log5(V / (beta R0^n))) and alpha = 5^(n + theta)."""
    ratio = bounds.volume_ratio(V, beta, R0, n)
    if ratio < 1:
        raise bounds.BoundError(f"ratio below 1: V/(beta R0^n) = {ratio!r}")
    theta = math.sqrt(bounds.log5(ratio))
    return theta, 5 ** (n + theta)


def _carrier_of(s: MetricSpace, basis: HomologyBasis | Iterable[VertexId]) -> frozenset:
    if isinstance(basis, HomologyBasis):
        carrier = basis.carrier
    else:
        carrier = frozenset(basis)
    for v in carrier:
        s._lookup(v)
    return carrier


def build_system(
    s: MetricSpace, basis: HomologyBasis | Iterable[VertexId], R0: float, alpha: float
) -> BallSystem:
    """Greedy maximal system of disjoint admissible balls centered on the carrier.

    Candidates are taken by decreasing admissible radius (ties: lower vertex
    index); a candidate already inside some doubled ball is skipped, any
    other one is added.  An uncovered candidate always has a ball disjoint
    from the chosen ones: overlap with an earlier ball of radius R_j >= R
    would put it within 2 R_j of that center.
    """
    _check_r0_alpha(R0, alpha)
    carrier = _carrier_of(s, basis)
    if not carrier:
        raise InstanceError("empty carrier: nothing to cover")
    R0, alpha = float(R0), float(alpha)
    dist = s.distances
    order = sorted(s.index[v] for v in carrier)
    adm = {i: _admissible_at(s, i, R0, alpha) for i in order}
    order.sort(key=lambda i: (-adm[i].radius, i))

    occupied = np.zeros(s.n_vertices, dtype=bool)
    chosen: list[int] = []
    rejected = []
    for i in order:
        if any(dist[c, i] <= 2 * adm[c].radius for c in chosen):
            continue
        inside = dist[i] <= adm[i].radius
        if np.any(occupied & inside):
            rejected.append(s.ids[i])
            continue
        occupied |= inside
        chosen.append(i)
    return BallSystem(
        balls=tuple(adm[i] for i in chosen),
        R0=R0,
        alpha=alpha,
        carrier=carrier,
        rejected=tuple(rejected),
    )


def system_from_balls(
    s: MetricSpace,
    balls: Iterable[tuple[VertexId, float]],
    R0: float,
    alpha: float,
    carrier: Iterable[VertexId] | None = None,
) -> BallSystem:
    """Assemble a system from explicit ``(center, radius)`` pairs without any checks.

    Used to replay serialized systems and to build deliberately broken ones.
    """
    made = []
    for center, radius in balls:
        i = s._lookup(center)
        prof = s.profile(i)
        exact_r, exact_5r = prof.exact_volume(radius), prof.exact_volume(5 * radius)
        members = frozenset(s.ids[j] for j in s.members_within(i, radius))
        made.append(
            AdmissibleBall(
                ball=Ball(center=center, radius=float(radius), members=members, volume=float(exact_r)),
                k=k_index(radius, R0),
                vol_R=float(exact_r),
                vol_5R=float(exact_5r),
                alpha_used=float(alpha),
                sup_radius=float(radius),
                grid_radius=None,
                exact_vol_R=exact_r,
                exact_vol_5R=exact_5r,
            )
        )
    if carrier is None:
        carrier = [b.center for b in made]
    return BallSystem(balls=tuple(made), R0=float(R0), alpha=float(alpha), carrier=frozenset(carrier))


def doubled_cover_check(s: MetricSpace, system: BallSystem) -> bool:
    """Every carrier vertex lies in some B(p_j, 2 R_j)."""
    covered: set = set()
    for b in system.balls:
        i = s._lookup(b.center)
        covered.update(s.ids[j] for j in s.members_within(i, 2 * b.radius))
    return system.carrier <= covered


def _masks(s: MetricSpace, system: BallSystem, factor: float) -> list[np.ndarray]:
    return [s.distances[s._lookup(b.center)] <= factor * b.radius for b in system.balls]


def nerve_stats(s: MetricSpace, system: BallSystem) -> NerveStats:
    """Ball count, intersecting doubled pairs, and components of the nerve graph."""
    doubled = _masks(s, system, 2)
    n = len(doubled)
    pairs = tuple(
        (a, b) for a in range(n) for b in range(a + 1, n) if np.any(doubled[a] & doubled[b])
    )
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    n_comp = sum(1 for x in range(n) if find(x) == x)
    return NerveStats(N=n, T=len(pairs), C=n_comp, pairs=pairs)


def _contained(s: MetricSpace, small: AdmissibleBall, big: AdmissibleBall) -> bool:
    inner = s.distances[s._lookup(small.center)] <= small.radius
    outer = s.distances[s._lookup(big.center)] <= 5 * big.radius
    return not np.any(inner & ~outer)


def containment_check(s: MetricSpace, system: BallSystem) -> bool:
    """B(p_l, R_l) is inside B(p_i, 5 R_i) for every intersecting doubled pair with R_l <= R_i."""
    balls = system.balls
    for a, b in nerve_stats(s, system).pairs:
        big, small = (balls[a], balls[b]) if balls[a].radius >= balls[b].radius else (balls[b], balls[a])
        if not _contained(s, small, big):
            return False
        if big.radius == small.radius and not _contained(s, big, small):
            return False
    return True


def _charge(s: MetricSpace, system: BallSystem, pairs) -> dict[int, list[int]]:
    """Assign each intersecting pair to its larger-radius ball (ties: lower center index)."""
    balls = system.balls
    charged: dict[int, list[int]] = {j: [] for j in range(len(balls))}
    for a, b in pairs:
        ka = (-balls[a].radius, s._lookup(balls[a].center))
        kb = (-balls[b].radius, s._lookup(balls[b].center))
        owner, other = (a, b) if ka < kb else (b, a)
        charged[owner].append(other)
    return charged


def verify_chain(s: MetricSpace, system: BallSystem, beta_hat: float) -> ChainReport:
    """Check each link of the volume chain on this system and evaluate the T bound.

    L1  V >= sum_j vol(B_j(R_j)), with the R-balls pairwise disjoint
    L2  alpha vol(B_j(R_j)) >= vol(B_j(5 R_j))
    L3  vol(B_j(5 R_j)) >= sum of vol(B_i(R_i)) over pairs charged to j,
        with each such B_i(R_i) inside B_j(5 R_j)
    L4  vol(B_i(R_i)) >= beta_hat R_i^n for every charged neighbor
    L5  R_i >= 5^-k R0, and k < k_upper_bound whenever R_i < R0
    """
    n = s.dimension
    R0, alpha = system.R0, system.alpha
    balls = system.balls
    V = s.exact_total_volume
    flags = {name: True for name in LINKS}
    failures: dict[str, list[str]] = {name: [] for name in LINKS}

    def fail(link: str, msg: str) -> None:
        flags[link] = False
        failures[link].append(msg)

    vol_r, vol_5r = [], []
    for b in balls:
        prof = s.profile(s._lookup(b.center))
        vol_r.append(prof.exact_volume(b.radius))
        vol_5r.append(prof.exact_volume(5 * b.radius))

    # L1
    inner = _masks(s, system, 1)
    for a in range(len(balls)):
        for c in range(a + 1, len(balls)):
            if np.any(inner[a] & inner[c]):
                fail("L1", f"balls at {balls[a].center!r} and {balls[c].center!r} overlap")
    sum_r = sum(vol_r, Fraction(0))
    if not V >= sum_r:
        fail("L1", f"sum of ball volumes {float(sum_r)!r} exceeds V = {float(V)!r}")

    # L2
    for b, vr, v5 in zip(balls, vol_r, vol_5r):
        if not _growth_ok(v5, vr, alpha):
            fail("L2", f"ball at {b.center!r}: vol(5R) = {float(v5)!r} > alpha vol(R)")

    stats = nerve_stats(s, system)
    charged = _charge(s, system, stats.pairs)

    # L3
    double_sum = Fraction(0)
    for j, nbrs in charged.items():
        part = sum((vol_r[i] for i in nbrs), Fraction(0))
        double_sum += part
        for i in nbrs:
            if not _contained(s, balls[i], balls[j]):
                fail("L3", f"ball at {balls[i].center!r} not inside 5R-ball at {balls[j].center!r}")
        if not vol_5r[j] >= part:
            fail("L3", f"ball at {balls[j].center!r}: charged neighbors outweigh vol(5R)")

    theta = None
    try:
        theta, _ = theta_alpha(float(V), beta_hat, R0, n)
        t_bound = bounds.t_upper_bound(float(V), beta_hat, R0, n)
    except bounds.BoundError:
        t_bound = math.nan
    try:
        k_bound = bounds.k_upper_bound(float(V), beta_hat, R0, n, alpha)
    except bounds.BoundError:
        k_bound = None

    # L4, L5
    beta_q, r0_q = Fraction(beta_hat), Fraction(R0)
    max_k = 0
    for j, nbrs in charged.items():
        for i in nbrs:
            b = balls[i]
            r = Fraction(b.radius)
            if not vol_r[i] >= beta_q * r**n:
                fail("L4", f"ball at {b.center!r}: vol(R) below beta_hat R^n")
            k = k_index(b.radius, R0)
            max_k = max(max_k, k)
            if not r * 5**k >= r0_q:
                fail("L5", f"ball at {b.center!r}: R below 5^-k R0")
            if b.radius < R0:
                if k_bound is None:
                    fail("L5", f"ball at {b.center!r}: k bound undefined for alpha = {alpha!r}")
                elif not k < k_bound:
                    fail("L5", f"ball at {b.center!r}: k = {k} not below {k_bound!r}")

    return ChainReport(
        V=float(V),
        sum_vol_R=float(sum_r),
        sum_vol_5R=float(sum(vol_5r, Fraction(0))),
        double_sum=float(double_sum),
        beta_hat=beta_hat,
        R0=R0,
        alpha=alpha,
        theta=math.nan if theta is None else theta,
        n=n,
        N=stats.N,
        T=stats.T,
        flags=flags,
        failures=failures,
        k_bound=k_bound,
        t_bound=t_bound,
        t_bound_holds=bool(stats.T <= t_bound),
        max_k=max_k,
    )
