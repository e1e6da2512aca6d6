import math
from fractions import Fraction

import networkx as nx
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from covertrick.bounds import k_upper_bound
from covertrick.covering import (
    admissible_radius,
    build_system,
    containment_check,
    doubled_cover_check,
    empirical_beta,
    nerve_stats,
    theta_alpha,
    verify_chain,
)
from covertrick.metric_core import MetricSpace, ball
from covertrick.topology import betti1, homology_basis, systole

from oracles import admissible_radius_oracle, all_distances, betti1_oracle


@st.composite
def spaces(draw, max_vertices=9, dimension=None, min_weight=0):
    n_v = draw(st.integers(2, max_vertices))
    weights = [Fraction(draw(st.integers(min_weight, 8)), 4) for _ in range(n_v)]
    assume(any(weights))
    edges = {}
    for v in range(1, n_v):
        edges[(draw(st.integers(0, v - 1)), v)] = None
    extra = draw(st.lists(st.tuples(st.integers(0, n_v - 1), st.integers(0, n_v - 1)), max_size=2 * n_v))
    for a, b in extra:
        if a != b:
            edges[(min(a, b), max(a, b))] = None
    lengths = {e: draw(st.integers(1, 32)) / 8 for e in edges}
    dim = dimension or draw(st.integers(1, 3))
    return MetricSpace(dim, [(i, float(w)) for i, w in enumerate(weights)], [(a, b, lengths[(a, b)]) for a, b in edges])


radii = st.integers(1, 48).map(lambda k: k / 8)
alphas = st.sampled_from([1.5, 2.0, 5.0, 7.0, 25.0, 130.0])


@settings(max_examples=80, deadline=None)
@given(spaces())
def test_metric_axioms(s):
    d = s.distances
    n = s.n_vertices
    for i in range(n):
        assert d[i, i] == 0
        for j in range(n):
            assert d[i, j] == d[j, i] and d[i, j] > 0 or i == j
            for k in range(n):
                assert Fraction(d[i, k]) <= Fraction(d[i, j]) + Fraction(d[j, k])


@settings(max_examples=80, deadline=None)
@given(spaces(), radii, radii)
def test_balls_nested(s, r1, r2):
    lo, hi = sorted((r1, r2))
    for p in s.ids:
        a, b = ball(s, p, lo), ball(s, p, hi)
        assert a.members <= b.members and a.volume <= b.volume


@settings(max_examples=80, deadline=None)
@given(spaces(), radii, alphas)
def test_admissible_certificate(s, R0, alpha):
    dist = all_distances(s)
    for p in s.ids:
        b = admissible_radius(s, p, R0, alpha)
        assert 0 < b.radius <= R0
        assert b.exact_vol_5R <= Fraction(alpha) * b.exact_vol_R
        assert b.radius == admissible_radius_oracle(s, p, R0, alpha, dist)
        assert Fraction(b.radius) * 5**b.k >= Fraction(R0)


@settings(max_examples=80, deadline=None)
@given(spaces(), radii, alphas, st.data())
def test_greedy_system(s, R0, alpha, data):
    carrier = data.draw(st.sets(st.sampled_from(s.ids), min_size=1))
    system = build_system(s, carrier, R0, alpha)
    assert system.rejected == ()
    members = [b.ball.members for b in system.balls]
    for a in range(len(members)):
        for c in range(a + 1, len(members)):
            assert not members[a] & members[c]
    assert doubled_cover_check(s, system)
    assert containment_check(s, system)
    st_ = nerve_stats(s, system)
    assert 0 <= st_.T <= st_.N * (st_.N - 1) // 2 and 1 <= st_.C <= st_.N
    assert st_.cycle_rank >= 0


@settings(max_examples=60, deadline=None)
@given(spaces(min_weight=1), radii, st.data())
def test_chain_under_theta_rule(s, R0, data):
    beta = empirical_beta(s, R0)
    V = float(s.exact_total_volume)
    theta, alpha = theta_alpha(V, beta, R0, s.dimension)
    assume(alpha > 1)
    carrier = data.draw(st.sets(st.sampled_from(s.ids), min_size=1))
    system = build_system(s, carrier, R0, alpha)
    rep = verify_chain(s, system, beta)
    assert rep.passed, (rep.failing_link, rep.failures)
    if theta > 0:
        kb = k_upper_bound(V, beta, R0, s.dimension, alpha)
        assert all(b.k < kb for b in system.balls if b.radius < R0)


@settings(max_examples=60, deadline=None)
@given(spaces(), radii, st.integers(1, 64).map(lambda k: k / 16))
def test_beta_hat_lower_bound(s, R0, frac):
    beta = Fraction(empirical_beta(s, R0))
    r = Fraction(R0) * Fraction(frac).limit_denominator() if frac <= 1 else Fraction(R0)
    for i in range(s.n_vertices):
        assert s.profile(i).exact_volume(float(r)) >= beta * Fraction(float(r)) ** s.dimension


@settings(max_examples=80, deadline=None)
@given(spaces(max_vertices=8))
def test_homology_graph(s):
    b = betti1(s)
    assert b == betti1_oracle(s) == len(s.edges) - s.n_vertices + 1
    hb = homology_basis(s)
    assert len(hb) == b
    if b:
        sys_len = systole(s)
        assert all(lp.length >= sys_len for lp in hb.loops)
        g = nx.Graph()
        for u, v, length in s.edges:
            g.add_edge(u, v, weight=length)
        # shortest cycle by brute force: best edge plus detour avoiding it
        best = math.inf
        for u, v, length in s.edges:
            g.remove_edge(u, v)
            if nx.has_path(g, u, v):
                best = min(best, length + nx.dijkstra_path_length(g, u, v))
            g.add_edge(u, v, weight=length)
        assert abs(sys_len - best) <= 1e-12 * best
