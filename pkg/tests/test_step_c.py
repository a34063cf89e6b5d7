import numpy as np
import pytest

from irregular_strength import step_a, step_c
from irregular_strength.engine import PipelineState, desk_overrides, pipeline_attempt
from irregular_strength.errors import GreedyInfeasible
from irregular_strength.graph import Graph, generate_random_regular
from irregular_strength.params import derive_params

TINY = {"s_star": 1, "k_prime": 1, "k": 7, "t_b": 1, "t_g": 2}


def all_small(g, u_b=frozenset()):
    in_s = np.ones(g.n, dtype=bool)
    return step_a.PartitionState(in_s=in_s, subset=np.ones(g.n, dtype=np.int64), subset_bins=[(2, 2)],
                                 y_b=frozenset(u_b))


def make_gp(g, params=None, part=None, need=0):
    params = params or derive_params(max(g.n, 2), 2, overrides=TINY)
    part = part or all_small(g)
    return step_c.build_gprime(g, part, params, min_degree_required=need)


def test_gprime_without_bad_vertices_is_g_s():
    g = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (2, 3), (4, 5)])
    in_s = np.array([True, True, True, True, False, False])
    part = step_a.PartitionState(in_s=in_s, subset=in_s.astype(np.int64), subset_bins=[(2, 2)])
    gp = make_gp(g, part=part)
    assert gp.vertices == [0, 1, 2, 3]
    assert gp.edges() == [(0, 1), (0, 2), (1, 2), (2, 3)]
    assert gp.u_prime == frozenset()


def test_gprime_keeps_ys_links():
    g = Graph(5, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4)])
    in_s = np.array([True, True, True, False, False])
    part = step_a.PartitionState(in_s=in_s, subset=in_s.astype(np.int64), subset_bins=[(2, 2)],
                                 y_s=frozenset({0}), y_sn=frozenset({3}))
    gp = make_gp(g, part=part)
    assert (0, 3) in gp.edges()


def test_gprime_min_degree_gate():
    g = Graph(3, [(0, 1), (1, 2), (0, 2)])
    p = derive_params(1000, 10, overrides={"s_star": 2, "k_prime": 1, "k": 50, "t_b": 1, "t_g": 2})
    with pytest.raises(GreedyInfeasible):
        step_c.build_gprime(g, all_small(g), p)


def test_reset_value():
    assert step_c.reset_value(derive_params(10000, 100, overrides=TINY)) == 50
    assert step_c.reset_value(derive_params(203, 2, overrides=TINY)) == 51


def test_init_only_resets_internal_edges():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    in_s = np.array([True, True, True, False])
    part = step_a.PartitionState(in_s=in_s, subset=in_s.astype(np.int64), subset_bins=[(2, 2)],
                                 y_b=frozenset({3}))
    p = derive_params(400, 2, overrides=TINY)
    gp = make_gp(g, p, part)
    f = step_c.init_weights_c(gp, p, np.array([9, 9, 9]))
    assert f.tolist() == [100, 100, 9]


def test_order_single_edge():
    g = Graph(2, [(0, 1)])
    o = step_c.order_vertices(make_gp(g))
    assert o.order == [1, 0] and o.terminal_pairs == [(1, 0)]


def test_order_star_center_last():
    g = Graph(4, [(0, 1), (0, 2), (0, 3)])
    o = step_c.order_vertices(make_gp(g))
    assert o.order[-1] == 0
    (r, t), = o.terminal_pairs
    assert t == 0 and g.has_edge(r, t)


def test_order_invariants_on_random_graph():
    g = generate_random_regular(60, 5, 3)
    gp = make_gp(g)
    o = step_c.order_vertices(gp)
    step_c.check_ordering(gp, o)
    assert sorted(o.order) == list(range(60))


def test_c1_small_pigeonhole():
    # K4 in S, k = 3: three forward edges from the first vertex reach four sums
    g = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    gp = make_gp(g)
    o = step_c.order_vertices(gp)
    classes = {v: (0, 1) for v in range(4)}
    f, d = step_c.residue_fix_c1(g, gp, o, 3, np.full(6, 5), classes)
    wd = step_c._weights(g, f)
    assert all(int(x) % 3 in (0, 1) for x in wd)
    assert np.abs(d).max() <= 2


def test_c1_infeasible_low_degree():
    g = Graph(3, [(0, 1), (1, 2), (0, 2)])
    p = derive_params(1000, 10, overrides={"s_star": 2, "k_prime": 1, "k": 50, "t_b": 1, "t_g": 2})
    with pytest.raises(GreedyInfeasible):
        step_c.build_gprime(g, all_small(g), p)


def test_locate_roundtrip():
    k, tb, tg = 7, 2, 8
    for lam in range(3):
        for a in range(tg):
            for elem in (0, 1):
                w = 3 + (2 * lam + elem) * tg * k + a * k
                assert step_c.locate(w, k, tb, tg, False) == (3, a, lam, elem)


def test_close_sets_basic():
    p = derive_params(2000, 50, overrides={"s_star": 30, "k_prime": 2, "k": 7, "t_b": 1, "t_g": 60})
    assert step_c.is_close(1, 40, 1, 40, p)
    # a large degree ratio is never close under the default constants
    p2 = derive_params(10 ** 12, 10 ** 8)
    assert p2.mode == "paper-faithful"
    assert not step_c.is_close(1, 10, 1, 60, p2)
    assert not step_c.is_close(1, 60, 1, 10, p2)


def _desk_run(seed):
    g = generate_random_regular(2000, 50, seed)
    p = derive_params(2000, 50, overrides=desk_overrides(2000, 50))
    st = PipelineState()
    timings = {}
    w = pipeline_attempt(g, p, seed, timings, st)
    return g, p, st, w


def test_step_c_run_goals_and_bounds():
    g, p, st, w = _desk_run(2)
    sc = st.step_c
    assert sc.goals.all_passed
    assert sc.c1_max_change <= 2
    assert sc.c2_max_change <= 2 * p.t_g * p.k
    assert not sc.gprime.u_b
    assert sc.goals.equal_good_pairs == 0
    reset = step_c.reset_value(p)
    for u, v in sc.gprime.edges():
        if st.partition.in_s[u] and st.partition.in_s[v]:
            x = int(sc.weights[sc.gprime.edge(u, v)])
            assert reset - 2 * p.t_g * p.k - 2 <= x <= reset + 2 * p.t_g * p.k + 2


def test_first_vertex_gets_class_zero_lambda_zero():
    g, p, st, w = _desk_run(2)
    sc = st.step_c
    first = sc.ordering.order[0]
    anc = sc.anchors.anchors[first]
    assert first not in sc.gprime.u_prime
    assert (anc.a, anc.lam) == (0, 0)


def test_goal_report_flags_duplicates_and_residues():
    g, p, st, w = _desk_run(2)
    sc = st.step_c
    wd = step_c._weights(g, sc.weights)
    anchors = step_c.AnchorAssignment(dict(sc.anchors.anchors), dict(sc.anchors.residue_class),
                                      sc.anchors.modular)
    good = sorted(sc.gprime.u_g)
    v = good[0]
    u = next(x for x in sc.gprime.adj[v] if x in sc.gprime.u_g)
    anchors.anchors[u] = anchors.anchors[v]
    rep = step_c.check_goals(sc.gprime, anchors, wd, st.close, p)
    assert not rep.goal_iv and not rep.goal_i
    bad = wd.copy()
    bad[v] = bad[v] - bad[v] % p.k + 4
    rep2 = step_c.check_goals(sc.gprime, sc.anchors, bad, st.close, p)
    assert not rep2.residues
    assert '"all_passed"' in rep2.to_json()


def test_goal_ii_duplicate_detected():
    g, p, st, w = _desk_run(2)
    sc = st.step_c
    fake_up = frozenset(sorted(sc.gprime.u_g)[:2])
    gp = step_c.GPrime(sc.gprime.vertices, sc.gprime.adj, sc.gprime.eid, sc.gprime.in_s, fake_up,
                       sc.gprime.u_g - fake_up, fake_up, [], [], [], [], 0)
    a, b = sorted(fake_up)
    anchors = step_c.AnchorAssignment({a: step_c.Anchor(0, 0, 0), b: step_c.Anchor(0, 0, 0)})
    rep = step_c.check_goals(gp, anchors, step_c._weights(g, sc.weights), st.close, p)
    assert not rep.goal_ii
