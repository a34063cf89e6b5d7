"""Separating S and the bad vertices with weights congruent to 0..5 mod k."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityExceeded, GreedyInfeasible, OrderingInvariantViolation, PartitionDegenerate
from .graph import Graph
from .params import Parameters, cdiv
from .step_a import PartitionState
from .step_b import edge_index


@dataclass
class GPrime:
    vertices: list
    adj: dict                # v -> sorted G' neighbours
    eid: dict                # (u, v) with u < v -> edge id in g.edges()
    in_s: np.ndarray
    u_b: frozenset
    u_g: frozenset
    u_prime: frozenset
    w: list                  # isolated vertices of G'[S]
    comps_s: list            # non-trivial components of G'[S]
    comps_u: list            # non-trivial components of G'[U']
    w_prime: list            # isolated vertices of G'[U']
    min_degree: int

    def edge(self, u, v) -> int:
        return self.eid[(u, v) if u < v else (v, u)]

    def edges(self):
        return sorted((u, v) for u in self.vertices for v in self.adj[u] if u < v)

    def is_active(self, v, u) -> bool:
        """Whether {v, u} may be changed while v is processed."""
        return v in self.u_b or bool(self.in_s[u])

    def residue_class(self, v) -> tuple:
        if v in self.u_prime:
            return (0, 1)
        if v in self.u_g:
            return (2, 3)
        return (4, 5)


def _components(vertices, nbrs):
    seen = set()
    comps, isolated = [], []
    for v in sorted(vertices):
        if v in seen:
            continue
        comp = []
        stack = [v]
        seen.add(v)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in nbrs(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(comp) == 1:
            isolated.append(v)
        else:
            comps.append(sorted(comp))
    return comps, isolated


def build_gprime(g: Graph, partition: PartitionState, params: Parameters,
                 min_degree_required: Optional[int] = None) -> GPrime:
    in_s = partition.in_s
    u_b = partition.u_b
    u_g = partition.u_g
    verts = sorted(set(int(v) for v in partition.S) | set(u_b))
    if not partition.in_s.any():
        raise PartitionDegenerate("the small set S is empty")
    y_s, y_sn = partition.y_s, partition.y_sn
    vset = set(verts)
    adj = {v: [] for v in verts}
    for u, v in g.edges():
        if u not in vset or v not in vset:
            continue
        keep = (in_s[u] and in_s[v]) \
            or (u in u_b and in_s[v]) or (v in u_b and in_s[u]) \
            or (u in y_s and v in y_sn) or (v in y_s and u in y_sn)
        if keep:
            adj[u].append(v)
            adj[v].append(u)
    adj = {v: sorted(a) for v, a in adj.items()}
    s_set = [v for v in verts if in_s[v]]
    comps_s, w = _components(s_set, lambda x: (y for y in adj[x] if in_s[y]))
    u_prime = frozenset(v for v in verts if not in_s[v]) | frozenset(w)
    comps_u, w_prime = _components(u_prime, lambda x: (y for y in adj[x] if y in u_prime))
    min_deg = min((len(adj[v]) for v in verts), default=0)
    gp = GPrime(verts, adj, edge_index(g), in_s, u_b, u_g, u_prime, sorted(w),
                comps_s, comps_u, sorted(w_prime), min_deg)
    need = params.k + 7 if min_degree_required is None else min_degree_required
    if min_deg < need:
        raise GreedyInfeasible(f"auxiliary graph has min degree {min_deg} < {need}")
    return gp


def reset_value(params: Parameters) -> int:
    return cdiv(params.n_over_delta, 2)


def init_weights_c(gp: GPrime, params: Parameters, f) -> np.ndarray:
    """Reset G'[S] and G'[B] edges; cross edges keep their Step B value."""
    f = np.array(f, dtype=np.int64)
    val = reset_value(params)
    for u, v in gp.edges():
        if gp.in_s[u] == gp.in_s[v]:
            f[gp.edge(u, v)] = val
    return f


@dataclass
class VertexOrdering:
    order: list
    terminal_pairs: list

    def position(self) -> dict:
        return {v: i for i, v in enumerate(self.order)}


def reversed_bfs(comp, nbrs) -> list:
    root = comp[0]
    seen = {root}
    out = []
    queue = deque([root])
    members = set(comp)
    while queue:
        x = queue.popleft()
        out.append(x)
        for y in nbrs(x):
            if y in members and y not in seen:
                seen.add(y)
                queue.append(y)
    return out[::-1]


def order_vertices(gp: GPrime) -> VertexOrdering:
    order = list(gp.w_prime)
    tails = []
    for comp in gp.comps_u:
        seq = reversed_bfs(comp, lambda x: gp.adj[x])
        order += seq
        tails.append((seq[-2], seq[-1]))
    for comp in gp.comps_s:
        seq = reversed_bfs(comp, lambda x: (y for y in gp.adj[x] if gp.in_s[y]))
        order += seq
        tails.append((seq[-2], seq[-1]))
    pos = {v: i for i, v in enumerate(order)}
    pairs = []
    tail_of = {t: r for r, t in tails}
    for v in order:
        if any(pos[u] > pos[v] and gp.is_active(v, u) for u in gp.adj[v]):
            continue
        r = tail_of.get(v)
        if r is None:
            raise OrderingInvariantViolation(f"vertex {v} has no active forward edge and no partner")
        pairs.append((r, v))
    check_ordering(gp, VertexOrdering(order, pairs))
    return VertexOrdering(order, pairs)


def check_ordering(gp: GPrime, ordering: VertexOrdering):
    pos = ordering.position()
    up = gp.u_prime
    seen_outside = False
    for v in ordering.order:
        if v in up and seen_outside:
            raise OrderingInvariantViolation("a U' vertex follows a vertex outside U'")
        seen_outside = seen_outside or v not in up
    used = set()
    for r, t in ordering.terminal_pairs:
        if t not in gp.adj[r] or pos[r] + 1 != pos[t] or not gp.is_active(r, t):
            raise OrderingInvariantViolation(f"pair ({r}, {t}) is not an active forward edge")
        if r in used or t in used:
            raise OrderingInvariantViolation("terminal pairs overlap")
        used.update((r, t))
        if (r in up) != (t in up):
            raise OrderingInvariantViolation("terminal pair straddles U'")


def _weights(g: Graph, f) -> np.ndarray:
    from .weighting import degrees_from_array
    return degrees_from_array(g, f)


def residue_fix_c1(g: Graph, gp: GPrime, ordering: VertexOrdering, k: int, f, classes=None):
    """Move every G' vertex into its residue pair mod k with edge changes in {-1, 0, 1}.

    Returns (weights, per-edge change).
    """
    f = np.array(f, dtype=np.int64)
    start = f.copy()
    wd = _weights(g, f)
    classes = classes or {v: gp.residue_class(v) for v in gp.vertices}
    pos = ordering.position()
    for v in ordering.order:
        plus, minus = [], []
        for u in gp.adj[v]:
            e = gp.edge(v, u)
            if pos[u] > pos[v]:
                plus.append((e, u))
            elif wd[u] % k == classes[u][0] % k:
                plus.append((e, u))
            elif f[e] >= 2:
                minus.append((e, u))
        cur = int(wd[v])
        allowed = {c % k for c in classes[v]}
        best = None
        for t in range(cur - len(minus), cur + len(plus) + 1):
            if t % k in allowed:
                key = (abs(t - cur), -t)
                if best is None or key < best[0]:
                    best = (key, t)
        if best is None:
            raise GreedyInfeasible(f"vertex {v}: {len(plus) + len(minus) + 1} reachable sums cannot hit {sorted(allowed)} mod {k}")
        t = best[1]
        step, chosen = (1, plus[:t - cur]) if t >= cur else (-1, minus[:cur - t])
        for e, u in chosen:
            f[e] += step
            wd[v] += step
            wd[u] += step
        for e, u in chosen:
            if pos[u] < pos[v] and wd[u] % k not in {c % k for c in classes[u]}:
                raise GreedyInfeasible(f"vertex {u} left its residue pair")
    return f, f - start


@dataclass
class Anchor:
    l: int
    a: int
    lam: int

    def key(self):
        return (self.l, self.a, self.lam)


@dataclass
class AnchorAssignment:
    anchors: dict = field(default_factory=dict)        # v -> Anchor
    residue_class: dict = field(default_factory=dict)  # v -> (lo, hi)
    modular: frozenset = frozenset()                   # vertices read mod t_g k

    def as_dict(self) -> dict:
        return {str(v): list(a.key()) for v, a in sorted(self.anchors.items())}


def locate(w: int, k: int, t_b: int, t_g: int, modular: bool):
    """(l, a, lam, elem) of a weight inside the anchor grid."""
    l = w % k
    z = (w - l) // k
    if modular:
        z %= t_g
        a, j = z % t_b, z // t_b
    else:
        a, j = z % t_g, z // t_g
    return l, a, j // 2, j % 2


class CloseSets:
    """Symmetric closeness relation on S, stored by (subset, degree) groups."""

    def __init__(self, keys, members, nbrs):
        self.keys = keys
        self.members = members
        self.nbrs = nbrs
        self.group_of = {v: gi for gi, mem in enumerate(members) for v in mem}

    def contains(self, v, u) -> bool:
        return self.group_of[u] in self.nbrs_set(self.group_of[v])

    def nbrs_set(self, gi):
        return set(self.nbrs[gi])

    def members_of(self, v) -> list:
        return sorted(u for gi in self.nbrs[self.group_of[v]] for u in self.members[gi])

    def size(self, v) -> int:
        return sum(len(self.members[gi]) for gi in self.nbrs[self.group_of[v]])

    def sizes(self) -> dict:
        return {v: self.size(v) for v in self.group_of}


def close_window(params: Parameters) -> float:
    return 13 * params.n / params.delta ** (1 + params.epsilon) + 4


def is_close(q, dv, p, du, params: Parameters) -> bool:
    win = close_window(params)
    cq, cp = params.cross_weight(q), params.cross_weight(p)
    return (cq + win) * dv > (cp - win) * du and (cq - win) * dv < (cp + win) * du


def compute_close_sets(g: Graph, partition: PartitionState, params: Parameters) -> CloseSets:
    groups = {}
    for v in partition.S:
        key = (int(partition.subset[v]), g.degree(int(v)))
        groups.setdefault(key, []).append(int(v))
    keys = sorted(groups)
    members = [groups[key] for key in keys]
    nbrs = [[j for j, (p, du) in enumerate(keys) if is_close(q, dv, p, du, params)]
            for (q, dv) in keys]
    return CloseSets(keys, members, nbrs)


class _Registry:
    """Anchors already fixed, indexed by (l, a), per blocking family."""

    def __init__(self, period):
        self.period = period
        self.lams = {}

    def add(self, anc: Anchor):
        self.lams.setdefault((anc.l, anc.a), set()).add(anc.lam)

    def occupancy(self, l) -> np.ndarray:
        occ = np.zeros(self.period, dtype=np.int64)
        for (ll, a), s in self.lams.items():
            if ll == l:
                occ[a] += len(s)
        return occ

    def blocked(self, l, a) -> set:
        return self.lams.get((l, a), set())


class _GoodRegistry:
    def __init__(self, close: CloseSets, period):
        self.close = close
        self.period = period
        self.by_group = {}

    def add(self, v, anc: Anchor):
        self.by_group.setdefault(self.close.group_of[v], {}).setdefault((anc.l, anc.a), set()).add(anc.lam)

    def occupancy(self, v, l) -> np.ndarray:
        occ = np.zeros(self.period, dtype=np.int64)
        for gi in self.close.nbrs[self.close.group_of[v]]:
            for (ll, a), s in self.by_group.get(gi, {}).items():
                if ll == l:
                    occ[a] += len(s)
        return occ

    def blocked(self, v, l, a) -> set:
        out = set()
        for gi in self.close.nbrs[self.close.group_of[v]]:
            out |= self.by_group.get(gi, {}).get((l, a), set())
        return out


@dataclass
class C2Stats:
    max_edge_change: int = 0
    goal_one_checks: int = 0
    capacity: dict = field(default_factory=dict)


def anchor_assign_c2(g: Graph, gp: GPrime, ordering: VertexOrdering, close: CloseSets,
                     params: Parameters, f):
    """Fix an anchor pair for every G' vertex, processing in `ordering`.

    Returns (weights, AnchorAssignment, C2Stats).
    """
    k, t_b, t_g = params.k, params.t_b, params.t_g
    f = np.array(f, dtype=np.int64)
    start = f.copy()
    wd = _weights(g, f)
    pos = ordering.position()
    up = gp.u_prime
    reg_u = _Registry(t_b)
    reg_bad = _Registry(t_g)
    reg_good = _GoodRegistry(close, t_g)
    result = AnchorAssignment(modular=up)
    for v in gp.vertices:
        result.residue_class[v] = gp.residue_class(v)

    def period(v):
        return t_b if v in up else t_g

    def where(v):
        return locate(int(wd[v]), k, t_b, t_g, v in up)

    def occupancy(v, l):
        if v in up:
            return reg_u.occupancy(l)
        if v in gp.u_b:
            return reg_bad.occupancy(l)
        return reg_good.occupancy(v, l)

    def blocked(v, l, a):
        if v in up:
            return reg_u.blocked(l, a)
        if v in gp.u_b:
            return reg_bad.blocked(l, a)
        return reg_good.blocked(v, l, a)

    def register(v, anc):
        result.anchors[v] = anc
        if v in up:
            reg_u.add(anc)
        elif v in gp.u_b:
            reg_bad.add(anc)
        else:
            reg_good.add(v, anc)

    def bump(e, u, v, amount):
        f[e] += amount
        wd[u] += amount
        wd[v] += amount

    def active_edges(v, skip):
        fwd, back = [], []
        for u in gp.adj[v]:
            e = gp.edge(v, u)
            if e in skip or not gp.is_active(v, u):
                continue
            (fwd if pos[u] > pos[v] else back).append((e, u))
        return fwd, back

    def finish(v, fwd_plus, back, step):
        plus = list(fwd_plus)
        minus = []
        for e, u in back:
            if v not in up and u in up:
                plus.append((e, u))
                continue
            if where(u)[3] == 0:
                plus.append((e, u))
            elif f[e] - step >= 1:
                minus.append((e, u))
        w0 = int(wd[v])
        l, a, _, _ = where(v)
        taken = blocked(v, l, a)
        chosen = None
        for s in range(-len(minus), len(plus) + 1):
            lam = locate(w0 + s * step, k, t_b, t_g, v in up)[2]
            if lam not in taken:
                chosen = s
                break
        if chosen is None:
            raise CapacityExceeded(f"vertex {v}: {len(plus) + len(minus) + 1} reachable terms all blocked")
        picks = plus[:chosen] if chosen > 0 else minus[:-chosen]
        sign = step if chosen > 0 else -step
        for e, u in picks:
            bump(e, u, v, sign)
        l, a, lam, _ = where(v)
        register(v, Anchor(l, a, lam))
        for e, u in back:
            if u in result.anchors:
                stats.goal_one_checks += 1
                lu, au, lamu, _ = where(u)
                if Anchor(lu, au, lamu) != result.anchors[u]:
                    raise CapacityExceeded(f"vertex {u} left its anchor pair while processing {v}")

    stats = C2Stats()
    pair_of = {r: t for r, t in ordering.terminal_pairs}
    partners = set(pair_of.values())
    for v in ordering.order:
        if v in partners:
            continue
        T = period(v)
        step = T * k
        if v in pair_of:
            t = pair_of[v]
            e_rt = gp.edge(v, t)
            lr, ar, _, _ = where(v)
            lt, at, _, _ = where(t)
            occ_r, occ_t = occupancy(v, lr), occupancy(t, lt)
            y = min(range(T), key=lambda y: (max(occ_r[(ar + y) % T], occ_t[(at + y) % T]), y))
            bump(e_rt, v, t, y * k)
            fwd, back = active_edges(v, {e_rt})
            finish(v, [(e, u) for e, u in fwd], back, step)
            fwd_t, back_t = active_edges(t, {e_rt})
            if fwd_t:
                raise OrderingInvariantViolation(f"terminal vertex {t} has an active forward edge")
            finish(t, [], back_t, step)
            continue
        fwd, back = active_edges(v, set())
        if not fwd:
            raise OrderingInvariantViolation(f"vertex {v} has no active forward edge")
        l, a, _, _ = where(v)
        occ = occupancy(v, l)
        a_star = min(range(T), key=lambda c: (occ[c], c))
        x = (a_star - a) % T
        e0, u0 = fwd[0]
        bump(e0, u0, v, x * k)
        plus = ([(e0, u0)] if x == 0 else []) + fwd[1:]
        finish(v, plus, back, step)
    delta = f - start
    stats.max_edge_change = int(np.abs(delta).max()) if delta.size else 0
    return f, result, stats


@dataclass
class GoalReport:
    goal_i: bool
    goal_ii: bool
    goal_iii: bool
    goal_iv: bool
    residues: bool
    violations: list
    equal_good_pairs: int
    equal_good_pairs_outside_close: int

    @property
    def all_passed(self) -> bool:
        return self.goal_i and self.goal_ii and self.goal_iii and self.goal_iv and self.residues

    def as_dict(self) -> dict:
        return {"goal_i": self.goal_i, "goal_ii": self.goal_ii, "goal_iii": self.goal_iii,
                "goal_iv": self.goal_iv, "residues": self.residues, "all_passed": self.all_passed,
                "violations": self.violations[:20], "equal_good_pairs": self.equal_good_pairs,
                "equal_good_pairs_outside_close": self.equal_good_pairs_outside_close}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def check_goals(gp: GPrime, anchors: AnchorAssignment, weights, close: CloseSets,
                params: Parameters) -> GoalReport:
    """Audit anchors and residues; `weights` are final weighted degrees."""
    k, t_b, t_g = params.k, params.t_b, params.t_g
    viol = []
    ok = {"i": True, "ii": True, "iii": True, "iv": True, "res": True}
    for v in gp.vertices:
        w = int(weights[v])
        lo, hi = anchors.residue_class.get(v, gp.residue_class(v))
        if w % k not in (lo % k, hi % k):
            ok["res"] = False
            viol.append(f"residue: vertex {v} weighs {w} = {w % k} mod {k}")
        anc = anchors.anchors.get(v)
        if anc is None:
            ok["i"] = False
            viol.append(f"goal i: vertex {v} has no anchor")
            continue
        l, a, lam, _ = locate(w, k, t_b, t_g, v in gp.u_prime)
        if (l, a, lam) != anc.key():
            ok["i"] = False
            viol.append(f"goal i: vertex {v} weight {w} outside anchor {anc.key()}")
    for name, family in (("ii", gp.u_prime), ("iii", gp.u_b - gp.u_prime)):
        seen = {}
        for v in sorted(family):
            anc = anchors.anchors.get(v)
            if anc is None:
                continue
            if anc.key() in seen:
                ok[name] = False
                viol.append(f"goal {name}: vertices {seen[anc.key()]} and {v} share anchor {anc.key()}")
            else:
                seen[anc.key()] = v
    good = sorted(gp.u_g)
    by_key = {}
    for v in good:
        anc = anchors.anchors.get(v)
        if anc is not None:
            by_key.setdefault(anc.key(), []).append(v)
    for key, vs in by_key.items():
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                if close.contains(vs[i], vs[j]):
                    ok["iv"] = False
                    viol.append(f"goal iv: close vertices {vs[i]} and {vs[j]} share anchor {key}")
    by_w = {}
    for v in good:
        by_w.setdefault(int(weights[v]), []).append(v)
    eq = outside = 0
    for vs in by_w.values():
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                eq += 1
                if not close.contains(vs[i], vs[j]):
                    outside += 1
    return GoalReport(ok["i"], ok["ii"], ok["iii"], ok["iv"], ok["res"], viol, eq, outside)


@dataclass
class StepCResult:
    weights: np.ndarray
    gprime: GPrime
    ordering: VertexOrdering
    anchors: AnchorAssignment
    goals: GoalReport
    c1_max_change: int
    c2_max_change: int


def run_step_c(g: Graph, partition: PartitionState, params: Parameters, f, close: CloseSets) -> StepCResult:
    gp = build_gprime(g, partition, params)
    f = init_weights_c(gp, params, f)
    ordering = order_vertices(gp)
    f, d1 = residue_fix_c1(g, gp, ordering, params.k, f)
    f, anchors, stats = anchor_assign_c2(g, gp, ordering, close, params, f)
    goals = check_goals(gp, anchors, _weights(g, f), close, params)
    c1 = int(np.abs(d1).max()) if d1.size else 0
    return StepCResult(f, gp, ordering, anchors, goals, c1, stats.max_edge_change)
