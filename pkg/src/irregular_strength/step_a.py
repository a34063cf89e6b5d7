"""Random binning, the initial weighting and the expected-weight layout."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import InvalidParameters, PartitionDegenerate
from .graph import Graph
from .params import PAPER, Parameters, cdiv
from .weighting import EdgeWeighting, degrees_from_array


@dataclass
class BinAssignment:
    x: np.ndarray
    bins: np.ndarray


def bin_of(x: float, delta: int) -> int:
    """Bin index in [1, delta] of a sample x in [0, 1]."""
    i = math.floor(Fraction(x) * delta) + 1
    return min(max(i, 1), delta)


def assign_bins(g: Graph, params: Parameters, seed) -> BinAssignment:
    rng = np.random.default_rng(seed)
    x = rng.random(g.n)
    bins = np.array([bin_of(float(t), params.delta) for t in x], dtype=np.int64)
    return BinAssignment(x, bins)


@dataclass
class PartitionState:
    in_s: np.ndarray                 # bool mask of the small set S
    subset: np.ndarray               # q in 1..k' for S vertices, 0 for B
    subset_bins: list                # per q, the (first, last) bin of S_q
    y_b: frozenset = frozenset()
    y_s: frozenset = frozenset()
    y_sn: frozenset = frozenset()
    y_sq: dict = field(default_factory=dict)
    deg_s: Optional[np.ndarray] = None

    @property
    def S(self):
        return np.flatnonzero(self.in_s)

    @property
    def B(self):
        return np.flatnonzero(~self.in_s)

    @property
    def u_b(self) -> frozenset:
        out = set(self.y_b) | set(self.y_s) | set(self.y_sn)
        for s in self.y_sq.values():
            out |= s
        return frozenset(out)

    @property
    def u_g(self) -> frozenset:
        ub = self.u_b
        return frozenset(int(v) for v in self.S if int(v) not in ub)

    def summary(self) -> dict:
        return {
            "S": int(self.in_s.sum()),
            "B": int((~self.in_s).sum()),
            "subset_bins": [list(t) for t in self.subset_bins],
            "subset_sizes": [int((self.subset == q).sum()) for q in range(1, len(self.subset_bins) + 1)],
            "y_b": sorted(self.y_b), "y_s": sorted(self.y_s), "y_sn": sorted(self.y_sn),
            "y_sq": {str(q): sorted(s) for q, s in sorted(self.y_sq.items())},
            "u_b": len(self.u_b), "u_g": len(self.u_g),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def subset_block_sizes(s_star: int, k_prime: int) -> list:
    """Bins per subset; the s* mod k' larger blocks go last."""
    if k_prime < 1 or k_prime > s_star:
        raise InvalidParameters(f"need 1 <= k'={k_prime} <= s*={s_star}")
    base, r = divmod(s_star, k_prime)
    return [base] * (k_prime - r) + [base + 1] * r


def build_partition(g: Graph, bins: BinAssignment, params: Parameters) -> PartitionState:
    d, s = params.delta, params.s_star
    if s >= d:
        raise InvalidParameters(f"s*={s} must be below delta={d}")
    sizes = subset_block_sizes(s, params.k_prime)
    q_of_bin = np.zeros(d + 1, dtype=np.int64)
    ranges = []
    start = d - s + 1
    for q, size in enumerate(sizes, start=1):
        q_of_bin[start:start + size] = q
        ranges.append((start, start + size - 1))
        start += size
    subset = q_of_bin[bins.bins]
    in_s = subset > 0
    return PartitionState(in_s=in_s, subset=subset, subset_bins=ranges)


def rule_one_applies(i: int, j: int, params: Parameters) -> bool:
    """Whether a B-B edge between bins i and j carries the large weight.

    The window test i + j > delta - s* + 1 is symmetric in (i, j), so both
    endpoints always agree.
    """
    return i + j > params.delta - params.s_star + 1


def f1_array(g: Graph, partition: PartitionState, bins: BinAssignment, params: Parameters) -> np.ndarray:
    e = np.asarray(g.edges(), dtype=np.int64).reshape(-1, 2)
    u, v = e[:, 0], e[:, 1]
    qu, qv = partition.subset[u], partition.subset[v]
    bu, bv = bins.bins[u], bins.bins[v]
    out = np.ones(len(e), dtype=np.int64)
    big = (qu == 0) & (qv == 0) & (bu + bv > params.delta - params.s_star + 1)
    out[big] = params.big_weight
    base = params.cross_base()
    cross_u = (qu == 0) & (qv > 0)
    cross_v = (qu > 0) & (qv == 0)
    out[cross_u] = base * (qv[cross_u] + params.k_prime)
    out[cross_v] = base * (qu[cross_v] + params.k_prime)
    out[(qu > 0) & (qv > 0)] = 0
    return out


def initial_weighting_f1(g, partition, bins, params) -> EdgeWeighting:
    return EdgeWeighting.from_array(g, f1_array(g, partition, bins, params))


@dataclass
class ExpectedLayout:
    """Expected weights per (vertex, bin) and their interval statistics.

    sigma_mu(v, i) = deg(v) * (offset + (i - 1) * width) / delta exactly,
    where offset already contains the bin-independent S contribution.
    mu_h is stored as mu_count[h] / delta.
    """
    delta: int
    width: int
    offset: int
    s_part: int
    degrees: np.ndarray
    num_b_bins: int
    mu_count: np.ndarray
    benchmarks: list

    def sigma_mu(self, v: int, i: int) -> Fraction:
        if i > self.num_b_bins:
            return Fraction(0)
        return Fraction(int(self.degrees[v]) * (self.offset + (i - 1) * self.width), self.delta)

    def w_e_s(self, v: int) -> Fraction:
        return Fraction(int(self.degrees[v]) * self.s_part, self.delta)

    def interval_of(self, v: int, i: int) -> int:
        """h with sigma_mu(v, i) in I_h, or -1 when it lies in no interval."""
        if i > self.num_b_bins or self.degrees[v] == 0:
            return -1
        return int(self.degrees[v]) * (self.offset + (i - 1) * self.width) // (self.delta * self.width)

    def mu(self, h: int) -> Fraction:
        return Fraction(int(self.mu_count[h]), self.delta)

    def mu_range(self, h1: int, h2: int) -> Fraction:
        return Fraction(int(self.mu_count[h1:h2].sum()), self.delta)

    def groups(self):
        b = self.benchmarks
        return list(zip(b[:-1], b[1:]))


def expected_layout(g: Graph, partition: PartitionState, params: Parameters) -> ExpectedLayout:
    d = params.delta
    width = params.width
    sizes = [hi - lo + 1 for lo, hi in partition.subset_bins]
    s_part = sum(size * params.cross_weight(q) for q, size in enumerate(sizes, start=1))
    offset = d - params.s_star + s_part
    nb = d - params.s_star
    deg = g.degrees
    n = g.n
    mu_count = np.zeros(2 * n, dtype=np.int64)
    i = np.arange(nb, dtype=np.int64)
    pos = deg > 0
    hs = (deg[pos, None] * (offset + i[None, :] * width)) // (d * width)
    hs = hs.ravel()
    if hs.size and hs.max() >= 2 * n:
        raise InvalidParameters("expected weight exceeds the interval range")
    np.add.at(mu_count, hs, 1)
    benchmarks = greedy_benchmarks(mu_count, n)
    return ExpectedLayout(d, width, offset, s_part, deg, nb, mu_count, benchmarks)


def greedy_benchmarks(mu_count, n: int) -> list:
    """Close a group as soon as its mass exceeds n/(2 delta).

    mu_count holds delta * mu_h, so the test is 2 * count > n. A light tail
    is merged into the last group; the result ends at the last occupied h.
    """
    occupied = np.flatnonzero(mu_count)
    if occupied.size == 0:
        return [0]
    end = int(occupied[-1]) + 1
    marks = [0]
    acc = 0
    for h in range(end):
        acc += int(mu_count[h])
        if 2 * acc > n:
            marks.append(h + 1)
            acc = 0
    if marks[-1] != end:
        if len(marks) > 1:
            marks[-1] = end
        else:
            marks.append(end)
    return marks


def realized_sigma(g: Graph, f1) -> np.ndarray:
    arr = f1.as_array(g) if isinstance(f1, EdgeWeighting) else np.asarray(f1)
    return degrees_from_array(g, arr)


def detect_bad_sets(g: Graph, partition: PartitionState, bins: BinAssignment, f1,
                    layout: ExpectedLayout, params: Parameters) -> PartitionState:
    d = params.delta
    deg = g.degrees
    sigma = realized_sigma(g, f1)
    in_s = partition.in_s
    deg_s = np.array([sum(1 for u in g.adj[v] if in_s[u]) for v in range(g.n)], dtype=np.int64)
    y_b = set()
    for v in np.flatnonzero(~in_s):
        dv = int(deg[v])
        if dv == 0:
            continue
        i = int(bins.bins[v])
        dev = abs(d * int(sigma[v]) - dv * (layout.offset + (i - 1) * layout.width))
        if dev > d * dv ** (0.5 + params.alpha) * layout.width:
            y_b.add(int(v))
    y_s = {int(v) for v in range(g.n) if deg[v] > 0 and 2 * d * deg_s[v] < params.s_star * deg[v]}
    need = cdiv(params.s_star, 2)
    y_sn = set()
    for v in sorted(y_s):
        chosen = [u for u in g.adj[v] if not in_s[u]][:need]
        if len(chosen) < need:
            raise PartitionDegenerate(f"vertex {v} has fewer than {need} neighbours in B")
        y_sn.update(chosen)
    y_sq = {}
    for q in range(1, params.k_prime + 1):
        bad = set()
        for v in np.flatnonzero(partition.subset == q):
            dv = int(deg[v])
            dev = abs(d * (dv - int(deg_s[v])) - dv * (d - params.s_star))
            if dev > d * dv ** (0.5 + params.epsilon):
                bad.add(int(v))
        y_sq[q] = frozenset(bad)
    return PartitionState(in_s=in_s, subset=partition.subset, subset_bins=partition.subset_bins,
                          y_b=frozenset(y_b), y_s=frozenset(y_s), y_sn=frozenset(y_sn),
                          y_sq=y_sq, deg_s=deg_s)


def realized_interval_counts(g: Graph, partition: PartitionState, bins: BinAssignment,
                             layout: ExpectedLayout) -> np.ndarray:
    """|V_h| per h: B vertices outside Y_b whose expected weight lies in I_h."""
    counts = np.zeros(layout.mu_count.size, dtype=np.int64)
    for v in np.flatnonzero(~partition.in_s):
        if int(v) in partition.y_b:
            continue
        h = layout.interval_of(int(v), int(bins.bins[v]))
        if h >= 0:
            counts[h] += 1
    return counts


@dataclass
class ThresholdReport:
    checks: list
    anomalies: list

    @property
    def passed(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def failures(self) -> list:
        return [c["name"] for c in self.checks if not c["ok"]]

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": self.checks, "anomalies": self.anomalies}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def check_random_event_thresholds(partition: PartitionState, layout: ExpectedLayout, params: Parameters,
                                  v_counts=None, close_sizes=None) -> ThresholdReport:
    """Compare the sampled state against the probabilistic thresholds.

    `v_counts` are realized |V_h| values and `close_sizes` maps v -> |L(v)|;
    the corresponding checks are skipped when they are not supplied.
    """
    n, d = params.n, params.delta
    eps, alpha = params.epsilon, params.alpha
    checks = []
    ub = len(partition.u_b)
    lim = 3 * n * math.exp(-d ** (2 * alpha) / 4)
    checks.append({"name": "u_b_size", "measured": ub, "threshold": lim, "ok": ub < lim})
    s_size = int(partition.in_s.sum())
    centre = params.s_star * n / d
    slack = n / d ** (0.5 - eps)
    checks.append({"name": "s_size", "measured": s_size, "threshold": [centre - slack, centre + slack],
                   "ok": centre - slack <= s_size <= centre + slack})
    if v_counts is not None:
        marks = layout.benchmarks
        vpre = np.concatenate([[0], np.cumsum(v_counts)])
        mpre = np.concatenate([[0], np.cumsum(layout.mu_count)])
        worst = math.inf
        where = None
        scale = n / d ** (1 - 2 * alpha)
        for a in range(len(marks)):
            for b in range(a + 1, len(marks)):
                mu = (mpre[marks[b]] - mpre[marks[a]]) / d
                cnt = vpre[marks[b]] - vpre[marks[a]]
                room = mu + math.sqrt(scale * mu) - cnt
                if room < worst:
                    worst, where = room, (marks[a], marks[b])
        checks.append({"name": "benchmark_pairs", "measured": None if where is None else list(where),
                       "threshold": float(worst), "ok": bool(worst >= 0)})
    if close_sizes is not None and len(close_sizes):
        cap = 2 * cdiv(params.s_star, params.k_prime) * n / d
        big = int(max(close_sizes.values()))
        checks.append({"name": "close_set_size", "measured": big, "threshold": cap, "ok": big <= cap})
    anomalies = []
    if d > math.sqrt(n) and ub > 0:
        anomalies.append("delta > sqrt(n) but the bad set is non-empty")
    if params.mode != PAPER:
        anomalies.append("overridden parameters: thresholds evaluated with user constants")
    return ThresholdReport(checks, anomalies)
