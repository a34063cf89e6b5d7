"""Moving B-vertex weights onto distinct values avoiding residues 0..5 mod k."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapacityExceeded, InvalidParameters
from .graph import Graph
from .params import Parameters
from .step_a import BinAssignment, ExpectedLayout, PartitionState
from .weighting import degrees_from_array


class ZPrimeCodec:
    """Integers whose residue mod k is at least 6, ranked in natural order.

    rank(6) = 0 and rank/unrank extend to negative values as well.
    """

    def __init__(self, k: int):
        if k < 7:
            raise InvalidParameters(f"k={k} leaves no admissible residues (need k >= 7)")
        self.k = k
        self.per = k - 6

    def member(self, x: int) -> bool:
        return x % self.k >= 6

    def rank(self, x: int) -> int:
        q, r = divmod(x, self.k)
        if r < 6:
            raise ValueError(f"{x} is not admissible mod {self.k}")
        return q * self.per + (r - 6)

    def unrank(self, j: int) -> int:
        q, r = divmod(j, self.per)
        return q * self.k + 6 + r

    def next_member(self, x: int) -> int:
        q, r = divmod(x, self.k)
        return x if r >= 6 else q * self.k + 6

    def count(self, a: int, b: int) -> int:
        """Admissible integers in [a, b)."""
        if b <= a:
            return 0
        return self.rank(self.next_member(b)) - self.rank(self.next_member(a))


def shift_intervals(intervals):
    """Push intervals right, left to right, until they are pairwise disjoint.

    Input is a sequence of (a, b) half-open integer intervals sorted by a.
    Lengths and order are kept and the first interval never moves.
    """
    out = []
    prev_end = None
    for a, b in intervals:
        start = a if prev_end is None else max(a, prev_end)
        out.append((start, start + (b - a)))
        prev_end = start + (b - a)
    return out


def shift_bound(intervals, strict: bool = False) -> int:
    """Largest sum of (len_i - gap_i) over runs l1..l2 with l2 <= p-1.

    gap_i = a_{i+1} - a_i and the result is floored at 0. With strict=True
    single-term runs (l1 == l2) are excluded.
    """
    terms = [(b - a) - (a2 - a) for (a, b), (a2, _) in zip(intervals, intervals[1:])]
    best = 0
    for l1 in range(len(terms)):
        acc = 0
        for l2 in range(l1, len(terms)):
            acc += terms[l2]
            if strict and l2 == l1:
                continue
            best = max(best, acc)
    return best


def round_half_even(x: Fraction) -> int:
    return round(x)


def split_evenly(total: int, count: int) -> list:
    """Split total into count integers differing by at most one; larger first."""
    q, r = divmod(total, count)
    return [q + 1] * r + [q] * (count - r)


def step_one_cap(params: Parameters) -> float:
    return 2 * params.big_weight * params.delta ** (0.5 + params.alpha) / params.s_star + 1


def _s_edge_ids(g: Graph, in_s, edge_id, v):
    return [edge_id[(min(v, u), max(v, u))] for u in g.adj[v] if in_s[u]]


def edge_index(g: Graph) -> dict:
    return {e: i for i, e in enumerate(g.edges())}


def correction_targets(partition: PartitionState) -> list:
    bad = partition.y_b | partition.y_s
    return [int(v) for v in partition.B if int(v) not in bad]


def correct_toward_expectation(g: Graph, f1, partition: PartitionState, bins: BinAssignment,
                               layout: ExpectedLayout, params: Parameters) -> np.ndarray:
    """Per-edge deltas bringing each good B vertex to its rounded expectation."""
    f1 = np.asarray(f1, dtype=np.int64)
    wd = degrees_from_array(g, f1)
    eid = edge_index(g)
    delta = np.zeros(g.m, dtype=np.int64)
    cap = step_one_cap(params)
    for v in correction_targets(partition):
        target = round_half_even(layout.sigma_mu(v, int(bins.bins[v])))
        need = target - int(wd[v])
        if need == 0:
            continue
        ids = _s_edge_ids(g, partition.in_s, eid, v)
        if not ids:
            raise CapacityExceeded(f"vertex {v} has no edge into S")
        for i, x in zip(ids, split_evenly(need, len(ids))):
            if abs(x) > cap:
                raise CapacityExceeded(f"edge change {x} exceeds cap {cap:.1f} at vertex {v}")
            delta[i] += x
    return delta


def interval_start(h: int, width: int, codec: ZPrimeCodec) -> int:
    """Smallest admissible integer in I_h; I_0 excludes 0."""
    return codec.next_member(max(h * width, 1))


def pack_within_interval(members, h: int, width: int, codec: ZPrimeCodec) -> dict:
    """Assign consecutive admissible values from the start of I_h.

    `members` is an iterable of (vertex, current weight); order is by
    (weight, vertex).
    """
    ordered = sorted(members, key=lambda t: (t[1], t[0]))
    r0 = codec.rank(interval_start(h, width, codec))
    return {v: codec.unrank(r0 + j) for j, (v, _) in enumerate(ordered)}


@dataclass
class ShiftRecord:
    max_rank_shift: int = 0
    max_value_shift: int = 0
    blocks: list = field(default_factory=list)


def resolve_global_overlaps(blocks, codec: ZPrimeCodec):
    """Make per-interval blocks pairwise disjoint in rank space.

    `blocks` is a list of (h, {vertex: target}) with consecutive targets,
    sorted by h. Returns (targets, ShiftRecord).
    """
    spans = []
    keep = []
    for h, tgt in blocks:
        if not tgt:
            continue
        ranks = sorted((codec.rank(x), v) for v, x in tgt.items())
        spans.append((ranks[0][0], ranks[0][0] + len(ranks)))
        keep.append((h, ranks))
    moved = shift_intervals(spans)
    out = {}
    rec = ShiftRecord()
    for (h, ranks), (a, _), (a2, b2) in zip(keep, spans, moved):
        rec.max_rank_shift = max(rec.max_rank_shift, a2 - a)
        for j, (r, v) in enumerate(ranks):
            out[v] = codec.unrank(a2 + j)
            rec.max_value_shift = max(rec.max_value_shift, out[v] - codec.unrank(r))
        rec.blocks.append((h, a, a2, b2 - a2))
    return out, rec


def realize_targets(g: Graph, partition: PartitionState, targets: dict, f_current) -> np.ndarray:
    """Spread each vertex's remaining gap evenly over its edges into S."""
    f = np.array(f_current, dtype=np.int64)
    wd = degrees_from_array(g, f)
    eid = edge_index(g)
    for v in sorted(targets):
        need = targets[v] - int(wd[v])
        ids = _s_edge_ids(g, partition.in_s, eid, v)
        if not ids:
            raise CapacityExceeded(f"vertex {v} has no edge into S")
        if need:
            for i, x in zip(ids, split_evenly(need, len(ids))):
                f[i] += x
        for i in ids:
            if f[i] < 1:
                raise CapacityExceeded(f"cross edge {g.edges()[i]} dropped to {f[i]}")
    return f


@dataclass
class StepBResult:
    weights: np.ndarray
    targets: dict
    shift: ShiftRecord
    max_edge_change: int
    window_ok: bool


def run_step_b(g: Graph, f1, partition: PartitionState, bins: BinAssignment,
               layout: ExpectedLayout, params: Parameters) -> StepBResult:
    codec = ZPrimeCodec(params.k)
    f1 = np.asarray(f1, dtype=np.int64)
    f = f1 + correct_toward_expectation(g, f1, partition, bins, layout, params)
    wd = degrees_from_array(g, f)
    by_h = {}
    for v in correction_targets(partition):
        h = layout.interval_of(v, int(bins.bins[v]))
        by_h.setdefault(h, []).append((v, int(wd[v])))
    blocks = [(h, pack_within_interval(by_h[h], h, layout.width, codec)) for h in sorted(by_h)]
    targets, rec = resolve_global_overlaps(blocks, codec)
    f = realize_targets(g, partition, targets, f)
    change = np.abs(f - f1)
    max_change = int(change.max()) if change.size else 0
    slack = 11 * params.n / params.delta ** (1 + params.epsilon) + 2
    return StepBResult(f, targets, rec, max_change, bool(max_change <= slack))
