"""Pipeline orchestration, the fallback solver and the experiment harness."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import step_a, step_b, step_c
from .errors import (InfiniteStrength, InvalidParameters, NoAssignmentFound, PreconditionError,
                     RecoverableFailure, ThresholdFailure)
from .graph import Graph, degree_stats, generate_min_degree_graph, generate_random_regular, has_finite_strength
from .params import OVERRIDDEN, PAPER, Parameters, cdiv, derive_params
from .weighting import EdgeWeighting, degrees_from_array, lower_bound, verify_irregular

PIPELINE, FALLBACK, EXACT = "pipeline", "fallback", "exact"


@dataclass
class SolveConfig:
    seed: int = 0
    max_retries: int = 5
    mode: str = PAPER
    overrides: Optional[dict] = None
    fallback_enabled: bool = True
    epsilon: float = 0.2
    alpha: float = 0.05
    iteration_cap: int = 200_000

    def __post_init__(self):
        if self.max_retries < 0:
            raise PreconditionError("max_retries must be >= 0")
        if self.mode not in (PAPER, OVERRIDDEN):
            raise PreconditionError(f"unknown mode {self.mode!r}")


@dataclass
class SolveReport:
    k_achieved: Optional[int]
    valid: bool
    lower_bound: object
    kkp_benchmark: int
    method: str
    retries_used: int
    threshold_report: Optional[dict]
    timings: dict
    seed: int
    ratio: Optional[float] = None
    paper_target: Optional[int] = None
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        if not timings:
            d.pop("timings")
        if isinstance(d["lower_bound"], float) and math.isinf(d["lower_bound"]):
            d["lower_bound"] = "inf"
        return d

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.as_dict(timings), sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def desk_overrides(n: int, delta: int) -> dict:
    """Constants that keep every stage exercised on graphs of a few thousand vertices.

    s* is an odd count near 70% of the bins so the close-set cap keeps one
    bin of slack over the expected size of S. k is the largest value whose
    auxiliary-graph degree requirement sits about 4.5 standard deviations
    below the expected S-degree. t_g keeps each anchor class small.
    """
    s_star = max(1, min(delta - 1, round(0.7 * delta)))
    if s_star % 2 == 0 and s_star + 1 < delta:
        s_star += 1
    k_prime = min(2, s_star)
    p = s_star / delta
    floor_deg = s_star - 4.5 * math.sqrt(delta * p * (1 - p))
    k = max(7, min(20, int(floor_deg) - 7))
    a_prime = cdiv(7 * n, delta * k)
    expected_s = s_star * n / delta
    t_g = 4 * max(1, math.ceil(expected_s / (0.8 * s_star)))
    return {"s_star": s_star, "k_prime": k_prime, "k": k, "a_prime": a_prime, "t_b": 1, "t_g": t_g}


@dataclass
class PipelineState:
    bins: object = None
    partition: object = None
    layout: object = None
    close: object = None
    thresholds: object = None
    step_b: object = None
    step_c: object = None


def pipeline_attempt(g: Graph, params: Parameters, seed: int, timings: dict,
                     state: Optional[PipelineState] = None) -> EdgeWeighting:
    """One randomized pass through Steps A, B and C."""
    st = state if state is not None else PipelineState()
    t0 = time.perf_counter()
    st.bins = step_a.assign_bins(g, params, seed)
    part = step_a.build_partition(g, st.bins, params)
    f1 = step_a.f1_array(g, part, st.bins, params)
    st.layout = step_a.expected_layout(g, part, params)
    part = step_a.detect_bad_sets(g, part, st.bins, f1, st.layout, params)
    st.partition = part
    st.close = step_c.compute_close_sets(g, part, params)
    counts = step_a.realized_interval_counts(g, part, st.bins, st.layout)
    st.thresholds = step_a.check_random_event_thresholds(part, st.layout, params, counts, st.close.sizes())
    timings["step_a"] = timings.get("step_a", 0.0) + (time.perf_counter() - t0) * 1000
    if not st.thresholds.passed:
        raise ThresholdFailure(f"threshold checks failed: {st.thresholds.failures()}")
    t0 = time.perf_counter()
    st.step_b = step_b.run_step_b(g, f1, part, st.bins, st.layout, params)
    timings["step_b"] = timings.get("step_b", 0.0) + (time.perf_counter() - t0) * 1000
    t0 = time.perf_counter()
    st.step_c = step_c.run_step_c(g, part, params, st.step_b.weights, st.close)
    timings["step_c"] = timings.get("step_c", 0.0) + (time.perf_counter() - t0) * 1000
    final = st.step_c.weights
    if final.size and final.min() < 1:
        raise RecoverableFailure(f"non-positive final weight {int(final.min())}")
    if not st.step_c.goals.all_passed:
        raise RecoverableFailure(f"goal audit failed: {st.step_c.goals.violations[:3]}")
    w = EdgeWeighting.from_array(g, final, k=int(final.max()) if final.size else 1)
    res = verify_irregular(g, w)
    if not res.valid:
        raise RecoverableFailure(f"final weighting not irregular: {res.reason}")
    return w


def _strip_isolated(g: Graph):
    deg = g._degrees
    keep = [v for v in range(g.n) if deg[v] > 0]
    if len(keep) == g.n:
        return g, None
    index = {v: i for i, v in enumerate(keep)}
    sub = Graph(len(keep), [(index[u], index[v]) for u, v in g.edges()])
    return sub, keep


def _lift(g: Graph, w: EdgeWeighting, keep) -> EdgeWeighting:
    if keep is None:
        return w
    return EdgeWeighting({(keep[u], keep[v]): x for (u, v), x in w.weights.items()}, w.k)


def resolve_params(n: int, delta: int, config: SolveConfig) -> Parameters:
    if config.mode == OVERRIDDEN:
        ov = config.overrides if config.overrides is not None else desk_overrides(n, delta)
        return derive_params(n, delta, config.epsilon, config.alpha, ov)
    return derive_params(n, delta, config.epsilon, config.alpha)


def pipeline_blockers(params: Parameters) -> list:
    out = []
    if params.k < 7:
        out.append(f"k={params.k} < 7 leaves no residues for the big set")
    if params.s_star >= params.delta:
        out.append(f"s*={params.s_star} is not below delta={params.delta}")
    if params.k_prime > params.s_star:
        out.append("k' exceeds s*")
    return out


def solve(g: Graph, config: SolveConfig = SolveConfig(), state: Optional[PipelineState] = None):
    """Irregular weighting of g via the pipeline, falling back to local repair."""
    if not has_finite_strength(g):
        raise InfiniteStrength("graph has an isolated edge or at least two isolated vertices")
    timings = {}
    lb = lower_bound(g)
    sub, keep = _strip_isolated(g)
    delta = sub.min_degree() if sub.n else 0
    kkp = 6 * cdiv(g.n, delta) if delta else 0
    diag = {"failures": []}
    report = SolveReport(None, False, lb, kkp, PIPELINE, 0, None, timings, config.seed, diagnostics=diag)
    if sub.m == 0:
        w = EdgeWeighting({}, 1)
        report.k_achieved, report.valid, report.method = 1, True, EXACT
        return w, report
    params = None
    try:
        params = resolve_params(sub.n, delta, config)
    except InvalidParameters as exc:
        diag["failures"].append(f"parameters: {exc}")
    blockers = [] if params is None else pipeline_blockers(params)
    if params is not None:
        diag["params"] = json.loads(params.to_json())
        diag["param_flags"] = params.diagnostics()
        if params.mode == PAPER:
            report.paper_target = params.n_over_delta + cdiv(7 * sub.n, delta * params.k)
    diag["pipeline_blockers"] = blockers
    weighting = None
    if params is not None and not blockers:
        for attempt in range(config.max_retries + 1):
            report.retries_used = attempt
            st = state if state is not None else PipelineState()
            try:
                weighting = pipeline_attempt(sub, params, config.seed + attempt, timings, st)
            except RecoverableFailure as exc:
                diag["failures"].append(f"attempt {attempt}: {type(exc).__name__}: {exc}")
                if st.thresholds is not None:
                    report.threshold_report = st.thresholds.as_dict()
                continue
            report.threshold_report = st.thresholds.as_dict()
            diag["goal_report"] = st.step_c.goals.as_dict()
            diag["step_b_max_edge_change"] = st.step_b.max_edge_change
            diag["step_b_max_shift"] = st.step_b.shift.max_value_shift
            diag["step_c_max_change"] = {"c1": st.step_c.c1_max_change, "c2": st.step_c.c2_max_change}
            diag["bad_vertices"] = len(st.partition.u_b)
            break
    if weighting is None:
        if not config.fallback_enabled:
            raise NoAssignmentFound("pipeline failed and fallback is disabled")
        t0 = time.perf_counter()
        k0 = lb if isinstance(lb, int) else 1
        weighting = baseline_solve(sub, k0, config.seed, config.iteration_cap)
        timings["fallback"] = (time.perf_counter() - t0) * 1000
        if weighting is None:
            raise NoAssignmentFound("fallback exhausted")
        report.method = FALLBACK
    weighting = _lift(sub, weighting, keep)
    k_used = weighting.max_weight()
    weighting = EdgeWeighting(weighting.weights, k_used)
    res = verify_irregular(g, weighting)
    report.k_achieved = k_used
    report.valid = res.valid
    report.ratio = k_used * delta / g.n if g.n else None
    if not res.valid:
        diag["failures"].append(f"final verification: {res.reason}")
    return weighting, report


def baseline_solve(g: Graph, k_start: int, seed, iteration_cap: int = 200_000) -> Optional[EdgeWeighting]:
    """Randomized repair of weighted-degree collisions, doubling k on failure."""
    if not has_finite_strength(g):
        raise InfiniteStrength("graph has an isolated edge or at least two isolated vertices")
    n, m = g.n, g.m
    if m == 0:
        return EdgeWeighting({}, 1)
    rng = np.random.default_rng(seed)
    edges = g.edges()
    inc = [[] for _ in range(n)]
    for i, (u, v) in enumerate(edges):
        inc[u].append(i)
        inc[v].append(i)
    k = max(1, int(k_start))
    while k <= n ** 3:
        w = rng.integers(1, k + 1, size=m).tolist()
        wd = [0] * n
        for i, (u, v) in enumerate(edges):
            wd[u] += w[i]
            wd[v] += w[i]
        count = {}
        for x in wd:
            count[x] = count.get(x, 0) + 1
        coll = sum(c * (c - 1) // 2 for c in count.values())
        members = {}
        for v, x in enumerate(wd):
            members.setdefault(x, set()).add(v)
        dup = [x for x, c in count.items() if c > 1]
        # pre-draw randomness in blocks for speed
        block = 4096
        buf = rng.random((block, 4)).tolist()
        bi = 0
        it = 0
        while coll and k > 1 and it < iteration_cap:
            it += 1
            if bi == block:
                buf = rng.random((block, 4)).tolist()
                bi = 0
            r0, r1, r2, r3 = buf[bi]
            bi += 1
            j = int(r0 * len(dup))
            x = dup[j]
            if count.get(x, 0) < 2:
                dup[j] = dup[-1]
                dup.pop()
                continue
            group = sorted(members[x])
            a = group[int(r1 * len(group))]
            e = inc[a][int(r2 * len(inc[a]))]
            old = w[e]
            new = 1 + int(r3 * (k - 1))
            if new >= old:
                new += 1
            u, v = edges[e]
            diff = new - old
            before = coll
            for z in (u, v):
                y = wd[z]
                count[y] -= 1
                coll -= count[y]
                members[y].discard(z)
                y2 = y + diff
                c2 = count.get(y2, 0)
                coll += c2
                count[y2] = c2 + 1
                members.setdefault(y2, set()).add(z)
                if c2 + 1 == 2:
                    dup.append(y2)
                wd[z] = y2
            if coll > before:
                for z in (u, v):
                    y2 = wd[z]
                    count[y2] -= 1
                    coll -= count[y2]
                    members[y2].discard(z)
                    y = y2 - diff
                    c = count[y]
                    coll += c
                    count[y] = c + 1
                    members[y].add(z)
                    if c + 1 == 2:
                        dup.append(y)
                    wd[z] = y
            else:
                w[e] = new
        if coll == 0:
            out = EdgeWeighting(dict(zip(edges, w)), k)
            if verify_irregular(g, out).valid:
                return out
        k *= 2
    return None


CSV_HEADER = ["n", "delta", "m", "method", "k_achieved", "lower_bound", "kkp_benchmark",
              "ratio", "retries", "ms", "seed", "valid"]


@dataclass
class ExperimentSpec:
    """Graph families crossed with seeds.

    Each family is a dict with "family" ("regular" or "min_degree"), "n",
    and "d" (regular) or "delta" and "density" (min_degree).
    """
    families: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [0])
    mode: str = OVERRIDDEN
    overrides: Optional[dict] = None
    max_retries: int = 5
    fallback_enabled: bool = True
    workers: int = 1


def make_graph(family: dict, seed: int) -> Graph:
    kind = family.get("family", "regular")
    if kind == "regular":
        return generate_random_regular(int(family["n"]), int(family["d"]), seed)
    if kind == "min_degree":
        return generate_min_degree_graph(int(family["n"]), int(family["delta"]),
                                         float(family.get("density", 0.01)), seed)
    raise PreconditionError(f"unknown graph family {kind!r}")


def _run_cell(args):
    family, seed, mode, overrides, retries, fallback = args
    g = make_graph(family, seed)
    t0 = time.perf_counter()
    cfg = SolveConfig(seed=seed, max_retries=retries, mode=mode, overrides=overrides, fallback_enabled=fallback)
    _, rep = solve(g, cfg)
    ms = (time.perf_counter() - t0) * 1000
    dmin = degree_stats(g)[0]
    return {"n": g.n, "delta": dmin, "m": g.m, "method": rep.method, "k_achieved": rep.k_achieved,
            "lower_bound": rep.lower_bound, "kkp_benchmark": rep.kkp_benchmark,
            "ratio": round(rep.ratio, 6) if rep.ratio is not None else "", "retries": rep.retries_used,
            "ms": round(ms, 1), "seed": seed, "valid": rep.valid}


def run_experiment(spec: ExperimentSpec) -> list:
    """One row per (family, seed) in spec order."""
    cells = [(fam, s, spec.mode, spec.overrides, spec.max_retries, spec.fallback_enabled)
             for fam in spec.families for s in spec.seeds]
    if spec.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            return list(ex.map(_run_cell, cells))
    return [_run_cell(c) for c in cells]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()
