"""Vertex, edge and random-walk sampling, and the sample in-degree counts.

Visibility rule: sampling a vertex reveals only its out-edges; sampling an
edge reveals that directed edge. Nothing in this module reads the graph's
in-adjacency index (verified in the test suite by running every scheme on
a graph whose in-index is withheld).

The three walks grow an undirected multigraph view of the directed graph
as they discover vertices. In their stationary regimes the walk samples
match uniform with-replacement draws: RWS1 samples vertices (matching
RVS-WR, via a Metropolis-Hastings correction), RWS2 and RWS3 sample
directed edges (matching RES-WR; RWS2 jumps land on edges, RWS3 jumps
land on vertices and collect nothing).

After a non-jump edge step the walk continues from the endpoint it
traversed to in the undirected view, which is what makes the edge chain
doubly stochastic and its stationary law uniform; continuing from the head
of the sampled directed edge instead would bias the chain toward
in-heavy edges (measurably so, see the stationarity tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError
from .graph import DegreeCounts, DirectedGraph

__all__ = [
    "Scheme",
    "SamplePlan",
    "SampleRecord",
    "sample",
    "sample_rvs",
    "sample_res",
    "sample_rws1",
    "sample_rws2",
    "sample_rws3",
    "record_from_vertices",
    "record_from_edges",
    "sample_in_degree_counts",
    "edge_budget_from_vertex_budget",
    "jump_weight_from_rate",
]


class Scheme(str, Enum):
    RVS = "rvs"
    RES = "res"
    RWS1 = "rws1"
    RWS2 = "rws2"
    RWS3 = "rws3"

    @property
    def samples_vertices(self) -> bool:
        return self in (Scheme.RVS, Scheme.RWS1)

    @property
    def is_walk(self) -> bool:
        return self in (Scheme.RWS1, Scheme.RWS2, Scheme.RWS3)


@dataclass(frozen=True)
class SamplePlan:
    """Budgets and scheme parameters for one sampling run.

    ``with_replacement`` applies to RVS/RES only; the walks sample with
    replacement by construction. ``jump_weight`` w >= 0 controls the walks'
    teleport rate (w = 0: no jumps).
    """

    scheme: Scheme
    vertex_budget: int | None = None
    edge_budget: int | None = None
    with_replacement: bool = True
    jump_weight: float = 0.0
    burn_in: int = 0
    seed: int = 0

    def validate(self, g: DirectedGraph) -> None:
        if self.scheme.samples_vertices:
            if self.vertex_budget is None or self.vertex_budget < 1:
                raise ConfigError(f"{self.scheme.value} requires a positive vertex_budget")
            if self.scheme is Scheme.RVS and not self.with_replacement and self.vertex_budget > g.vertex_count:
                raise ConfigError(
                    f"vertex_budget {self.vertex_budget} exceeds N_v={g.vertex_count} without replacement"
                )
        else:
            if self.edge_budget is None or self.edge_budget < 1:
                raise ConfigError(f"{self.scheme.value} requires a positive edge_budget")
            if self.scheme is Scheme.RES and not self.with_replacement and self.edge_budget > g.edge_count:
                raise ConfigError(
                    f"edge_budget {self.edge_budget} exceeds N_e={g.edge_count} without replacement"
                )
        if not np.isfinite(self.jump_weight) or self.jump_weight < 0:
            raise ConfigError("jump_weight must be finite and >= 0")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be >= 0")


@dataclass
class SampleRecord:
    """Everything the sampler retained, plus walk diagnostics.

    ``retained_edges`` is the multiset (with repetitions) of directed edges
    visible to the sampler: out-edges of sampled vertices for vertex
    schemes, the sampled edges themselves for edge schemes.
    """

    scheme: Scheme
    sampled_objects: np.ndarray  # (n,) vertex ids or (n, 2) directed edges
    retained_edges: np.ndarray  # (m, 2)
    effective_p: float
    jump_count: int = 0
    visit_histogram: np.ndarray | None = None

    @property
    def sample_size(self) -> int:
        return len(self.sampled_objects)


# ---------------------------------------------------------------------------
# record construction (shared by the samplers and by exhaustive-enumeration
# tests, which feed explicit object lists instead of random draws)

def record_from_vertices(g: DirectedGraph, vertices, scheme: Scheme = Scheme.RVS,
                         jump_count: int = 0, visit_histogram=None) -> SampleRecord:
    """Record for an explicit (possibly repeating) list of sampled vertices.

    Retains each sampled vertex's out-edges, with multiplicity equal to the
    vertex's multiplicity in the sample.
    """
    vertices = np.asarray(vertices, dtype=np.int64)
    out = g.out_adj
    chunks = [np.column_stack([np.full(len(out[v]), v, dtype=np.int64), out[v]])
              for v in vertices if len(out[v])]
    retained = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return SampleRecord(
        scheme=scheme,
        sampled_objects=vertices,
        retained_edges=retained,
        effective_p=len(vertices) / g.vertex_count,
        jump_count=jump_count,
        visit_histogram=visit_histogram,
    )


def record_from_edges(g: DirectedGraph, edges, scheme: Scheme = Scheme.RES,
                      jump_count: int = 0, visit_histogram=None) -> SampleRecord:
    """Record for an explicit (possibly repeating) list of directed edges."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return SampleRecord(
        scheme=scheme,
        sampled_objects=edges,
        retained_edges=edges.copy(),
        effective_p=len(edges) / g.edge_count,
        jump_count=jump_count,
        visit_histogram=visit_histogram,
    )


# ---------------------------------------------------------------------------
# uniform schemes

def sample_rvs(g: DirectedGraph, plan: SamplePlan) -> SampleRecord:
    """Uniform random vertex sampling, with or without replacement."""
    if plan.scheme is not Scheme.RVS:
        raise ConfigError("plan.scheme must be RVS")
    plan.validate(g)
    rng = np.random.default_rng(plan.seed)
    vertices = rng.choice(g.vertex_count, size=plan.vertex_budget,
                          replace=plan.with_replacement)
    return record_from_vertices(g, vertices, Scheme.RVS)


def sample_res(g: DirectedGraph, plan: SamplePlan) -> SampleRecord:
    """Uniform random edge sampling, with or without replacement."""
    if plan.scheme is not Scheme.RES:
        raise ConfigError("plan.scheme must be RES")
    plan.validate(g)
    rng = np.random.default_rng(plan.seed)
    idx = rng.choice(g.edge_count, size=plan.edge_budget, replace=plan.with_replacement)
    return record_from_edges(g, g.edge_array()[idx], Scheme.RES)


# ---------------------------------------------------------------------------
# random walks

class _GrowingView:
    """Undirected multigraph accumulated from out-edges of visited vertices.

    Parallel edges are stored explicitly; each incident entry keeps the
    original direction (tail, head) so edge walks can emit directed samples.
    """

    __slots__ = ("adj", "seen")

    def __init__(self, n_vertices: int):
        self.adj: list[list[tuple[int, int, int]]] = [[] for _ in range(n_vertices)]
        self.seen = np.zeros(n_vertices, dtype=bool)

    def ensure(self, g: DirectedGraph, v: int) -> None:
        """Add v's out-edges on first visit."""
        if self.seen[v]:
            return
        self.seen[v] = True
        adj = self.adj
        for u in g.out_adj[v]:
            u = int(u)
            adj[v].append((u, v, u))
            adj[u].append((v, v, u))

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def random_incident(self, v: int, rng) -> tuple[int, int, int]:
        """Uniform incident entry: (other endpoint, tail, head)."""
        entries = self.adj[v]
        return entries[rng.integers(len(entries))]


def _collector(plan: SamplePlan, budget: int):
    """Shared burn-in bookkeeping: returns (emit, out_list) where emit(x)
    discards the first plan.burn_in stream items and returns True while more
    samples are wanted."""
    out: list = []
    state = {"discard": plan.burn_in}

    def emit(x) -> bool:
        if state["discard"] > 0:
            state["discard"] -= 1
        else:
            out.append(x)
        return len(out) < budget

    return emit, out


def sample_rws1(g: DirectedGraph, plan: SamplePlan) -> SampleRecord:
    """Vertex walk with jumps and Metropolis-Hastings correction.

    Each step proposes a uniform neighbor in the growing view with
    probability deg(v)/(w+deg(v)) and a uniform jump otherwise; the proposal
    u is accepted with probability min(1, (w+deg(v))/(w+deg(u))), where an
    unseen u has degree 0. On rejection the current vertex is re-collected.
    """
    if plan.scheme is not Scheme.RWS1:
        raise ConfigError("plan.scheme must be RWS1")
    plan.validate(g)
    rng = np.random.default_rng(plan.seed)
    w = plan.jump_weight
    n_v = g.vertex_count
    view = _GrowingView(n_v)
    jumps = 0
    v = int(rng.integers(n_v))
    emit, out = _collector(plan, plan.vertex_budget)
    more = emit(v)
    while more:
        view.ensure(g, v)
        deg_v = view.degree(v)
        total = w + deg_v
        if total > 0 and rng.random() < deg_v / total:
            u = view.random_incident(v, rng)[0]
        else:
            # includes the w=0, isolated-in-view start, which can only jump
            u = int(rng.integers(n_v))
            jumps += 1
        denom = w + view.degree(u)
        if denom <= 0 or rng.random() < total / denom:
            v = u
        # else: repeat v as the next collected vertex
        more = emit(v)
    vertices = np.asarray(out, dtype=np.int64)
    hist = np.bincount(vertices, minlength=n_v)
    rec = record_from_vertices(g, vertices, Scheme.RWS1, jump_count=jumps, visit_histogram=hist)
    return rec


def sample_rws2(g: DirectedGraph, plan: SamplePlan) -> SampleRecord:
    """Edge walk whose jumps land on uniform directed edges.

    Per step the walk continues with probability 1/(1+w) along a uniform
    incident edge of the continuation vertex (collected with its original
    direction) and jumps to a uniform directed edge otherwise. After a jump
    the continuation vertex is a uniform endpoint of the jumped-to edge;
    after a walk step it is the endpoint just traversed to.
    """
    if plan.scheme is not Scheme.RWS2:
        raise ConfigError("plan.scheme must be RWS2")
    plan.validate(g)
    rng = np.random.default_rng(plan.seed)
    w = plan.jump_weight
    edges = g.edge_array()
    view = _GrowingView(g.vertex_count)
    jumps = 0
    e = edges[rng.integers(g.edge_count)]
    v1, v2 = int(e[0]), int(e[1])
    jumped = True
    cont = -1  # endpoint reached by the last walk step
    emit, out = _collector(plan, plan.edge_budget)
    more = emit((v1, v2))
    while more:
        view.ensure(g, v1)
        view.ensure(g, v2)
        if jumped:
            v = v1 if rng.random() < 0.5 else v2
            jumped = False
        else:
            v = cont
        if rng.random() < 1.0 / (1.0 + w):
            other, tail, head = view.random_incident(v, rng)
            v1, v2 = tail, head
            cont = other
        else:
            e = edges[rng.integers(g.edge_count)]
            v1, v2 = int(e[0]), int(e[1])
            jumped = True
            jumps += 1
        more = emit((v1, v2))
    return record_from_edges(g, np.asarray(out, dtype=np.int64), Scheme.RWS2,
                             jump_count=jumps,
                             visit_histogram=_edge_histogram(g, out))


def sample_rws3(g: DirectedGraph, plan: SamplePlan) -> SampleRecord:
    """Edge walk whose jumps land on uniform vertices and collect nothing.

    With probability deg(v)/(deg(v)+w) the walk traverses a uniform incident
    edge of the growing view, collecting its directed form; otherwise it
    teleports to a uniform vertex without collecting. Iterations and
    collected samples therefore advance separately; a guard aborts after
    10^4 * edge_budget iterations.
    """
    if plan.scheme is not Scheme.RWS3:
        raise ConfigError("plan.scheme must be RWS3")
    plan.validate(g)
    rng = np.random.default_rng(plan.seed)
    w = plan.jump_weight
    n_v = g.vertex_count
    view = _GrowingView(n_v)
    jumps = 0
    v = int(rng.integers(n_v))
    emit, out = _collector(plan, plan.edge_budget)
    more = True
    max_iters = 10_000 * plan.edge_budget
    iters = 0
    while more:
        iters += 1
        if iters > max_iters:
            raise ConfigError(
                f"rws3 did not collect {plan.edge_budget} edges within {max_iters} "
                f"iterations (jump weight {w} too large for this graph?)"
            )
        view.ensure(g, v)
        deg_v = view.degree(v)
        if deg_v > 0 and rng.random() < deg_v / (deg_v + w):
            other, tail, head = view.random_incident(v, rng)
            v = other
            more = emit((tail, head))
        else:
            # deg 0 only happens at an isolated-in-view start; jump regardless of w
            v = int(rng.integers(n_v))
            jumps += 1
    return record_from_edges(g, np.asarray(out, dtype=np.int64), Scheme.RWS3,
                             jump_count=jumps,
                             visit_histogram=_edge_histogram(g, out))


def _edge_histogram(g: DirectedGraph, sampled: list[tuple[int, int]]) -> np.ndarray:
    """Visit counts aligned with g.edge_array() row order."""
    index = {(int(u), int(v)): k for k, (u, v) in enumerate(g.edge_array())}
    hist = np.zeros(g.edge_count, dtype=np.int64)
    for e in sampled:
        hist[index[(int(e[0]), int(e[1]))]] += 1
    return hist


_SAMPLERS = {
    Scheme.RVS: sample_rvs,
    Scheme.RES: sample_res,
    Scheme.RWS1: sample_rws1,
    Scheme.RWS2: sample_rws2,
    Scheme.RWS3: sample_rws3,
}


def sample(g: DirectedGraph, plan: SamplePlan) -> SampleRecord:
    """Dispatch to the plan's scheme."""
    return _SAMPLERS[plan.scheme](g, plan)


# ---------------------------------------------------------------------------
# sample in-degree counts and budget helpers

def sample_in_degree_counts(g: DirectedGraph, rec: SampleRecord) -> DegreeCounts:
    """Counts of sample in-degrees over all N_v vertices.

    The sample in-degree of v is the number of retained edges (with
    multiplicity) pointing to v; vertices the sampler never saw count at 0.
    """
    if len(rec.retained_edges) and int(rec.retained_edges.max()) >= g.vertex_count:
        raise ValueError("record references vertex ids outside this graph")
    if len(rec.retained_edges) == 0:
        x = np.zeros(g.vertex_count, dtype=np.int64)
    else:
        x = np.bincount(rec.retained_edges[:, 1], minlength=g.vertex_count)
    return DegreeCounts(np.bincount(x))


def edge_budget_from_vertex_budget(n_v: int, g: DirectedGraph) -> int:
    """Edge budget giving roughly the same number of sampled edges as a
    vertex budget of n_v: round(n_v * N_e / N_v), clamped to [1, N_e].
    Rounding is half-to-even."""
    if n_v < 1:
        raise ConfigError("vertex budget must be positive")
    n_e = round(n_v * g.edge_count / g.vertex_count)
    return int(min(max(n_e, 1), g.edge_count))


def jump_weight_from_rate(g: DirectedGraph, scheme: Scheme, target_rate: float) -> float:
    """Jump weight w achieving a target per-step jump probability.

    RWS2 jumps with probability w/(1+w) exactly. RWS1/RWS3 jump with
    probability w/(deg+w) per step, approximated here at the full undirected
    view's mean degree 2 N_e / N_v.
    """
    if not 0.0 <= target_rate < 1.0:
        raise ConfigError("target_rate must lie in [0, 1)")
    if not scheme.is_walk:
        raise ConfigError(f"jump weight is meaningful only for walk schemes, not {scheme.value}")
    if target_rate == 0.0:
        return 0.0
    if scheme is Scheme.RWS2:
        return target_rate / (1.0 - target_rate)
    mean_degree = 2.0 * g.edge_count / g.vertex_count
    return target_rate * mean_degree / (1.0 - target_rate)
