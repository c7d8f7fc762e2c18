"""Synthetic directed graphs with power-law or exponential in-degree laws.

The power-law family is a directed Chung-Lu model: each vertex carries a
Pareto in-weight and out-weight, and edge (u, v) appears independently
with probability min(1, c * out_w(u) * in_w(v)) where c normalizes the
expected edge count. ``alpha_in`` is the tail index of the in-degree
survival function, so the per-degree counts decay like j^-(alpha_in + 1).

The exponential family draws geometric in-degrees and assigns edge
sources uniformly (a directed configuration pairing with rejection of
self-loops and duplicates).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .graph import DirectedGraph

__all__ = ["Family", "GeneratorConfig", "generate_power_law", "generate_exponential_in", "generate"]


class Family(str, Enum):
    POWER_LAW = "power_law"
    EXPONENTIAL_IN = "exponential_in"


@dataclass(frozen=True)
class GeneratorConfig:
    target_vertices: int
    expected_edges: int
    family: Family = Family.POWER_LAW
    in_tail_index: float = 1.5
    out_tail_index: float = 1.5
    seed: int = 0

    def validate(self) -> None:
        n, e = self.target_vertices, self.expected_edges
        if n < 2:
            raise ConfigError("target_vertices must be at least 2")
        if e < 1:
            raise ConfigError("expected_edges must be positive")
        if e > n * (n - 1):
            raise ConfigError(f"expected_edges={e} exceeds the simple-graph maximum {n * (n - 1)}")
        if self.family is Family.POWER_LAW and (self.in_tail_index <= 0 or self.out_tail_index <= 0):
            raise ConfigError("tail indices must be positive")


def _pareto(rng: np.random.Generator, n: int, alpha: float) -> np.ndarray:
    # inverse-CDF Pareto with x_min = 1: survival x^-alpha
    return (1.0 - rng.random(n)) ** (-1.0 / alpha)


def generate_power_law(cfg: GeneratorConfig) -> DirectedGraph:
    """Directed Chung-Lu graph with Pareto in-/out-weights.

    Runs in O(N_v + N_e) using geometric skipping over targets sorted by
    decreasing in-weight, so every (u, v) pair is an independent Bernoulli
    without enumerating all N_v^2 pairs.
    """
    cfg.validate()
    if cfg.family is not Family.POWER_LAW:
        raise ConfigError(f"generate_power_law called with family={cfg.family}")
    rng = np.random.default_rng(cfg.seed)
    n = cfg.target_vertices
    w_in = _pareto(rng, n, cfg.in_tail_index)
    w_out = _pareto(rng, n, cfg.out_tail_index)
    c = cfg.expected_edges / (w_in.sum() * w_out.sum())
    if c * np.median(w_out) * np.median(w_in) >= 1.0:
        raise ConfigError(
            "infeasible configuration: requested density saturates the "
            "Bernoulli probabilities for typical vertex pairs"
        )
    order = np.argsort(-w_in, kind="stable")
    w_in_sorted = w_in[order]
    src: list[int] = []
    dst: list[int] = []
    log = np.log
    for u in range(n):
        factor = c * w_out[u]
        v = 0
        p = min(1.0, factor * w_in_sorted[0])
        while v < n and p > 0.0:
            if p < 1.0:
                v += int(log(rng.random()) / np.log1p(-p))
            if v >= n:
                break
            q = min(1.0, factor * w_in_sorted[v])
            if rng.random() < q / p:
                t = int(order[v])
                if t != u:
                    src.append(u)
                    dst.append(t)
            p = q
            v += 1
    return _finalize(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))


def generate_exponential_in(cfg: GeneratorConfig) -> DirectedGraph:
    """Graph whose in-degree sequence is geometric with mean E/N.

    Edge sources are uniform; colliding draws (self-loop or duplicate) are
    re-drawn rather than erased, up to 100 * expected_edges attempts, so the
    drawn in-degree sequence is realized exactly whenever feasible.
    """
    cfg.validate()
    if cfg.family is not Family.EXPONENTIAL_IN:
        raise ConfigError(f"generate_exponential_in called with family={cfg.family}")
    rng = np.random.default_rng(cfg.seed)
    n = cfg.target_vertices
    mean = cfg.expected_edges / n
    if mean >= n - 1:
        raise ConfigError("infeasible mean in-degree for a simple graph")
    # geometric on {0,1,2,...} with mean m has success prob 1/(1+m)
    indeg = rng.geometric(1.0 / (1.0 + mean), size=n) - 1
    indeg = np.minimum(indeg, n - 1)
    src: list[int] = []
    dst: list[int] = []
    seen: set[tuple[int, int]] = set()
    attempts_left = 100 * cfg.expected_edges
    for v in range(n):
        for _ in range(int(indeg[v])):
            while attempts_left > 0:
                attempts_left -= 1
                u = int(rng.integers(n))
                if u != v and (u, v) not in seen:
                    seen.add((u, v))
                    src.append(u)
                    dst.append(v)
                    break
            else:
                break
    return _finalize(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))


def generate(cfg: GeneratorConfig) -> DirectedGraph:
    """Dispatch on the configured family."""
    if cfg.family is Family.POWER_LAW:
        return generate_power_law(cfg)
    return generate_exponential_in(cfg)


def _finalize(n: int, src: np.ndarray, dst: np.ndarray) -> DirectedGraph:
    """Drop vertices with no incident edge and relabel densely."""
    if len(src) == 0:
        raise ConfigError("generation produced an empty graph")
    touched = np.zeros(n, dtype=bool)
    touched[src] = True
    touched[dst] = True
    keep = np.flatnonzero(touched)
    remap = -np.ones(n, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    return DirectedGraph.from_edges(
        len(keep),
        np.column_stack([remap[src], remap[dst]]),
        original_ids=keep,
    )
