"""Reference computations that share no code with the simulation kernels."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .distributions import DegreeDistribution
from .graph import HalfEdgeGraph

MAX_ENUM_EDGES = 24
BP_MAX_GENERATIONS = 200
BP_MAX_POPULATION = 10_000


def _retained_mask(graph: HalfEdgeGraph, retain, rng_seed) -> np.ndarray:
    pairs = graph.edge_array(live_only=False)
    if np.isscalar(retain):
        p = float(retain)
        if not 0 <= p <= 1:
            raise ValueError("retention probability must lie in [0, 1]")
        keep = np.random.default_rng(rng_seed).random(pairs.shape[0]) < p
    else:
        keep = np.asarray(retain, dtype=bool)
        if keep.shape != (pairs.shape[0],):
            raise ValueError("retain mask must have one entry per edge")
    return keep & graph.alive


def percolate_component(graph: HalfEdgeGraph, retain, seed_vertex: int, rng_seed=None,
                        method: str = "explore") -> set:
    """Component of ``seed_vertex`` after keeping the edges selected by ``retain``.

    ``retain`` is a per-edge boolean mask or a retention probability.
    ``method`` is ``"explore"`` (active/unexplored/removed sets) or ``"union_find"``.
    """
    if not 0 <= seed_vertex < graph.n:
        raise ValueError("seed vertex out of range")
    keep = _retained_mask(graph, retain, rng_seed)
    pairs = graph.edge_array(live_only=False)[keep]
    if method == "union_find":
        ds = DisjointSet(range(graph.n))
        for u, v in pairs:
            ds.merge(int(u), int(v))
        return set(ds.subset(seed_vertex))
    if method != "explore":
        raise ValueError("method must be 'explore' or 'union_find'")
    nbrs = [[] for _ in range(graph.n)]
    for u, v in pairs:
        nbrs[u].append(int(v))
        nbrs[v].append(int(u))
    # active vertices wait to be explored; removed ones are done
    removed = set()
    active = deque([seed_vertex])
    seen = {seed_vertex}
    while active:
        v = active.popleft()
        for w in nbrs[v]:
            if w not in seen:
                seen.add(w)
                active.append(w)
        removed.add(v)
    return removed


def exact_delsi_distribution(graph: HalfEdgeGraph, p: float, seed_vertex: int) -> dict[int, float]:
    """Exact law of the seed's component size under bond percolation with parameter p."""
    pairs = graph.edge_array()
    m = pairs.shape[0]
    if m > MAX_ENUM_EDGES:
        raise ValueError(f"{m} edges exceeds the enumeration limit of {MAX_ENUM_EDGES}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    out: dict[int, float] = {}
    for mask in range(1 << m):
        kept = [i for i in range(m) if mask >> i & 1]
        weight = p ** len(kept) * (1 - p) ** (m - len(kept))
        if weight == 0:
            continue
        size = _component_size(graph.n, pairs[kept], seed_vertex)
        out[size] = out.get(size, 0.0) + weight
    return dict(sorted(out.items()))


def _component_size(n, pairs, seed):
    # tiny graphs: repeated relaxation is plenty
    comp = {seed}
    grown = True
    while grown:
        grown = False
        for u, v in pairs:
            if (u in comp) != (v in comp):
                comp.update((int(u), int(v)))
                grown = True
    return len(comp)


@dataclass
class Walk:
    path: np.ndarray  # walk values W_0, W_1, ... up to absorption or the step limit
    absorbed: bool


def exploration_walk(dist: DegreeDistribution, mode: str = "graph", steps: int = 1000,
                     rng_seed=None, tau: float = 1.0) -> Walk:
    """Random walk that explores a (possibly percolated) tree-like neighbourhood.

    First increment: D (or Binomial(D, tau)); later increments: offspring of a
    size-biased vertex minus one, i.e. (D* - 1) - 1 or Binomial(D* - 1, tau) - 1.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if mode == "graph":
        tau = 1.0
    elif mode != "percolated":
        raise ValueError("mode must be 'graph' or 'percolated'")
    rng = np.random.default_rng(rng_seed)
    sb = dist.size_biased()
    path = [0]
    first = rng.choice(dist.pmf.size, p=dist.pmf)
    w = int(rng.binomial(first, tau)) if tau < 1 else int(first)
    path.append(w)
    for _ in range(steps - 1):
        if w == 0:
            break
        k = rng.choice(sb.size, p=sb) - 1
        off = int(rng.binomial(k, tau)) if tau < 1 else int(k)
        w += off - 1
        path.append(w)
    return Walk(np.array(path, dtype=np.int64), w == 0)


@dataclass
class MCEstimate:
    estimate: float
    stderr: float
    trials: int


def bp_survival_mc(dist: DegreeDistribution, lam: float, rho: float, trials: int,
                   max_generations: int = BP_MAX_GENERATIONS, rng_seed=None,
                   max_population: int = BP_MAX_POPULATION) -> MCEstimate:
    """Survival frequency of the two-phase branching process, all trials at once."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    tau = lam / (lam + rho) if lam > 0 else 0.0
    pop = rng.binomial(rng.choice(dist.pmf.size, size=trials, p=dist.pmf), tau)
    sb = dist.size_biased()
    offspring_vals = np.arange(sb.size) - 1  # D* - 1
    alive = pop > 0
    survived = np.zeros(trials, dtype=bool)
    for _ in range(max_generations):
        big = alive & (pop > max_population)
        survived |= big
        alive &= ~big
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        # a sum of pop[i] thinned size-biased offspring is Binomial(sum of (D* - 1), tau)
        counts = rng.multinomial(pop[idx], sb)
        k = counts @ np.maximum(offspring_vals, 0)
        new = rng.binomial(k, tau)
        pop[idx] = new
        alive[idx] = new > 0
    survived |= alive
    q = survived.mean()
    return MCEstimate(float(q), math.sqrt(q * (1 - q) / trials), trials)


@dataclass
class WalkBatch:
    absorbed: np.ndarray  # walk hit 0 within the step limit
    hit_time: np.ndarray  # steps after W_0 until absorption (-1 if never)


def exploration_walks(dist: DegreeDistribution, runs: int, steps: int = 1000, tau: float = 1.0,
                      rng_seed=None, ceiling: int = 200) -> WalkBatch:
    """Many independent S-walks (W-walks when tau = 1), advanced in lockstep.

    Walks above ``ceiling`` are frozen as survivors; like the population cap
    of the branching process, the chance of returning to 0 from there is
    negligible whenever the walk has positive drift.
    """
    if steps < 1 or runs < 1:
        raise ValueError("steps and runs must be >= 1")
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(dist.size_biased())
    w = rng.binomial(rng.choice(dist.pmf.size, size=runs, p=dist.pmf), tau)
    hit = np.where(w == 0, 0, -1)
    frozen = np.zeros(runs, dtype=bool)
    for t in range(1, steps + 1):
        frozen |= w > ceiling
        live = np.nonzero((hit < 0) & ~frozen)[0]
        if live.size == 0:
            break
        k = np.searchsorted(cdf, rng.random(live.size) * cdf[-1], side="right") - 1
        w[live] += rng.binomial(np.maximum(k, 0), tau) - 1
        hit[live[w[live] == 0]] = t
    return WalkBatch(hit >= 0, hit)
