"""Python entry points around the numba kernels."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..distributions import DegreeDistribution
from ..graph import HalfEdgeGraph, gen_config_model, gen_er, sample_degrees
from ..rng import derive_seed
from . import _structs as rec
from ._coupled import V_AB, V_AVO, V_DEL, V_EVO, coupled_kernel
from ._dynamic import dynamic_kernel
from ._gillespie import N_EVENT_KINDS, STATUS_BUDGET, basic_kernel, unstable_kernel
from .config import EVENT_NAMES, RECORD_MODES, ConfigError, EpidemicConfig, Trajectory, Variant

BUDGET_FACTOR = 50

_COUPLED_CODES = {Variant.DEL_SI: V_DEL, Variant.EVO_SI: V_EVO, Variant.AVO_SI: V_AVO, Variant.AB_AVO_SI: V_AB}


def default_budget(n: int, n_half_edges: int) -> int:
    return BUDGET_FACTOR * (n + n_half_edges)


def _events(counts) -> dict:
    return {name: int(counts[i]) for i, name in enumerate(EVENT_NAMES[:N_EVENT_KINDS])}


def _split_samples(samples):
    if samples is None:
        return None, None
    rates = samples[:, 6].copy()
    return np.delete(samples, 6, axis=1), rates


def _pick_seed(n, config, rng_seed) -> int:
    if config.seed_vertex is not None:
        if not 0 <= config.seed_vertex < n:
            raise ConfigError("seed vertex out of range")
        return int(config.seed_vertex)
    return int(np.random.default_rng([int(rng_seed) & ((1 << 63) - 1), 0]).integers(n))


def run_static(graph: HalfEdgeGraph, config: EpidemicConfig, randomness=0) -> Trajectory:
    """Simulate ``config`` on a copy of ``graph`` until absorption.

    ``randomness`` is an integer seed or a ``CouplingBundle``.  Bundle-driven
    runs support the four SI variants and do not record samples.
    """
    from ..coupling import CouplingBundle

    if config.time_changed:
        raise ConfigError("the time change is only defined for the dynamic construction")
    n, E = graph.n, graph.n_edges
    budget = config.budget or default_budget(n, graph.n_half_edges)
    owner = graph.owner.copy()
    head, nxt, prv = graph.head.copy(), graph.nxt.copy(), graph.prv.copy()
    rewires = graph.rewirings.copy() if E else np.zeros(1, dtype=np.int64)

    if isinstance(randomness, CouplingBundle):
        bundle = randomness
        if config.variant not in _COUPLED_CODES:
            raise ConfigError("coupled runs are defined for delSI, evoSI, avoSI and abAvoSI")
        if (bundle.lam, bundle.rho) != (config.lam, config.rho):
            raise ConfigError("config rates differ from the bundle's")
        if bundle.n != n:
            raise ConfigError("bundle was built for a different vertex count")
        if not np.all(graph.alive):
            raise ConfigError("coupled runs need a graph without dropped edges")
        seed_vertex = config.seed_vertex if config.seed_vertex is not None else bundle.seed_vertex()
        state, counts, t_end, status, ell, A, B, parent = coupled_kernel(
            n, E, owner, head, nxt, prv, seed_vertex, _COUPLED_CODES[config.variant],
            float(config.lam), float(config.rho), np.uint64(bundle.kernel_seed), budget,
        )
        return Trajectory(
            n=n, final_size=int((state > 0).sum()), events=_events(counts), t_end=float(t_end),
            status="budget_exceeded" if status == STATUS_BUDGET else "absorbed",
            infected=state > 0, extra={"ell": ell[:E], "A": A, "B": B, "parent": parent, "seed_vertex": seed_vertex},
        )

    rng_seed = int(randomness)
    seed_vertex = _pick_seed(n, config, rng_seed)
    kseed = derive_seed(rng_seed, 1)
    mode = RECORD_MODES[config.record]
    grid = config.grid if config.grid is not None else np.zeros(0)
    full, dec = rec.alloc_buffers(mode, config.kmax, grid, budget)
    meta = rec.new_meta(mode)
    extra = {"seed_vertex": seed_vertex}
    if config.variant.has_unstable_edges:
        out = unstable_kernel(
            n, E, owner, head, nxt, prv, rewires, seed_vertex,
            float(config.lam), float(config.rho), config.variant is Variant.AB_AVO_SI,
            kseed, budget, meta, full, dec, grid, config.kmax,
        )
        state, counts, t_end, status, last, A, B, tx_a, tx_b = out
        extra.update(A=A, B=B, tx_a=tx_a, tx_b=tx_b)
        alive = graph.alive.copy()
    else:
        alive = graph.alive.copy() if E else np.ones(1, dtype=bool)
        state, counts, t_end, status, last = basic_kernel(
            n, E, owner, head, nxt, prv, alive, rewires, seed_vertex,
            float(config.lam), float(config.rho), float(config.gamma), config.rewire_probability,
            config.duration == "fixed", kseed, budget, meta, full, dec, grid, config.kmax,
        )
    samples, rates = _split_samples(rec.collect_samples(mode, meta, full, dec, last))
    extra["graph"] = HalfEdgeGraph(n=n, owner=owner, n_edges=E, alive=alive[:E].copy(),
                                   rewirings=rewires[:E].copy())
    return Trajectory(
        n=n, final_size=int((state > 0).sum()), events=_events(counts), t_end=float(t_end),
        status="budget_exceeded" if status == STATUS_BUDGET else "absorbed",
        infected=state > 0, samples=samples, rates=rates, extra=extra,
    )


def run_dynamic(degrees, config: EpidemicConfig, rng_seed=0, n: int | None = None) -> Trajectory:
    """Half-edge construction of avoSI / AB-avoSI.

    ``degrees`` is a degree vector, or a ``DegreeDistribution`` together with ``n``.
    """
    if config.variant not in (Variant.AVO_SI, Variant.AB_AVO_SI):
        raise ConfigError("the dynamic construction exists for avoSI and abAvoSI only")
    if config.time_changed and config.lam <= 0:
        raise ConfigError("the time change needs lam > 0")
    if isinstance(degrees, DegreeDistribution):
        if n is None:
            raise ConfigError("n is required with a distribution")
        degrees = sample_degrees(n, degrees, np.random.default_rng([int(rng_seed), 2]))
    degrees = np.ascontiguousarray(degrees, dtype=np.int64)
    n = degrees.size
    H = int(degrees.sum())
    budget = config.budget or default_budget(n, H)
    seed_vertex = _pick_seed(n, config, rng_seed)
    mode = RECORD_MODES[config.record]
    grid = config.grid if config.grid is not None else np.zeros(0)
    full, dec = rec.alloc_buffers(mode, config.kmax, grid, budget)
    meta = rec.new_meta(mode)
    state, counts, t_end, status, last, A, B, tx_a, tx_b = dynamic_kernel(
        degrees, seed_vertex, float(config.lam), float(config.rho),
        config.variant is Variant.AB_AVO_SI, bool(config.time_changed),
        derive_seed(rng_seed, 1), budget, meta, full, dec, grid, config.kmax,
    )
    samples, rates = _split_samples(rec.collect_samples(mode, meta, full, dec, last))
    return Trajectory(
        n=n, final_size=int((state > 0).sum()), events=_events(counts), t_end=float(t_end),
        status="budget_exceeded" if status == STATUS_BUDGET else "absorbed",
        infected=state > 0, samples=samples, rates=rates,
        extra={"seed_vertex": seed_vertex, "A": A, "B": B, "tx_a": tx_a, "tx_b": tx_b},
    )


# replicas -------------------------------------------------------------------


@dataclass(frozen=True)
class GraphFactory:
    """Picklable recipe for a fresh graph per replica."""

    n: int
    dist: str | None = None  # distribution spec for the configuration model
    er_mu: float | None = None

    def __call__(self, seed) -> HalfEdgeGraph:
        if self.er_mu is not None:
            return gen_er(self.n, self.er_mu, seed)
        from ..distributions import parse_dist

        return gen_config_model(self.n, parse_dist(self.dist), seed)


@dataclass(frozen=True)
class DynamicFactory:
    """Marker: replicas run the half-edge construction on fresh degrees."""

    n: int
    dist: str


@dataclass
class OutbreakEstimate:
    trials: int
    n_large: int
    p_large: float
    p_large_se: float
    cond_size: float | None  # mean I_inf / n over large runs
    cond_size_se: float | None
    sizes: np.ndarray

    def as_dict(self) -> dict:
        return {
            "trials": self.trials, "n_large": self.n_large,
            "p_large": self.p_large, "p_large_se": self.p_large_se,
            "cond_size": self.cond_size, "cond_size_se": self.cond_size_se,
        }


def run_replica(task) -> tuple[int, int, dict, str]:
    """One replica; returns (n, final_size, events, status)."""
    factory, config, seed = task
    if isinstance(factory, DynamicFactory):
        from ..distributions import parse_dist

        traj = run_dynamic(parse_dist(factory.dist), config, seed, n=factory.n)
    else:
        graph = factory(derive_seed(seed, 7))
        traj = run_static(graph, config, seed)
    return traj.n, traj.final_size, traj.events, traj.status


def replica_seeds(root_seed: int, trials: int, offset: int = 0) -> list[int]:
    return [derive_seed(root_seed, offset + i) for i in range(trials)]


def run_replicas(factory, config, seeds, workers: int = 1) -> list:
    tasks = [(factory, config, s) for s in seeds]
    if workers <= 1 or len(tasks) <= 1:
        return [run_replica(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_replica, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def summarize(sizes: np.ndarray, n: int, eta: float) -> OutbreakEstimate:
    sizes = np.asarray(sizes, dtype=float)
    trials = sizes.size
    large = sizes > eta * n
    k = int(large.sum())
    p = k / trials
    p_se = math.sqrt(p * (1 - p) / trials)
    frac = sizes[large] / n
    cond = float(frac.mean()) if k else None
    cond_se = float(frac.std(ddof=1) / math.sqrt(k)) if k > 1 else None
    return OutbreakEstimate(trials, k, p, p_se, cond, cond_se, sizes.astype(np.int64))


def estimate_outbreak(factory, config: EpidemicConfig, trials: int, eta: float | None = None,
                      root_seed: int = 0, workers: int = 1) -> OutbreakEstimate:
    """Large-outbreak probability and conditional size over fresh replicas."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    eta = config.eta if eta is None else eta
    if not 0 < eta < 1:
        raise ConfigError("eta must lie in (0, 1)")
    results = run_replicas(factory, config, replica_seeds(root_seed, trials), workers)
    sizes = np.array([r[1] for r in results])
    return summarize(sizes, results[0][0], eta)
