"""Shared clock variables for pathwise comparison of SI variants.

The bundle never stores a stream position: every variable is a pure function
of ``(root_seed, edge, activation, slot)``, so variants that visit edges in
different orders still read identical values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .engine._coupled import clock_r, clock_t, clock_u, clock_v
from .rng import MASK64, derive_seed


class Clocks(NamedTuple):
    T: float
    R: float
    U: int
    V: int


@dataclass
class CouplingBundle:
    root_seed: int
    lam: float
    rho: float
    n: int
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.lam < 0 or self.rho < 0:
            raise ValueError("rates must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        self.root_seed = int(self.root_seed) & MASK64

    @property
    def kernel_seed(self) -> int:
        return self.root_seed

    def clocks(self, edge: int, ell: int) -> Clocks:
        if ell < 1:
            raise ValueError("activation index starts at 1")
        key = (int(edge), int(ell))
        hit = self._cache.get(key)
        if hit is None:
            s = np.uint64(self.root_seed)
            hit = Clocks(
                float(clock_t(s, key[0], key[1], float(self.lam))),
                float(clock_r(s, key[0], key[1], float(self.rho))),
                int(clock_u(s, key[0], key[1], self.n)),
                int(clock_v(s, key[0], key[1])),
            )
            hit = self._cache.setdefault(key, hit)
        return hit

    def table(self, edges, ells) -> np.ndarray:
        """Rows (T, R, U, V) for each (edge, ell) pair, as a float array.

        Computed in bulk without touching the cache; values equal ``clocks``.
        """
        edges = np.ascontiguousarray(edges, dtype=np.int64)
        ells = np.ascontiguousarray(ells, dtype=np.int64)
        if edges.shape != ells.shape:
            raise ValueError("edges and ells must have the same shape")
        if ells.size and ells.min() < 1:
            raise ValueError("activation index starts at 1")
        return _fill_table(np.uint64(self.root_seed), edges.ravel(), ells.ravel(),
                           float(self.lam), float(self.rho), self.n)

    def seed_vertex(self) -> int:
        return derive_seed(self.root_seed, 0) % self.n

    def retained_edges(self, n_edges: int) -> np.ndarray:
        """Edges whose first activation would transmit (T < R)."""
        return np.array([self.clocks(e, 1).T < self.clocks(e, 1).R for e in range(n_edges)], dtype=bool)


@njit(cache=True)
def _fill_table(seed, edges, ells, lam, rho, n):
    out = np.empty((edges.size, 4))
    for i in range(edges.size):
        out[i, 0] = clock_t(seed, edges[i], ells[i], lam)
        out[i, 1] = clock_r(seed, edges[i], ells[i], rho)
        out[i, 2] = clock_u(seed, edges[i], ells[i], n)
        out[i, 3] = clock_v(seed, edges[i], ells[i])
    return out


def halved_residual(T: float, R: float, w: float) -> tuple[float, float]:
    """Residual clocks of an edge whose rates doubled after elapsed time w."""
    if not (T > w and R > w):
        raise ValueError("clock already fired before w")
    return (T - w) / 2.0, (R - w) / 2.0


SUITE_ORDER = ("del", "ab", "evo", "avo")


def run_coupled_suite(graph, base_config, bundle: CouplingBundle) -> dict[str, set]:
    """Final infected sets of delSI, AB-avoSI, evoSI and avoSI on shared clocks."""
    from .engine import EpidemicConfig, Variant, run_static

    names = {"del": Variant.DEL_SI, "ab": Variant.AB_AVO_SI, "evo": Variant.EVO_SI, "avo": Variant.AVO_SI}
    if base_config.gamma != 0:
        raise ValueError("coupled suite is defined for SI dynamics only")
    seed_vertex = base_config.seed_vertex
    if seed_vertex is None:
        seed_vertex = bundle.seed_vertex()
    out = {}
    for key in SUITE_ORDER:
        cfg = EpidemicConfig(variant=names[key], lam=bundle.lam, rho=bundle.rho, seed_vertex=seed_vertex)
        out[key] = run_static(graph, cfg, bundle).infected_set
    return out
