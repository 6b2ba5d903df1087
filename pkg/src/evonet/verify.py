"""Property suites behind ``evonet verify``; each check reports a statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytics, oracles
from .coupling import CouplingBundle, run_coupled_suite
from .distributions import DegreeDistribution, parse_dist
from .engine import EpidemicConfig, run_dynamic, run_static
from .graph import HalfEdgeGraph, gen_config_model
from .rng import derive_seed


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def chain_holds(sets: dict) -> bool:
    return sets["del"] <= sets["ab"] <= sets["evo"] <= sets["avo"]


def coupling_suite(n: int = 1000, seeds: int = 100, root_seed: int = 0,
                   dist: str = "poisson:5", lam: float = 1.0, rho: float = 1.0) -> list[Check]:
    d = parse_dist(dist)
    ok = 0
    failures = []
    for i in range(seeds):
        s = derive_seed(root_seed, i)
        g = gen_config_model(n, d, s)
        b = CouplingBundle(s, lam, rho, n)
        sets = run_coupled_suite(g, EpidemicConfig("delSI", lam=lam, rho=rho), b)
        if chain_holds(sets):
            ok += 1
        else:
            failures.append(i)
    return [Check("inclusion chain del <= ab <= evo <= avo", ok == seeds,
                  f"{ok}/{seeds} hold" + (f"; failing replicas {failures[:10]}" if failures else ""))]


def _mc_buckets(graph, lam, rho, seed_vertex, runs, root_seed):
    cfg = EpidemicConfig("delSI", lam=lam, rho=rho, seed_vertex=seed_vertex)
    sizes = np.array([run_static(graph, cfg, derive_seed(root_seed, i)).final_size for i in range(runs)])
    return sizes


def compare_buckets(exact: dict, sizes: np.ndarray, z: float = 3.0) -> tuple[bool, float]:
    """Largest per-bucket z-score of the empirical law against ``exact``."""
    runs = sizes.size
    worst = 0.0
    support = set(exact) | set(np.unique(sizes).tolist())
    for k in support:
        p = exact.get(k, 0.0)
        phat = float(np.mean(sizes == k))
        se = math.sqrt(max(p * (1 - p), 1e-300) / runs)
        worst = max(worst, abs(phat - p) / se if p > 0 else (math.inf if phat > 0 else 0.0))
    return worst < z, worst


def percolation_suite(runs: int = 20000, root_seed: int = 0, n: int = 1000) -> list[Check]:
    checks = []
    tri = HalfEdgeGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    exact = oracles.exact_delsi_distribution(tri, 0.5, 0)
    want = {1: 0.25, 2: 0.25, 3: 0.5}
    checks.append(Check("triangle enumeration", all(abs(exact[k] - want[k]) < 1e-12 for k in want),
                        f"{exact}"))
    sizes = _mc_buckets(tri, 1.0, 1.0, 0, runs, root_seed)
    ok, worst = compare_buckets(exact, sizes)
    checks.append(Check("triangle delSI Monte Carlo vs enumeration", ok, f"max |z| = {worst:.2f} over {runs} runs"))
    g = gen_config_model(n, DegreeDistribution.poisson(3), root_seed)
    b = CouplingBundle(derive_seed(root_seed, 1), 1.0, 1.0, n)
    tr = run_static(g, EpidemicConfig("delSI", lam=1.0, rho=1.0), b)
    comp = oracles.percolate_component(g, b.retained_edges(g.n_edges), tr.extra["seed_vertex"])
    checks.append(Check("coupled delSI equals percolation component", comp == tr.infected_set,
                        f"|I| = {tr.final_size}, |component| = {len(comp)}"))
    return checks


def limit_deviations(traj, dist: DegreeDistribution, alpha: float, t_max: float = 1.0) -> dict:
    """Sup over recorded times t <= min(gamma_n, t_max) of |simulated - limit| for X, S, X_S."""
    rows = traj.samples
    n = traj.n
    keep = (rows[:, 0] <= min(traj.t_end, t_max))
    rows = rows[keep]
    dev = {"x": 0.0, "s": 0.0, "x_s": 0.0}
    k = np.arange(rows.shape[1] - 6)
    for row in rows:
        lp = analytics.limit_curves(dist, alpha, row[0])
        sk = row[6:]
        dev["x"] = max(dev["x"], abs(row[4] / n - lp.x))
        dev["s"] = max(dev["s"], abs(sk.sum() / n - lp.s))
        dev["x_s"] = max(dev["x_s"], abs((k * sk).sum() / n - lp.x_s))
    return dev


def limit_run(dist: DegreeDistribution, n: int, alpha: float, seed: int, lam: float = 1.0,
              grid=None, variant: str = "avoSI"):
    """One time-changed dynamic run at the given alpha (rho chosen from lam)."""
    rho = alpha * lam / dist.m1
    grid = np.linspace(0.0, 1.0, 101) if grid is None else grid
    # S_{t,k} is needed for every k that can carry mass
    kmax = dist.kmax + 40
    cfg = EpidemicConfig(variant, lam=lam, rho=rho, time_changed=True, record="grid", grid=grid, kmax=kmax)
    return run_dynamic(dist, cfg, seed, n=n)


def limits_suite(n: int = 100_000, runs: int = 5, root_seed: int = 0, dist: str = "poisson:5",
                 tol: float = 0.03, eta: float = 0.01) -> list[Check]:
    d = parse_dist(dist)
    alpha = analytics.critical_values(d, 0.0).alpha_c / 2
    worst = {"x": 0.0, "s": 0.0, "x_s": 0.0}
    got, i = 0, 0
    while got < runs and i < 20 * runs:
        tr = limit_run(d, n, alpha, derive_seed(root_seed, i))
        i += 1
        if tr.final_size <= eta * n:
            continue
        got += 1
        for key, v in limit_deviations(tr, d, alpha).items():
            worst[key] = max(worst[key], v)
    return [Check(f"sup |{key} - limit| < {tol}", v < tol, f"{v:.4f} over {got} surviving runs")
            for key, v in worst.items()]


SURVIVAL_POINTS = (
    ("poisson:5", 1.0, 1.0),
    ("poisson:3", 1.0, 0.5),
    ("poisson:2", 2.0, 1.0),
    ("regular:3", 0.9, 0.1),
    ("regular:4", 1.0, 0.5),
    ("geometric:0.3", 1.0, 1.0),
    ("geometric:0.5", 3.0, 1.0),
    ("poisson:1.5", 1.0, 0.2),
    ("regular:5", 1.0, 1.0),
    ("poisson:8", 0.5, 1.0),
)


def survival_suite(trials: int = 100_000, root_seed: int = 0, points=SURVIVAL_POINTS) -> list[Check]:
    checks = []
    for i, (spec, lam, rho) in enumerate(points):
        d = parse_dist(spec)
        q = analytics.bp_survival(d, lam, rho)
        mc = oracles.bp_survival_mc(d, lam, rho, trials, rng_seed=derive_seed(root_seed, i))
        se = max(mc.stderr, 1.0 / trials)
        z = abs(mc.estimate - q) / se
        checks.append(Check(f"survival {spec} lam={lam} rho={rho}", z < 3,
                            f"solver {q:.5f}, MC {mc.estimate:.5f} +- {mc.stderr:.5f} (|z| = {z:.2f})"))
    return checks


SUITES = {
    "coupling": coupling_suite,
    "percolation": percolation_suite,
    "limits": limits_suite,
    "survival": survival_suite,
}
