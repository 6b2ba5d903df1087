"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import math

import numpy as np
import pytest

from evonet import analytics as an
from evonet.coupling import CouplingBundle, run_coupled_suite
from evonet.distributions import DegreeDistribution, parse_dist
from evonet.engine import DynamicFactory, EpidemicConfig, GraphFactory, estimate_outbreak, run_static
from evonet.graph import HalfEdgeGraph, gen_config_model
from evonet.oracles import exact_delsi_distribution, percolate_component
from evonet.rng import derive_seed
from evonet.verify import compare_buckets, limit_deviations, limit_run, survival_suite

pytestmark = pytest.mark.slow


def test_critical_value_formulas(report):
    lam_c = an.fixed_time_lambda_c(5, 4)
    rho_c = an.critical_values(parse_dist("poisson:5"), 0.0, gamma=1.0).rho_c_at(1.0, gamma=1.0)
    ok = abs(lam_c - 1.0084) <= 5e-4 and rho_c == 3.0
    report(1, ok, f"fixed-time lambda_c = {lam_c:.6f} (target 1.0084 +- 5e-4); rho_c = {rho_c!r} (target 3)")


def test_delta_closed_forms(report):
    errs = [abs(an.delta(DegreeDistribution.regular(r)) - (r - 2) * (2 * r + 1)) for r in range(3, 11)]
    errs += [abs(an.delta(DegreeDistribution.geometric(p)) - (3 / p - 6)) for p in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)]
    mus = np.round(np.arange(1.0, 2.0 + 1e-9, 1e-3), 3)
    deltas = [an.delta(DegreeDistribution.poisson(m)) for m in mus]
    errs += [abs(dv - (2 * m * m - 3 * m)) for m, dv in zip(mus, deltas)]
    change = next(m for m, dv in zip(mus, deltas) if dv >= 0)
    worst = max(errs)
    ok = worst < 1e-9 and abs(change - 1.5) <= 1e-3
    report(2, ok, f"max |delta - closed form| = {worst:.2e}; Poisson sign change at mu = {change}")


def _fd(f, h):
    return (f(1 + h) - f(1 - h)) / (2 * h), (f(1 + h) - 2 * f(1.0) + f(1 - h)) / h**2


def test_f_identities(report):
    pairs = []
    for spec in ("poisson:5", "poisson:3", "poisson:1.4", "regular:3", "geometric:0.3"):
        d = parse_dist(spec)
        ac = an.critical_values(d, 0).alpha_c
        pairs += [(spec, d, a) for a in (0.1 * ac, 0.5 * ac, 0.9 * ac, ac)]
    assert len(pairs) == 20
    worst1 = worst2 = 0.0
    exact = True
    for spec, d, a in pairs:
        f = an.f_function(d, a)
        exact &= f(1.0) == 0.0 and an.f_eval(d, a, 1.0) == 0.0
        d1, _ = _fd(f, 1e-5)
        _, d2 = _fd(f, 1e-4)
        worst1 = max(worst1, abs(d1 - an.f_prime_at_one(d, a)))
        worst2 = max(worst2, abs(d2 - an.f_second_at_one(d, a)))
        if a == an.critical_values(d, 0).alpha_c:
            worst2 = max(worst2, abs(d2 - an.delta(d)))
    ok = exact and worst1 < 1e-6 and worst2 < 1e-4
    report(3, ok, f"f(1)=0 exact: {exact}; max f' error {worst1:.1e} (tol 1e-6); max f'' error {worst2:.1e} (tol 1e-4)")


def test_delsi_is_percolation(report):
    d = parse_dist("poisson:5")
    bad, total = 0, 0
    for n in (100, 1000, 10_000):
        for i in range(100):
            s = derive_seed(n, i)
            rng = np.random.default_rng(s)
            lam, rho = rng.uniform(0.1, 2.0), rng.uniform(0.1, 5.0)
            g = gen_config_model(n, d, s)
            b = CouplingBundle(s, lam, rho, n)
            tr = run_static(g, EpidemicConfig("delSI", lam=lam, rho=rho), b)
            comp = percolate_component(g, b.retained_edges(g.n_edges), tr.extra["seed_vertex"])
            bad += tr.infected_set != comp
            total += 1
    report(4, bad == 0, f"{total - bad}/{total} coupled delSI runs equal the retained-edge component")


def test_pathwise_domination(report):
    d = parse_dist("poisson:5")
    n = 1000
    pairs = [("del", "ab"), ("ab", "evo"), ("evo", "avo"), ("del", "evo")]
    holds = {p: 0 for p in pairs}
    runs = 1000
    for i in range(runs):
        s = derive_seed(5, i)
        rng = np.random.default_rng(s)
        lam, rho = rng.uniform(0.05, 2.0), rng.uniform(0.1, 5.0)
        g = gen_config_model(n, d, s)
        sets = run_coupled_suite(g, EpidemicConfig("delSI", lam=lam, rho=rho), CouplingBundle(s, lam, rho, n))
        for a, b in pairs:
            holds[(a, b)] += sets[a] <= sets[b]
    ok = all(v == runs for v in holds.values())
    detail = "; ".join(f"{a}<={b}: {v}/{runs}" for (a, b), v in holds.items())
    report(5, ok, detail)


def test_outbreak_probability(report):
    d = parse_dist("poisson:5")
    rho = 4.0
    lam_c = an.critical_values(d, rho).lambda_c
    fac = GraphFactory(100_000, "poisson:5")
    parts, ok = [], True
    for k, mult in enumerate((1.2, 1.5, 2.0)):
        lam = mult * lam_c
        q = an.bp_survival(d, lam, rho)
        for j, v in enumerate(("delSI", "evoSI")):
            est = estimate_outbreak(fac, EpidemicConfig(v, lam=lam, rho=rho), trials=400, eta=0.01,
                                    root_seed=derive_seed(6, 10 * k + j))
            z = abs(est.p_large - q) / est.p_large_se
            ok &= z < 3
            parts.append(f"{v}@{mult}lc {est.p_large:.3f}+-{est.p_large_se:.3f} vs q={q:.3f} (z={z:.2f})")
    report(6, ok, "; ".join(parts))


@pytest.fixture(scope="module")
def limit_runs():
    d = parse_dist("poisson:5")
    alpha = an.critical_values(d, 0).alpha_c / 2
    surviving, sizes, i = [], [], 0
    while len(surviving) < 20 and i < 400:
        tr = limit_run(d, 100_000, alpha, derive_seed(7, i))
        i += 1
        sizes.append(tr.final_size)
        if tr.final_size > 0.01 * tr.n:
            surviving.append((limit_deviations(tr, d, alpha), tr.final_size / tr.n))
    return d, alpha, surviving, sizes


def test_time_changed_limits(report, limit_runs):
    _, alpha, surviving, sizes = limit_runs
    worst = {k: max(dev[k] for dev, _ in surviving) for k in ("x", "s", "x_s")}
    ok = len(surviving) == 20 and all(v < 0.03 for v in worst.values())
    report(7, ok, f"{len(surviving)} surviving runs of {len(sizes)}; sup deviations "
                  + ", ".join(f"{k}={v:.4f}" for k, v in worst.items()) + " (tol 0.03)")


def test_avosi_final_size(report, limit_runs):
    d, alpha, surviving, _ = limit_runs
    nu = an.sigma_nu(d, alpha).nu
    cond = float(np.mean([frac for _, frac in surviving]))
    lam, rho, n = 1.0, alpha / d.m1, 100_000
    included, evo_large = 0, []
    runs = 20
    for i in range(runs):
        s = derive_seed(8, i)
        g = gen_config_model(n, d, s)
        b = CouplingBundle(s, lam, rho, n)
        evo = run_static(g, EpidemicConfig("evoSI", lam=lam, rho=rho), b)
        avo = run_static(g, EpidemicConfig("avoSI", lam=lam, rho=rho), b)
        included += evo.infected_set <= avo.infected_set
        if evo.final_size > 0.01 * n:
            evo_large.append(evo.final_size / n)
    evo_mean = float(np.mean(evo_large)) if evo_large else 0.0
    ok = abs(cond - nu) < 0.02 and included == runs and evo_mean <= nu + 0.02
    report(8, ok, f"avoSI conditional size {cond:.4f} vs nu {nu:.4f} (tol 0.02); evo<=avo {included}/{runs}; "
                  f"evoSI conditional size {evo_mean:.4f} over {len(evo_large)} large runs")


def _evo_at(spec, frac, trials, seed):
    d = parse_dist(spec)
    alpha = frac * an.critical_values(d, 0).alpha_c
    lam = 1.0
    rho = alpha * lam / d.m1
    est = estimate_outbreak(GraphFactory(100_000, spec), EpidemicConfig("evoSI", lam=lam, rho=rho),
                            trials=trials, eta=0.01, root_seed=seed)
    fracs = est.sizes[est.sizes > 0.01 * 100_000] / 100_000
    return d, est, fracs


def test_phase_transition_character(report):
    d3, est3, fr3 = _evo_at("poisson:3", 0.95, 400, 91)
    d14, est14, fr14 = _evo_at("poisson:1.4", 0.95, 400, 92)
    share = float(np.mean(fr3 > 0.05)) if fr3.size else 0.0
    cond14 = est14.cond_size
    ok = (an.delta(d3) > 0 > an.delta(d14) and fr3.size > 0 and share >= 0.95
          and fr14.size > 0 and cond14 < 0.05)
    report(9, ok, f"Poisson(3): {fr3.size} large runs, {share:.0%} above 0.05, mean {est3.cond_size}; "
                  f"Poisson(1.4): {fr14.size} large runs, conditional size {cond14} (threshold 0.05)")


def test_er_fixed_point(report):
    lam = -math.log(0.6)  # 1 - exp(-lam) = 0.4, so mu tau = 2
    target = 1 - an.er_fixed_point(5.0, an.fixed_time_tau(lam, 0.0))
    est = estimate_outbreak(GraphFactory(100_000, er_mu=5.0),
                            EpidemicConfig("delSIR", lam=lam, rho=0.0, duration="fixed"),
                            trials=30, eta=0.01, root_seed=10)
    ok = est.n_large > 0 and abs(est.cond_size - target) < 0.01
    report(10, ok, f"conditional size {est.cond_size:.4f} over {est.n_large} large runs vs 1-z0 = {target:.4f}")


def _random_small_graph(rng):
    n = int(rng.integers(3, 8))
    m = int(rng.integers(3, 11))
    return HalfEdgeGraph.from_edges(n, rng.integers(0, n, size=(m, 2)))


def test_oracle_suite(report):
    rng = np.random.default_rng(11)
    worst, ok_graphs = 0.0, 0
    runs = 20_000
    for i in range(10):
        g = _random_small_graph(rng)
        lam, rho = float(rng.uniform(0.3, 2)), float(rng.uniform(0.3, 2))
        exact = exact_delsi_distribution(g, lam / (lam + rho), 0)
        cfg = EpidemicConfig("delSI", lam=lam, rho=rho, seed_vertex=0)
        sizes = np.array([run_static(g, cfg, derive_seed(11 + i, r)).final_size for r in range(runs)])
        ok, z = compare_buckets(exact, sizes)
        ok_graphs += ok
        worst = max(worst, z)
    checks = survival_suite(trials=100_000, root_seed=11)
    surv_ok = sum(c.passed for c in checks)
    ok = ok_graphs == 10 and surv_ok == len(checks)
    report(11, ok, f"enumeration vs MC: {ok_graphs}/10 graphs within 3 sigma (max |z| {worst:.2f}); "
                   f"survival solver vs MC: {surv_ok}/{len(checks)} points within 3 sigma")
