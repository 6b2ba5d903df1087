"""Command-line front end: generate, scan, analytic, simulate, verify."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import analytics
from .distributions import DistributionError, parse_dist
from .engine import (
    ConfigError,
    DynamicFactory,
    EpidemicConfig,
    GraphFactory,
    Variant,
    replica_seeds,
    run_replicas,
    run_static,
    summarize,
)
from .graph import gen_config_model, gen_er
from .rng import derive_seed

SCAN_COLUMNS = ["param", "p_large", "p_large_se", "cond_size", "cond_size_se",
                "n_large", "q_analytic", "nu_analytic", "notes"]

DEFAULTS = {
    "dist": "poisson:5", "n": 1000, "variant": "evoSI", "lambda": "1.0", "rho": "0.0",
    "gamma": "0.0", "duration": "exp", "trials": 100, "eta": 0.01, "seed": 0, "workers": 1,
    "out": None, "format": "csv", "er": False, "rewire_prob": None, "dynamic": False,
}


class CliError(Exception):
    pass


def parse_range(text) -> list[float]:
    """``"1.5"`` -> [1.5]; ``"0.8:2.0:0.1"`` -> inclusive grid."""
    text = str(text)
    if ":" not in text:
        return [float(text)]
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"range must be min:max:step, got {text!r}")
    lo, hi, step = map(float, parts)
    if step <= 0:
        raise CliError("range step must be > 0")
    if hi < lo:
        raise CliError("range max is below min")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def read_config_file(path) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise CliError(f"bad config line {raw!r} in {path}")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _bool(val) -> bool:
    if isinstance(val, bool):
        return val
    return str(val).lower() in ("1", "true", "yes", "on")


def merged_options(args) -> dict:
    """Defaults < config file < explicit flags."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(read_config_file(args.config))
    for key, val in vars(args).items():
        if key in ("command", "config", "func"):
            continue
        if val is not None and val is not False:
            opts[key] = val
    opts["n"] = int(opts["n"])
    opts["trials"] = int(opts["trials"])
    opts["seed"] = int(opts["seed"])
    opts["workers"] = int(opts["workers"])
    opts["eta"] = float(opts["eta"])
    opts["er"] = _bool(opts["er"])
    opts["dynamic"] = _bool(opts["dynamic"])
    return opts


def build_config(opts, lam, rho, gamma) -> EpidemicConfig:
    duration = {"exp": "exponential", "exponential": "exponential", "fixed": "fixed"}.get(opts["duration"])
    if duration is None:
        raise CliError("--duration must be exp or fixed")
    rp = opts.get("rewire_prob")
    return EpidemicConfig(variant=opts["variant"], lam=lam, rho=rho, gamma=gamma,
                          rewire_prob=None if rp is None else float(rp),
                          duration=duration, eta=opts["eta"])


def _factory(opts):
    dist = parse_dist(opts["dist"])
    if opts["dynamic"]:
        return DynamicFactory(opts["n"], opts["dist"])
    if opts["er"]:
        return GraphFactory(opts["n"], er_mu=dist.m1)
    return GraphFactory(opts["n"], dist=opts["dist"])


def analytic_overlay(opts, cfg: EpidemicConfig) -> tuple[float | None, float | None, str]:
    """Outbreak probability and avoSI size predicted for one grid point."""
    dist = parse_dist(opts["dist"])
    notes = []
    lam, rho, gamma = cfg.lam, cfg.rho, cfg.gamma
    if cfg.duration == "fixed":
        tau = analytics.fixed_time_tau(lam, rho)
    else:
        tau = lam / (lam + rho + gamma) if lam > 0 else 0.0
    if opts["er"]:
        q = 1.0 - analytics.er_fixed_point(dist.m1, tau)
    else:
        q = analytics.bp_survival_tau(dist, tau)
    cs = analytics.critical_values(dist, rho, gamma)
    if not cs.supercritical_possible:
        notes.append("no supercritical regime")
    elif cfg.duration == "fixed":
        try:
            notes.append(f"lambda_c={analytics.fixed_time_lambda_c(dist.m1, rho):.6g}")
        except analytics.SubcriticalError:
            notes.append("always subcritical")
    else:
        notes.append(f"lambda_c={cs.lambda_c:.6g}")
        notes.append(f"rho_c={cs.rho_c_at(lam, gamma):.6g}")
    nu = None
    if cfg.variant is Variant.AVO_SI and cs.supercritical_possible:
        alpha = analytics.alpha_of(dist, lam, rho)
        if alpha < cs.alpha_c:
            nu = analytics.sigma_nu(dist, alpha).nu
        else:
            nu = 0.0
    return q, nu, ";".join(notes)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _sweep(opts):
    ranges = {k: parse_range(opts[k]) for k in ("lambda", "rho", "gamma")}
    swept = [k for k, v in ranges.items() if len(v) > 1]
    if len(swept) > 1:
        raise CliError("sweep at most one of --lambda/--rho/--gamma")
    key = swept[0] if swept else "lambda"
    return key, ranges


def cmd_scan(opts) -> int:
    key, ranges = _sweep(opts)
    factory = _factory(opts)
    out = opts["out"]
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        jsonl = opts["format"] == "jsonl"
        writer = None if jsonl else csv.writer(fh)
        if writer:
            writer.writerow(SCAN_COLUMNS)
        for gi, value in enumerate(ranges[key]):
            point = {k: v[0] for k, v in ranges.items()}
            point[key] = value
            cfg = build_config(opts, point["lambda"], point["rho"], point["gamma"])
            seeds = replica_seeds(derive_seed(opts["seed"], gi), opts["trials"])
            t0 = time.perf_counter()
            results = run_replicas(factory, cfg, seeds, opts["workers"])
            if jsonl:
                ms = (time.perf_counter() - t0) * 1000 / len(results)
                for s, (n, size, events, status) in zip(seeds, results):
                    fh.write(json.dumps(_record(cfg, n, s, size, events, ms)) + "\n")
            else:
                est = summarize(np.array([r[1] for r in results]), results[0][0], opts["eta"])
                q, nu, notes = analytic_overlay(opts, cfg)
                writer.writerow([_fmt(float(value)), _fmt(est.p_large), _fmt(est.p_large_se),
                                 _fmt(est.cond_size), _fmt(est.cond_size_se), est.n_large,
                                 _fmt(q), _fmt(nu), notes])
            fh.flush()
    except OSError as exc:
        raise CliError(f"writing {out}: {exc}") from exc
    finally:
        if out:
            fh.close()
    return 0


def _record(cfg, n, seed, size, events, ms) -> dict:
    return {"variant": cfg.variant.value, "n": n, "lambda": cfg.lam, "rho": cfg.rho,
            "gamma": cfg.gamma, "seed": seed, "final_size": size, "events": events,
            "wallclock_ms": round(ms, 3)}


def cmd_simulate(opts) -> int:
    key, ranges = _sweep(opts)
    if any(len(v) > 1 for v in ranges.values()):
        raise CliError("simulate takes single parameter values; use scan for sweeps")
    cfg = build_config(opts, ranges["lambda"][0], ranges["rho"][0], ranges["gamma"][0])
    factory = _factory(opts)
    out = opts["out"]
    if opts["format"] == "csv":
        # one recorded run; trajectory samples as CSV
        if isinstance(factory, DynamicFactory):
            from .engine import run_dynamic

            cfg.record = "adaptive"
            traj = run_dynamic(parse_dist(opts["dist"]), cfg, opts["seed"], n=opts["n"])
        else:
            cfg.record = "adaptive"
            traj = run_static(factory(derive_seed(opts["seed"], 7)), cfg, opts["seed"])
        path = out or "/dev/stdout"
        traj.write_csv(path)
        return 0
    seeds = replica_seeds(opts["seed"], opts["trials"])
    fh = open(out, "w") if out else sys.stdout
    try:
        for s in seeds:
            t0 = time.perf_counter()
            n, size, events, status = run_replicas(factory, cfg, [s], 1)[0]
            ms = (time.perf_counter() - t0) * 1000
            fh.write(json.dumps(_record(cfg, n, s, size, events, ms)) + "\n")
    finally:
        if out:
            fh.close()
    return 0


def cmd_generate(opts) -> int:
    dist = parse_dist(opts["dist"])
    if opts["er"]:
        g = gen_er(opts["n"], dist.m1, opts["seed"])
    else:
        g = gen_config_model(opts["n"], dist, opts["seed"])
    text = g.to_text()
    if opts["out"]:
        Path(opts["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_analytic(opts) -> int:
    dist = parse_dist(opts["dist"])
    rho = float(opts["rho"])
    gamma = float(opts["gamma"])
    cs = analytics.critical_values(dist, rho, gamma)
    report = cs.as_dict()
    rows = []
    for lam in parse_range(opts["lambda"]):
        row = {"lambda": lam, "alpha": analytics.alpha_of(dist, lam, rho) if lam > 0 else None,
               "q": analytics.bp_survival(dist, lam, rho) if lam > 0 else 0.0}
        alpha = row["alpha"]
        if cs.supercritical_possible and alpha is not None and alpha < cs.alpha_c:
            sn = analytics.sigma_nu(dist, alpha)
            row.update(sigma=sn.sigma, nu=sn.nu, star_holds=sn.star_holds)
        else:
            row.update(sigma=None, nu=None, star_holds=None)
        rows.append(row)
    report["dist"] = str(dist)
    report["grid"] = rows
    text = json.dumps(report, indent=2)
    if opts["out"]:
        Path(opts["out"]).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_verify(args, opts) -> int:
    from . import verify

    suite = verify.SUITES[args.suite]
    kwargs = {"root_seed": opts["seed"]}
    if args.suite == "coupling":
        kwargs.update(n=opts["n"], seeds=opts["trials"], dist=opts["dist"])
    elif args.suite == "percolation":
        kwargs.update(runs=opts["trials"], n=opts["n"])
    elif args.suite == "limits":
        kwargs.update(n=opts["n"], runs=opts["trials"], dist=opts["dist"])
    else:
        kwargs.update(trials=opts["trials"])
    checks = suite(**kwargs)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--dist")
    common.add_argument("--n", type=int)
    common.add_argument("--variant", choices=[v.value for v in Variant])
    common.add_argument("--lambda", dest="lambda", help="value or min:max:step")
    common.add_argument("--rho", help="value or min:max:step")
    common.add_argument("--gamma", help="value or min:max:step")
    common.add_argument("--rewire-prob", dest="rewire_prob", type=float)
    common.add_argument("--duration", choices=["exp", "fixed"])
    common.add_argument("--trials", type=int)
    common.add_argument("--eta", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "jsonl"])
    common.add_argument("--er", action="store_true", default=None, help="true Erdos-Renyi instead of Poisson CM")
    common.add_argument("--dynamic", action="store_true", default=None,
                        help="half-edge construction (avoSI/abAvoSI only)")

    p = argparse.ArgumentParser(prog="evonet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write a random graph as an edge list")
    sub.add_parser("scan", parents=[common], help="parameter sweep with replication")
    sub.add_parser("analytic", parents=[common], help="closed-form quantities as JSON")
    sub.add_parser("simulate", parents=[common], help="single runs as JSON lines or trajectory CSV")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=["coupling", "percolation", "limits", "survival"])
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        opts = merged_options(args)
        if args.command == "generate":
            return cmd_generate(opts)
        if args.command == "scan":
            return cmd_scan(opts)
        if args.command == "analytic":
            return cmd_analytic(opts)
        if args.command == "simulate":
            return cmd_simulate(opts)
        return cmd_verify(args, opts)
    except (CliError, ConfigError, DistributionError, analytics.DomainError) as exc:
        print(f"evonet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
