"""Experiment driver.

Every subcommand writes <out>/<subcommand>.json (a timestamp/timing header
kept apart from a deterministic body) and, where there is a table, a CSV next
to it. The exit status is 1 when any check in the body failed.

Parameters come from built-in defaults, then the [common] and [<subcommand>]
sections of an INI file given with --config, then command-line flags.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import __version__, poly, realred, reduction, sk, stats
from .seeds import derive_seed, substream

REPORT_SCHEMA = 1


class ConfigError(ValueError):
    pass


def _ints(text) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# name -> (type, default, help)
COMMON = {
    "seed": (int, 0, "root seed; every trial uses a named substream of it"),
    "workers": (int, 1, "worker processes for independent trials"),
    "demo_mode": (_bool, False, "relax theory-faithful parameter bounds"),
    "out": (str, "reports", "output directory"),
}

SUBCOMMANDS: dict[str, dict[str, tuple]] = {
    "brute": {
        "n": (int, 7, "spins"),
        "N": (int, 0, "precision bits"),
        "value": (int, 1, "constant entry value (ignored with --random or --instance)"),
        "random": (_bool, False, "sample a Gaussian instance instead"),
        "beta": (float, 1.0, "inverse temperature for --random"),
        "instance": (str, "", "path to an instance JSON file"),
        "primes": (_ints, "101,1009", "also report Z mod these primes"),
    },
    "recursion-check": {
        "trials": (int, 1000, "random residue instances"),
        "n_min": (int, 3, "smallest n"),
        "n_max": (int, 9, "largest n"),
        "primes": (_ints, "101,1009", "moduli"),
        "N": (int, 3, "precision bits"),
    },
    "reduce-modp": {
        "n": (int, 6, "spins"),
        "p": (int, 1063, "prime modulus"),
        "N": (int, 3, "precision bits"),
        "q": (float, 0.5, "oracle success rate"),
        "mode": (str, "uniform-error", "oracle error mode"),
        "trials": (int, 50, "independent trials"),
        "H": (int, -1, "brute-force base (-1: default)"),
        "min_rate": (float, 0.9, "required success rate"),
    },
    "reduce-exact": {
        "n": (int, 7, "spins"),
        "N": (int, 4, "precision bits"),
        "beta": (float, 1.0, "inverse temperature"),
        "q": (float, 0.5, "oracle success rate"),
        "mode": (str, "uniform-error", "oracle error mode"),
        "R": (int, 21, "majority repetitions per prime"),
        "trials": (int, 20, "meta-trials"),
        "prime_lo": (int, 1 << 22, "primes are taken above this"),
        "min_rate": (float, 0.95, "required meta-trial success rate"),
    },
    "real-reduce": {
        "n": (int, 5, "spins"),
        "delta": (float, 0.05, "schedule delta"),
        "q": (float, 0.85, "oracle success rate"),
        "trials": (int, 200, "single-pass trials"),
        "R": (int, 51, "majority repetitions"),
        "meta_trials": (int, 20, "majority meta-trials"),
        "C": (float, 0.0, "TV constant (0: estimate numerically)"),
    },
    "uniformity": {
        "p": (int, 11, "prime"),
        "samples": (int, 10**6, "Monte Carlo samples"),
        "Ns": (_ints, "4,8,12,16", "precisions"),
        "kind": (str, "B", "J, B or C"),
        "n": (int, 4, "spins (kind J)"),
        "beta": (float, 1.0, "inverse temperature (kind J)"),
        "max_last": (float, 0.01, "required deviation bound at the last N"),
    },
    "lipschitz": {
        "delta": (float, 0.5, "lower end"),
        "Delta": (float, 8.0, "upper end"),
        "n": (int, 4, "spins"),
        "beta": (float, 1.0, "inverse temperature"),
        "grid": (int, 100, "grid points per axis"),
    },
    "tvcurve": {
        "a": (_floats, "1,2,5", "target values"),
        "lambdas": (_floats, "0.001,0.003,0.01,0.03,0.1,0.2,0.4,0.6,0.8,0.9", "lambda grid"),
    },
    "decode-bench": {
        "decoder": (str, "sudan", "sudan or bw"),
        "p": (int, 4229, "prime"),
        "L": (int, 2000, "list size"),
        "d": (int, 25, "degree"),
        "agree": (int, 340, "planted agreements"),
        "trials": (int, 5, "trials"),
    },
}


# ---------------------------------------------------------------- configuration


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skreduce", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="INI file with [common] and per-subcommand sections")
    for name, (_, _, helptext) in COMMON.items():
        if name == "demo_mode":
            common.add_argument(_flag(name), dest=name, action="store_const", const=True, default=None, help=helptext)
        else:
            common.add_argument(_flag(name), dest=name, default=None, help=helptext)
    subs = parser.add_subparsers(dest="command", required=True)
    for cmd, spec in SUBCOMMANDS.items():
        sp = subs.add_parser(cmd, parents=[common])
        for name, (_, default, helptext) in spec.items():
            sp.add_argument(_flag(name), dest=name, default=None, help=f"{helptext} (default {default})")
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    spec = {**COMMON, **SUBCOMMANDS[args.command]}
    raw: dict[str, Any] = {k: v[1] for k, v in spec.items()}
    if args.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(args.config):
            raise ConfigError(f"cannot read config file {args.config}")
        for section in ("common", args.command):
            if cp.has_section(section):
                for key, value in cp.items(section):
                    key = key.replace("-", "_")
                    if key not in spec:
                        raise ConfigError(f"unknown key {key!r} in section [{section}]")
                    raw[key] = value
    for key in spec:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    out = {}
    for key, (conv, _, _) in spec.items():
        try:
            out[key] = conv(raw[key]) if not isinstance(raw[key], list) else raw[key]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from None
    out["command"] = args.command
    return out


# ---------------------------------------------------------------- helpers


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _wilson(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return centre - half, centre + half


def write_report(cfg: dict, body: dict, table: list | None = None, header_extra: dict | None = None) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    cmd = cfg["command"]
    header = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "version": __version__,
        **(header_extra or {}),
    }
    params = {k: v for k, v in cfg.items() if k not in ("out", "workers", "command")}
    doc = {"header": header, "body": {"schema_version": REPORT_SCHEMA, "command": cmd,
                                      "params": params, **body}}
    path = out / f"{cmd}.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    if table:
        with open(out / f"{cmd}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(table[0].keys()))
            for row in table:
                writer.writerow(list(row.values()))
    return path


# ---------------------------------------------------------------- subcommands


def cmd_brute(cfg):
    if cfg["instance"]:
        inst = sk.SKInstance.from_json(Path(cfg["instance"]).read_text())
    elif cfg["random"]:
        inst = stats.sample_instance(cfg["n"], cfg["N"], cfg["beta"], cfg["seed"])
    else:
        inst = sk.SKInstance.constant(cfg["n"], cfg["N"], cfg["value"])
    z = sk.partition_exact(inst)
    residues = {str(p): sk.partition_mod_p(inst.mod(p), inst.N) for p in cfg["primes"]}
    if isinstance(z, Fraction):
        consistent = all(z.numerator * pow(z.denominator, -1, int(p)) % int(p) == r for p, r in residues.items())
    else:
        consistent = all(z % int(p) == r for p, r in residues.items())
    return {"instance": json.loads(inst.to_json()), "Z": str(z), "Z_mod_p": residues,
            "checks": {"mod_p_consistent": consistent}}, None, {}


def _recursion_trial(args):
    seed, idx, n, p, N = args
    rng = substream(seed, "recursion", idx)
    inst = sk.ResidueInstance.random(n, p, rng)
    split = sk.self_recursion_split(inst, N)
    lhs = sk.partition_mod_p(inst, N)
    rhs = split.combine(sk.partition_mod_p(split.plus, N), sk.partition_mod_p(split.minus, N))
    return {"trial": idx, "n": n, "p": p, "lhs": lhs, "rhs": rhs, "ok": lhs == rhs}


def cmd_recursion_check(cfg):
    ns = list(range(cfg["n_min"], cfg["n_max"] + 1))
    jobs = [(cfg["seed"], i, ns[i % len(ns)], cfg["primes"][(i // len(ns)) % len(cfg["primes"])], cfg["N"])
            for i in range(cfg["trials"])]
    rows = _map(_recursion_trial, jobs, cfg["workers"])
    failures = sum(not r["ok"] for r in rows)
    return {"trials": len(rows), "failures": failures, "checks": {"zero_failures": failures == 0}}, rows, {}


def _modp_trial(args):
    cfg, idx = args
    rng = substream(cfg["seed"], "reduce-modp", idx)
    oracle = reduction.make_faulty_oracle(cfg["mode"], cfg["q"], derive_seed(cfg["seed"], "oracle"), cfg["N"])
    inst = sk.ResidueInstance.random(cfg["n"], cfg["p"], rng)
    params = reduction.ReductionParams(N=cfg["N"], q=cfg["q"], H=None if cfg["H"] < 0 else cfg["H"],
                                       demo_mode=cfg["demo_mode"])
    report = reduction.ReductionReport()
    start = time.perf_counter()
    try:
        value = reduction.reduce_level(inst, oracle, params, rng, report)
    except reduction.ReductionFailure:
        value = None
    truth = sk.partition_mod_p(inst, cfg["N"])
    top = [r for r in report.levels if r.n == cfg["n"]]
    return ({"trial": idx, "correct": value == truth,
             "candidates": max((r.candidates for r in report.levels), default=0),
             "top_level_candidates": max((r.candidates for r in top), default=0),
             "levels": len(report.levels), "queries": oracle.queries},
            time.perf_counter() - start)


def cmd_reduce_modp(cfg):
    results = _map(_modp_trial, [(cfg, i) for i in range(cfg["trials"])], cfg["workers"])
    rows = [r for r, _ in results]
    rate = sum(r["correct"] for r in rows) / max(1, len(rows))
    cap = reduction.candidate_cap(cfg["q"])
    worst = max((r["candidates"] for r in rows), default=0)
    body = {"success_rate": rate, "candidate_cap": cap, "max_candidates": worst,
            "checks": {"success_rate": rate >= cfg["min_rate"], "candidate_cap": worst <= cap}}
    return body, rows, {"seconds": [round(s, 4) for _, s in results]}


def _exact_trial(args):
    cfg, idx = args
    inst = stats.sample_instance(cfg["n"], cfg["N"], cfg["beta"], derive_seed(cfg["seed"], "instance", idx))
    oracle = reduction.make_faulty_oracle(cfg["mode"], cfg["q"], derive_seed(cfg["seed"], "oracle", idx), cfg["N"])
    params = reduction.ReductionParams(N=cfg["N"], q=cfg["q"], demo_mode=cfg["demo_mode"])
    start = time.perf_counter()
    try:
        value, report = reduction.reduce_exact(inst, lambda p: oracle, params, cfg["R"],
                                               derive_seed(cfg["seed"], "run", idx), prime_lo=cfg["prime_lo"])
        primes = len(report.residues)
    except reduction.ReductionFailure:
        value, primes = None, 0
    truth = sk.partition_exact(inst)
    return {"trial": idx, "correct": value == truth, "primes": primes, "Z": str(truth)}, time.perf_counter() - start


def cmd_reduce_exact(cfg):
    results = _map(_exact_trial, [(cfg, i) for i in range(cfg["trials"])], cfg["workers"])
    rows = [r for r, _ in results]
    rate = sum(r["correct"] for r in rows) / max(1, len(rows))
    return ({"success_rate": rate, "checks": {"success_rate": rate >= cfg["min_rate"]}},
            rows, {"seconds": [round(s, 4) for _, s in results]})


def _real_setup(cfg):
    n = cfg["n"]
    a = realred.sample_X(n, substream(cfg["seed"], "real-a"))
    C = cfg["C"] or stats.tv_constant([float(v) for v in a], _floats(SUBCOMMANDS["tvcurve"]["lambdas"][1]))
    return a, Fraction(C).limit_denominator(10**6)


def _real_trial(args):
    cfg, idx, a, C = args
    n = cfg["n"]
    oracle = realred.RationalOracle(n, cfg["q"], derive_seed(cfg["seed"], "real-oracle"))
    schedule = realred.Schedule.make(n, Fraction(cfg["delta"]).limit_denominator(10**6), C)
    trial = realred.real_trial(a, oracle, schedule, n, substream(cfg["seed"], "real-trial", idx))
    return {"trial": idx, "correct": trial.success and trial.value == sk.zhat(a, n), "agreements": trial.agreements}


def _real_meta(args):
    cfg, idx, a, C = args
    n = cfg["n"]
    oracle = realred.RationalOracle(n, cfg["q"], derive_seed(cfg["seed"], "real-oracle"))
    try:
        value = realred.real_reduction(a, oracle, Fraction(cfg["delta"]).limit_denominator(10**6), n,
                                       cfg["R"], derive_seed(cfg["seed"], "real-meta", idx), C)
    except realred.RealReductionFailure:
        value = None
    return {"meta_trial": idx, "correct": value == sk.zhat(a, n)}


def cmd_real_reduce(cfg):
    a, C = _real_setup(cfg)
    rows = _map(_real_trial, [(cfg, i, a, C) for i in range(cfg["trials"])], cfg["workers"])
    meta = _map(_real_meta, [(cfg, i, a, C) for i in range(cfg["meta_trials"])], cfg["workers"])
    wins = sum(r["correct"] for r in rows)
    lo, hi = _wilson(wins, len(rows))
    meta_rate = sum(r["correct"] for r in meta) / max(1, len(meta))
    delta = Fraction(cfg["delta"]).limit_denominator(10**6)
    body = {
        "C": str(C), "degree": realred.f_degree(cfg["n"]),
        "per_trial_rate": wins / max(1, len(rows)), "wilson95": [lo, hi],
        "markov_bound": str(realred.markov_lower_bound(Fraction(3, 4) + delta / 2, Fraction(1, 2) + delta / 2)),
        "meta_rate": meta_rate,
        "checks": {"per_trial": hi >= 0.5 + float(delta) / 2, "majority": meta_rate >= 0.99},
    }
    return body, rows + meta, {}


def cmd_uniformity(cfg):
    reports = [stats.residue_uniformity(N, cfg["p"], cfg["samples"], cfg["kind"], cfg["n"], cfg["beta"], cfg["seed"])
               for N in cfg["Ns"]]
    rows = [{"N": r.N, "max_deviation": r.max_deviation, "radius": r.radius} for r in reports]
    table = [{"N": r.N, "residue": res, "count": c, "frequency": f, "deviation": d}
             for r in reports for res, c, f, d in r.table]
    body = {"sweep": rows, "checks": {"trend": stats.uniformity_trend_ok(reports),
                                      "last_small": reports[-1].max_deviation < cfg["max_last"]}}
    return body, table, {}


def cmd_lipschitz(cfg):
    out = []
    for variant in ("J", "B"):
        r = stats.lipschitz_ratio_check(cfg["delta"], cfg["Delta"], cfg["n"], cfg["beta"], cfg["grid"], variant)
        out.append({"variant": variant, "pairs": r.pairs, "violations": r.violations, "constant": r.constant})
    return {"grids": out, "checks": {"no_violations": all(r["violations"] == 0 for r in out)}}, out, {}


def cmd_tvcurve(cfg):
    table, slopes, monotone = [], {}, True
    for a in cfg["a"]:
        curve = stats.tv_lognormal_curve(a, cfg["lambdas"])
        slopes[str(a)] = curve.slope_estimate
        tvs = [r[1] for r in curve.rows]
        monotone &= all(y >= x - r[2] for x, y, r in zip(tvs, tvs[1:], curve.rows[1:]))
        table += [{"a": a, "lambda": lam, "tv": tv, "error": err, "tv_over_lambda": s} for lam, tv, err, s in curve.rows]
    bounded = all(math.isfinite(s) and s < 1e3 for s in slopes.values())
    return {"slopes": slopes, "checks": {"bounded": bounded, "monotone": monotone}}, table, {}


def _bench_trial(args):
    cfg, idx = args
    rng = substream(cfg["seed"], "decode", idx)
    p, L, d = cfg["p"], cfg["L"], cfg["d"]
    f = poly.random_poly(rng, d, p)
    xs = rng.choice(p, size=L, replace=False)
    ys = poly.evaluate_many(f, xs)
    bad = rng.choice(L, size=L - cfg["agree"], replace=False)
    for i in bad:
        ys[i] = (ys[i] + 1 + int(rng.integers(p - 1))) % p
    pts = poly.EvalList(tuple(int(x) for x in xs), tuple(ys), p)
    start = time.perf_counter()
    if cfg["decoder"] == "bw":
        try:
            found = poly.berlekamp_welch(pts, d) == f
        except poly.NoCodeword:
            found = False
    else:
        found = f in poly.sudan_list_decode(pts, d, cfg["agree"])
    return {"trial": idx, "recovered": found}, time.perf_counter() - start


def cmd_decode_bench(cfg):
    if cfg["decoder"] not in ("sudan", "bw"):
        raise ConfigError("decoder must be 'sudan' or 'bw'")
    results = _map(_bench_trial, [(cfg, i) for i in range(cfg["trials"])], cfg["workers"])
    rows = [r for r, _ in results]
    body = {"recovered": sum(r["recovered"] for r in rows), "trials": len(rows),
            "checks": {"all_recovered": all(r["recovered"] for r in rows)}}
    if cfg["decoder"] == "sudan":
        sp = poly.sudan_parameters(cfg["L"], cfg["d"], cfg["agree"])
        body["threshold"] = sp.threshold
        body["sqrt_check"] = sp.sqrt_check
    return body, rows, {"seconds": [round(s, 4) for _, s in results]}


COMMANDS = {
    "brute": cmd_brute,
    "recursion-check": cmd_recursion_check,
    "reduce-modp": cmd_reduce_modp,
    "reduce-exact": cmd_reduce_exact,
    "real-reduce": cmd_real_reduce,
    "uniformity": cmd_uniformity,
    "lipschitz": cmd_lipschitz,
    "tvcurve": cmd_tvcurve,
    "decode-bench": cmd_decode_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if cfg.get("mode") and cfg["mode"] not in reduction.ORACLE_MODES:
            raise ConfigError(f"mode must be one of {', '.join(reduction.ORACLE_MODES)}")
        body, table, extra = COMMANDS[args.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"skreduce {args.command}: {exc}", file=sys.stderr)
        return 2
    path = write_report(cfg, body, table, extra)
    failed = [name for name, ok in body.get("checks", {}).items() if not ok]
    for name, ok in body.get("checks", {}).items():
        print(f"{args.command}: {name}: {'PASS' if ok else 'FAIL'}")
    print(f"report: {path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
