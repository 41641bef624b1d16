"""Command-line entry point: ``gpcert <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time

import numpy as np

from ..boardgame import (
    CollapseMap,
    DEFAULT_ENUMERATION_CAP,
    applicable_moves,
    enumerate_collapse_maps,
    map_count,
    parse_rho,
    partition_classes,
)
from ..kernels import assemble_Jk, bound_ledger, dump_expansion, final_bound
from ..numerics.grid import Grid, band_limited
from ..trees import build_forest
from . import report as rpt
from .config import KNOWN_CHECKS, ConfigError, RunConfig, load_config
from .suite import run_suite

VERIFY_CHECKS = ("moves", "resum", "factorize", "mild", "definetti", "trace")


def _add_grid_args(p):
    p.add_argument("--n", type=int, help="grid points per axis (power of two)")
    p.add_argument("--d", type=int, choices=(1, 2, 3), help="spatial dimension")
    p.add_argument("--t", type=float, help="time horizon")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--q", type=int, help="Gauss-Legendre order per simplex level")


def cmd_enumerate(a) -> int:
    maps = enumerate_collapse_maps(a.k, a.r, a.cap)
    if a.format == "json":
        print(json.dumps({"k": a.k, "r": a.r, "count": len(maps), "maps": [list(m.rho) for m in maps]}))
    else:
        print(f"k={a.k} r={a.r}: {len(maps)} collapse maps (product formula {map_count(a.k, a.r)})")
        if a.list:
            for m in maps:
                print("  " + ",".join(map(str, m.rho)))
    return 0


def cmd_classes(a) -> int:
    classes = partition_classes(a.k, a.r, a.cap)
    bound = 2 ** (a.k + a.r)
    doc = {
        "k": a.k,
        "r": a.r,
        "map_count": map_count(a.k, a.r),
        "class_count": len(classes),
        "bound": bound,
        "classes": [
            {
                "form": list(form.rho),
                "members": [list(m.rho) for m in cls.members],
                "perms": [list(p) for p in cls.perms],
            }
            for form, cls in classes.items()
        ],
    }
    if a.json:
        with open(a.json, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "r", "map_count", "class_count", "bound_2^(k+r)"])
            w.writerow([a.k, a.r, doc["map_count"], doc["class_count"], bound])
    print(f"k={a.k} r={a.r}: {doc['map_count']} maps, {len(classes)} classes (2^(k+r) = {bound})")
    for form, cls in classes.items():
        print(f"  [{','.join(map(str, form.rho))}]  size={len(cls)}  perms={[list(p) for p in cls.perms]}")
    return 0


def cmd_trees(a) -> int:
    f = build_forest(CollapseMap(a.k, parse_rho(a.rho)))
    print(f.adjacency_text())
    if a.dot:
        with open(a.dot, "w") as fh:
            fh.write(f.to_dot() + "\n")
    return 0


def cmd_expand(a) -> int:
    asm = assemble_Jk(CollapseMap(a.k, parse_rho(a.rho)))
    for j, tree in enumerate(asm.trees, start=1):
        print(f"J_{j}: {len(tree)} term(s)")
        for line in tree.listing():
            print("  " + line)
    if a.json:
        with open(a.json, "w") as fh:
            fh.write(dump_expansion(asm) + "\n")
    return 0


def cmd_ledger(a) -> int:
    rho = parse_rho(a.rho) if a.rho else (1,) * a.r
    led = bound_ledger(build_forest(CollapseMap(a.k, rho)))
    T = a.T if a.T is not None else 0.9 / (2 * a.C * a.M**4)
    print(f"k={a.k} rho={list(rho)}")
    print(led.table())
    print(f"aggregate value at T={T:g}, M={a.M:g}, C={a.C:g}: {led.aggregate_value(T, a.M, a.C):.6e}")
    print(f"shape after the final time integrals: {led.shape()}")
    print("r   final bound")
    for r in range(1, max(a.r, len(rho)) + 1):
        print(f"{r:<3d} {final_bound(a.k, r, T, a.M, a.C):.6e}")
    return 0


def _verify(a) -> dict:
    from ..numerics import checks as ck
    from ..numerics import definetti as dft
    from .criteria import check_trace, mild_atoms

    n, d, t, seed, q = a.n or 64, a.d or 1, 0.5 if a.t is None else a.t, 1234 if a.seed is None else a.seed, a.q or 8
    params = {"k": a.k, "r": a.r, "n": n, "d": d, "t": t, "seed": seed, "q": q}
    phi = band_limited(Grid(d, n), np.random.default_rng(seed))
    residuals, passed = [], True
    if a.check == "moves":
        for m in enumerate_collapse_maps(a.k, a.r):
            for col in applicable_moves(m):
                res = ck.verify_move_invariance(m, col, phi, t, q)
                residuals.append(res.residual)
                passed &= res.passed
    elif a.check == "resum":
        for res in ck.verify_resummation(a.k, a.r, phi, t, q):
            residuals.append(res.residual)
            passed &= res.passed
    elif a.check == "factorize":
        rng = np.random.default_rng(seed + 1)
        for m in enumerate_collapse_maps(a.k, a.r):
            times = np.concatenate([[t], np.sort(rng.uniform(0, t, a.r))[::-1]])
            res = ck.verify_factorization(m, phi, times)
            residuals.append(res.residual)
            passed &= res.passed
    elif a.check == "mild":
        cfg = RunConfig(n=n, seed=seed)
        _, f1, f2 = mild_atoms(cfg)
        res = dft.verify_mild_solution(dft.DiscreteMeasure.of([(0.5, f1), (0.5, f2)]), a.k, 1, t)
        residuals.append(res.residual)
        passed = res.residual < 1e-5
    elif a.check == "definetti":
        g = Grid(d, n)
        rng = np.random.default_rng(seed)
        mu = dft.DiscreteMeasure.of([(0.5, band_limited(g, rng)), (0.5, band_limited(g, rng))])
        res = dft.admissibility_residual(mu, a.k)
        residuals.append(res)
        passed = res < 1e-12
    elif a.check == "trace":
        rec = check_trace(RunConfig(seed=seed))[0]
        residuals.append(rec.residual)
        passed = rec.passed
    return {"check": a.check, "params": params, "residuals": residuals, "pass": bool(passed)}


def cmd_verify(a) -> int:
    start = time.perf_counter()
    out = _verify(a)
    out["runtime_ms"] = round((time.perf_counter() - start) * 1e3, 1)
    text = json.dumps(out, indent=2)
    print(text)
    if a.json:
        with open(a.json, "w") as fh:
            fh.write(text + "\n")
    return 0 if out["pass"] else 1


def cmd_suite(a) -> int:
    overrides = {
        k: getattr(a, k)
        for k in ("n", "d", "t", "seed", "q", "T", "M", "C", "figures")
        if getattr(a, k, None) is not None
    }
    if a.checks is not None:
        overrides["checks"] = [c for c in a.checks.split(",") if c]
    if a.json:
        overrides["json_out"] = a.json
    if a.csv:
        overrides["csv_out"] = a.csv
    cfg = load_config(a.config, overrides)
    report = run_suite(cfg)
    sys.stdout.write(rpt.emit(report, a.format))
    if cfg.json_out:
        rpt.write(report, cfg.json_out, "json")
    if cfg.csv_out:
        rpt.write(report, cfg.csv_out, "csv")
    if cfg.figures:
        from .plotting import render_all

        for p in render_all(cfg.figures, report, cfg.horizon_T, cfg.M, cfg.C):
            print(f"figure: {p}", file=sys.stderr)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpcert", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("enumerate", help="count and list collapse maps")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    p.add_argument("--list", action="store_true", help="print every map")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("classes", help="partition maps into echelon classes")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    p.add_argument("--json", help="write per-class membership and permutations here")
    p.add_argument("--csv", help="write the one-row count table here")
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("trees", help="contraction forest of one map")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rho", required=True, help='comma separated rows, e.g. "2,2,3,5"')
    p.add_argument("--dot", help="write a graph description to this file")
    p.set_defaults(func=cmd_trees)

    p = sub.add_parser("expand", help="term listing of the tree-factorized integrand")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--json", help="write the expansion as JSON")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("ledger", help="per-tree and aggregate bound table")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--rho", help="collapse map (default: all ones)")
    p.add_argument("--T", type=float)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.set_defaults(func=cmd_ledger)

    p = sub.add_parser("verify", help="run one numerical certificate")
    p.add_argument("--check", choices=VERIFY_CHECKS, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--r", type=int, default=2)
    _add_grid_args(p)
    p.add_argument("--json", help="write the JSON record here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("suite", help="run the acceptance suite")
    p.add_argument("--config", help="JSON config file (default: $GPCERT_CONFIG)")
    p.add_argument("--checks", help=f"comma separated subset of: {', '.join(KNOWN_CHECKS)}")
    _add_grid_args(p)
    p.add_argument("--T", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--json", help="also write the JSON report here")
    p.add_argument("--csv", help="also write the CSV report here")
    p.add_argument("--figures", help="render figures into this directory")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
