"""Command-line runner: ``extremal-lab run | suites | verify``.

Each experiment yields one :class:`DiagnosticsReport` per (measure, q) and is
written as a CSV with columns ``experiment, n, q, value, prediction,
deviation, verdict``.  A ``summary.json`` holds the config echo and all
verdicts.  Exit status: 0 when every verdict passes, 2 on a failed verdict,
1 on a configuration or solver error.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .christoffel import christoffel_report, lambda_opt
from .conformal import faber_decay, fit_geometric_rate
from .config import ConfigError, RunConfig, as_complex, build_map, build_radial, build_weight, list_suites, load_suite
from .diagnostics import (
    SPARSE_LOG_CONSTANT,
    DiagnosticsReport,
    _mark,
    default_sample_points,
    exact_symmetric_check,
    lemniscate_ratio_sequence,
    moment_ratio_trace,
    norm_ratio_sequence,
    strong_ratio_field,
    szego_reference,
    weak_moment_table,
    zero_attraction_trace,
)
from .errors import ExtremalLabError
from .extremal import l1_nonuniqueness_scan, solve_monic
from .measure import discretize, point_measure
from .oracles import brute_force_christoffel, brute_force_monic, oracle_corpus
from .szego import psiint_check

CSV_HEADER = ("experiment", "n", "q", "value", "prediction", "deviation", "verdict")
THREADS_ENV = "EXTREMAL_LAB_THREADS"


@dataclass
class Task:
    tag: str
    experiment: str
    label: str | None
    q: float | None
    report: DiagnosticsReport | None = None


# -- experiment adapters -------------------------------------------------------


def _exp_norm_ratio(cfg, entry, q, disc):
    o = cfg.opts("norm_ratio", entry)
    return norm_ratio_sequence(entry.measure, q, cfg.degrees, cfg.n_theta, cfg.n_r,
                               tol=cfg.tol("ratio", 0.05, entry), disc=disc,
                               sandwich=o.get("sandwich", True), judge=o.get("judge", "last_quarter"))


def _exp_exact(cfg, entry, q, disc):
    return exact_symmetric_check(entry.measure, q, cfg.degrees, cfg.n_theta, cfg.n_r,
                                 tol=cfg.tol("exact", 1e-10, entry), disc=disc)


def _exp_weak(cfg, entry, q, disc):
    o = cfg.opts("weak_moments", entry)
    return weak_moment_table(entry.measure, q, o.get("k", [1, 2, 3, 4]), cfg.degrees, cfg.n_theta, cfg.n_r,
                             r_K=o.get("r_K", 0.9), tol=cfg.tol("weak", 0.05, entry), disc=disc)


def _exp_zeros(cfg, entry, q, disc):
    o = cfg.opts("zeros", entry)
    return zero_attraction_trace(entry.measure, q, cfg.degrees, cfg.n_theta, cfg.n_r, delta=o.get("delta"),
                                 single_from=o.get("single_from", 10), min_rate=o.get("min_rate", 0.2), disc=disc)


def _exp_strong(cfg, entry, q, disc):
    o = cfg.opts("strong", entry)
    sample = default_sample_points(tuple(o.get("radii", (1.5, 2.0, 3.0))), o.get("rays", 8))
    mu = entry.measure
    rep = strong_ratio_field(mu, q, cfg.degrees, sample, cfg.n_theta, cfg.n_r, tol=cfg.tol("strong", 0.02, entry),
                             kappa_exponent=o.get("kappa_exponent", 2.0), judge_radius=o.get("judge_radius", 2.0),
                             disc=disc)
    if o.get("szego_closed_form"):
        _bernstein_check(rep, mu, q, sample, cfg.tol("szego", 1e-8, entry))
    return rep


def _bernstein_check(rep, mu, q, sample, tol):
    """``S(w) = (1 - a/w)**(2/q)`` for ``nu' = |1 - a e^{i theta}|**2`` on the disk."""
    if mu.angular.name != "bernstein" or mu.m or mu.h.name != "one" or mu.map.kind != "disk":
        raise ValueError("szego_closed_form needs the Bernstein density on the disk with h = 1 and no exterior atoms")
    a = as_complex(mu.angular.params["a"])
    S = szego_reference(mu, q)
    got = S(sample)
    want = (1.0 - a / sample) ** (2.0 / q)
    dev = np.abs(got - want)
    for k in range(sample.size):
        rep.add("szego_closed_form", k, q, abs(got[k]), abs(want[k]), dev[k])
    ok = float(dev.max()) <= tol
    rep.verdicts["szego_closed_form"] = bool(ok)
    _mark(rep, "szego_closed_form", ok)


def _exp_christoffel(cfg, entry, q, disc):
    o = cfg.opts("christoffel", entry)
    exact = [(as_complex(e["point"]), e["formula"]) for e in o.get("exact", [])]
    plateau = [(as_complex(e["point"]), e.get("target")) for e in o.get("plateau", [])]
    mobius = [as_complex(x) for x in o.get("mobius", [])]
    return christoffel_report(entry.measure, disc, q, cfg.degrees, exact, plateau, mobius,
                              tol_exact=cfg.tol("christoffel_exact", 1e-10, entry),
                              tol_plateau=cfg.tol("christoffel_plateau", 0.05, entry),
                              tol_mobius=cfg.tol("mobius", 0.05, entry))


def _exp_faber(cfg, q):
    o = cfg.opts("faber")
    mp = build_map(o["map"]) if "map" in o else cfg.map
    n_max = int(o.get("n_max", max(cfg.degrees)))
    errors, floors = faber_decay(mp, n_max, n_theta=o.get("n_theta", 256), method=o.get("method", "coefficients"))
    ns = np.arange(1, n_max + 1)
    rate, used = fit_geometric_rate(ns, errors[1:], floors[1:])
    rep = DiagnosticsReport("faber", ns.tolist())
    bound = mp.rho if mp.kind != "disk" else 1.0
    for n, e, f in zip(ns, errors[1:], floors[1:]):
        rep.add("remainder", n, 0.0, e, f)
    # no fit when every remainder is at rounding level (e.g. the disk)
    ok = bool(rate <= bound) if np.isfinite(rate) else bool(np.max(errors) <= 1e-12)
    rep.summary.update(rate=rate, bound=bound, fitted_degrees=[int(n) for n in used])
    rep.verdicts["rate"] = ok
    _mark(rep, "remainder", ok)
    return rep


def _exp_psiint(cfg, q):
    o = cfg.opts("psiint")
    maps = [build_map(b) for b in o.get("maps", [])] or [cfg.map]
    points = [as_complex(p) for p in o.get("points", [2.0, 3j])]
    fracs = o.get("radius_fractions", [0.0, 0.5, 1.0])
    tol = cfg.tol("psiint", 1e-8)
    rep = DiagnosticsReport("psiint")
    worst = 0.0
    for i, mp in enumerate(maps):
        rho = mp.rho if mp.kind != "disk" else 0.0
        for x in points:
            for f in fracs:
                r = rho + f * (1.0 - rho)
                lhs, rhs = psiint_check(mp, x, r, q)
                name = f"map{i}/x=({x.real:g},{x.imag:g})/r={r:.6g}"
                rep.add(name, 0, q, lhs, rhs)
                worst = max(worst, abs(lhs - rhs))
    ok = worst <= tol
    rep.verdicts["identity"] = bool(ok)
    for r in rep.records:
        r.verdict = "pass" if r.deviation <= tol else "fail"
    rep.summary["max_deviation"] = worst
    return rep


def _exp_l1demo(cfg, q):
    o = cfg.opts("l1demo")
    pts = [as_complex(p) for p in o.get("points", [-1.5, 1.5])]
    disc = point_measure(pts, o.get("masses", [0.5, 0.5]))
    n = int(o.get("n", 1))
    g = o.get("a_grid", {"start": -2.0, "stop": 2.0, "num": 401})
    grid = np.linspace(g["start"], g["stop"], int(g["num"]))
    flat_tol = cfg.tol("flat", 1e-10)
    scan = l1_nonuniqueness_scan(disc, n, grid, flat_tol=flat_tol)
    rep = DiagnosticsReport("l1demo", [n])
    for a, v in zip(scan.a_grid, scan.norms):
        rep.add(f"a={a:.6g}", n, 1.0, v, scan.minimum)
    dist = scan.minimizer_distance
    rep.verdicts["two_minimizers"] = bool(dist >= o.get("min_distance", 0.5))
    if "expect_interval" in o:
        lo, hi = o["expect_interval"]
        inside = (scan.a_grid >= lo - 1e-12) & (scan.a_grid <= hi + 1e-12)
        target = o.get("expect_min", scan.minimum)
        flat_ok = bool(np.all(np.abs(scan.norms[inside] - target) <= flat_tol))
        rep.verdicts["flat"] = flat_ok
    rep.summary.update(
        minimum=scan.minimum,
        flat_interval=list(scan.flat_interval),
        minimizers=[p.full.tolist() for p in scan.minimizers],
        minimizer_distance=dist,
    )
    for r in rep.records:
        r.verdict = "pass" if r.deviation <= flat_tol else ""
    return rep


def _exp_lemniscate(cfg, q):
    o = cfg.opts("lemniscate")
    tau = build_radial(o.get("radial", {"family": "area"}))
    h_block = o.get("h")
    h = None if h_block is None else build_weight(h_block)
    return lemniscate_ratio_sequence(tau, q, cfg.degrees, h=h, n_theta=o.get("n_theta", 512),
                                     n_r=o.get("n_r", 16), tol=cfg.tol("lemniscate", 0.05))


def _exp_moments(cfg, q):
    o = cfg.opts("moments")
    tol = cfg.tol("moments", 0.01)
    rep = DiagnosticsReport("moments", list(cfg.degrees))
    for i, item in enumerate(o.get("taus", [{"radial": {"family": "area"}}])):
        tau = build_radial(item["radial"])
        floor = item.get("log_floor")
        floor = SPARSE_LOG_CONSTANT if floor == "sparse" else floor
        sub = moment_ratio_trace(tau, q, cfg.degrees, tol=tol, log_floor=floor)
        label = item.get("label", tau.name)
        for r in sub.records:
            r.experiment = r.experiment.replace("moment_ratio", f"moments/{label}", 1)
            rep.records.append(r)
        rep.summary[label] = sub.summary
        for k, v in sub.verdicts.items():
            rep.verdicts[f"{label}/{k}"] = v
        if "expect_contains_one" in item:
            rep.verdicts[f"{label}/support"] = sub.summary["contains_one"] == bool(item["expect_contains_one"])
    return rep


def _exp_oracle(cfg, q):
    o = cfg.opts("oracle")
    tol = cfg.tol("oracle", 1e-4)
    rep = DiagnosticsReport("oracle")
    worst = 0.0
    for i, (nodes, weights, n, qq, z) in enumerate(oracle_corpus(o.get("seed", 0), o.get("count", 12))):
        disc = point_measure(nodes, weights)
        sol = solve_monic(disc, n, qq)
        _, ref = brute_force_monic(nodes, weights, n, qq)
        F = sol.norm_q**qq
        dev = abs(F - ref) / ref
        rep.add(f"monic/{i}", n, qq, F, ref, dev)
        lam, _ = lambda_opt(disc, z, n, qq)
        _, ref2 = brute_force_christoffel(nodes, weights, z, n, qq)
        dev2 = abs(lam - ref2) / ref2
        rep.add(f"christoffel/{i}", n, qq, lam, ref2, dev2)
        worst = max(worst, dev, dev2)
    for r in rep.records:
        r.verdict = "pass" if r.deviation <= tol else "fail"
    rep.verdicts["objective"] = bool(worst <= tol)
    rep.summary["max_relative_deviation"] = worst
    return rep


MEASURE_EXPERIMENTS = {
    "norm_ratio": _exp_norm_ratio,
    "exact": _exp_exact,
    "weak_moments": _exp_weak,
    "zeros": _exp_zeros,
    "strong": _exp_strong,
    "christoffel": _exp_christoffel,
}
GLOBAL_EXPERIMENTS = {
    "faber": _exp_faber,
    "psiint": _exp_psiint,
    "l1demo": _exp_l1demo,
    "lemniscate": _exp_lemniscate,
    "moments": _exp_moments,
    "oracle": _exp_oracle,
}
Q_FREE = {"faber", "l1demo", "oracle"}


# -- running -------------------------------------------------------------------


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def report_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.records:
        w.writerow([_fmt(v) for v in r.row()])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def plan(cfg):
    """The list of tasks in a fixed order: experiments, then measures, then q."""
    tasks = []
    multi_q = len(cfg.q) > 1
    for exp in cfg.experiments:
        qs = [None] if exp in Q_FREE else cfg.q
        entries = cfg.measures if exp in MEASURE_EXPERIMENTS else [None]
        for entry in entries:
            for q in qs:
                tag = exp
                if entry is not None and (len(cfg.measures) > 1 or entry.label != "main"):
                    tag += f"-{entry.label}"
                if q is not None and multi_q:
                    tag += f"-q{q:g}"
                tasks.append(Task(tag, exp, entry.label if entry else None, q))
    return tasks


def _execute(cfg, task, discs):
    try:
        if task.experiment in MEASURE_EXPERIMENTS:
            entry = next(e for e in cfg.measures if e.label == task.label)
            return MEASURE_EXPERIMENTS[task.experiment](cfg, entry, task.q, discs[task.label])
        return GLOBAL_EXPERIMENTS[task.experiment](cfg, task.q)
    except (ExtremalLabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        rep = DiagnosticsReport(task.experiment)
        rep.errors.append(f"{type(exc).__name__}: {exc}")
        return rep


def run(cfg, out_dir=None, threads=None):
    """Execute every task, write the CSVs and ``summary.json``; return ``(exit_code, summary)``."""
    out = Path(out_dir or cfg.output or f"runs/{cfg.name}")
    out.mkdir(parents=True, exist_ok=True)
    threads = threads or int(os.environ.get(THREADS_ENV, "1") or 1)
    tasks = plan(cfg)
    discs, disc_errors = {}, {}
    if any(t.experiment in MEASURE_EXPERIMENTS for t in tasks):
        for entry in cfg.measures:
            try:
                discs[entry.label] = discretize(entry.measure, cfg.n_theta, cfg.n_r)
            except (ExtremalLabError, ValueError) as exc:
                disc_errors[entry.label] = f"{type(exc).__name__}: {exc}"

    def work(task):
        if task.label in disc_errors:
            rep = DiagnosticsReport(task.experiment)
            rep.errors.append(disc_errors[task.label])
            return rep
        return _execute(cfg, task, discs)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for task, rep in zip(tasks, pool.map(work, tasks)):
            task.report = rep
            (out / f"{task.tag}.csv").write_text(report_csv(rep), encoding="utf-8")

    verdicts, results = {}, []
    any_error = False
    for t in tasks:
        rep = t.report
        for k, v in rep.verdicts.items():
            verdicts[f"{t.tag}/{k}"] = bool(v)
        any_error |= bool(rep.errors)
        results.append({
            "tag": t.tag, "experiment": t.experiment, "label": t.label, "q": t.q,
            "csv": f"{t.tag}.csv", "verdicts": rep.verdicts, "summary": rep.summary, "errors": rep.errors,
        })
    code = 1 if any_error else (0 if all(verdicts.values()) else 2)
    summary = {
        "name": cfg.name,
        "config": cfg.to_dict(),
        "results": results,
        "verdicts": verdicts,
        "passed": code == 0,
        "exit_code": code,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=False)
        fh.write("\n")
    return code, summary


# -- command line ----------------------------------------------------------------


def _cmd_run(args):
    try:
        cfg = RunConfig.load(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    code, summary = run(cfg, args.out)
    _print_verdicts(summary)
    return code


def _cmd_suites(args):
    for name, desc, _ in list_suites():
        print(f"{name:32s} {desc}")
    return 0


def _cmd_verify(args):
    try:
        cfg = load_suite(args.suite)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    t0 = time.perf_counter()
    code, summary = run(cfg, args.out or f"runs/{args.suite}")
    elapsed = time.perf_counter() - t0
    _print_verdicts(summary)
    budget = cfg.budget_seconds
    note = f" (budget {budget:g} s)" if budget else ""
    print(f"{args.suite}: {'PASS' if code == 0 else 'FAIL'} in {elapsed:.1f} s{note}")
    return code


def _print_verdicts(summary):
    for k, v in summary["verdicts"].items():
        print(f"{'pass' if v else 'FAIL'}  {k}")
    for r in summary["results"]:
        for e in r["errors"]:
            print(f"ERROR {r['tag']}: {e}")


def build_parser():
    p = argparse.ArgumentParser(prog="extremal-lab", description="L^q extremal polynomial experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a JSON configuration")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="output directory (default: config 'output')")
    r.set_defaults(func=_cmd_run)
    s = sub.add_parser("suites", help="list the bundled acceptance suites")
    s.set_defaults(func=_cmd_suites)
    v = sub.add_parser("verify", help="run a bundled suite")
    v.add_argument("suite")
    v.add_argument("--out", default=None)
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
