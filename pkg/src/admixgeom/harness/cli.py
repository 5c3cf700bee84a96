"""Command-line entry point.

    admixgeom simulate|posterior|verify|sweep|minimax --config cfg.json
              [--seed N] [--out DIR] [--threads N] [--debug-recount]

Exit codes: 0 success, 1 usage or configuration error, 2 a literal
inequality suite failed, 3 runtime failure. Environment variables THREADS
and OUT_DIR supply defaults for the corresponding flags. All result files
are bit-identical given (config, seed), independent of --threads;
run_record.json (timestamps) is the documented exception.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import divergence as dvg
from .. import families as fam
from .. import inference as inf
from ..admixture import Dataset, sample_dataset
from ..geometry import hausdorff, sym_diff_volume
from ..seeding import derive_seed
from .config import ConfigError, load_config, model_from_config, prior_from_config
from .registry import RunRecord
from .suites import build_suite

DEFAULT_C_LIST = (0.5, 1.0, 2.0, 4.0)

SWEEP_COLUMNS = ["m", "n", "k", "d", "alpha", "p", "variant", "delta_mn", "C",
                 "prob_exceed", "dM_q10", "dM_q50", "dM_q90", "dH_q50",
                 "loglik_rhat", "seed"]


def _jsonable(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True)
        fh.write("\n")


def _write_jsonl(path, rows):
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(_jsonable(row), sort_keys=True))
            fh.write("\n")


def _run_parallel(tasks, threads):
    """Evaluate thunks, preserving submission order in the result list."""
    if threads <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


def cmd_simulate(cfg, out_dir, seed, threads, debug):
    model = model_from_config(cfg)
    m, n = int(cfg["m"]), int(cfg["n"])
    reps = int(cfg.get("replicates", 1))

    def one(rep):
        cell_seed = derive_seed(seed, m, n, rep)
        ds = sample_dataset(model, m, n, cell_seed)
        path = os.path.join(out_dir, f"dataset_{rep:04d}.json")
        with open(path, "w") as fh:
            fh.write(ds.to_json(seed=cell_seed, model=model))
            fh.write("\n")
        return {"replicate": rep, "seed": cell_seed, "m": m, "n": n,
                "path": os.path.basename(path)}

    rows = _run_parallel([lambda r=r: one(r) for r in range(reps)], threads)
    _write_json(os.path.join(out_dir, "manifest.json"),
                {"base_seed": seed, "replicates": rows})
    return 0, [f"dataset_{r:04d}.json" for r in range(reps)] + ["manifest.json"]


def cmd_verify(cfg, out_dir, seed, threads, debug):
    vc = cfg.get("verify", {})
    suites = vc.get("suites", list(dvg.BOUND_IDS))
    count = int(vc.get("instances", 50))
    budget = vc.get("budget")
    tolerances = cfg.get("tolerances", {})

    jobs = []
    for bound_id in suites:
        for inst in build_suite(bound_id, count, seed, budget, tolerances):
            jobs.append((bound_id, inst))
    reports = _run_parallel(
        [lambda b=b, i=i: dvg.bound_check(b, i, budget) for b, i in jobs], threads)

    _write_jsonl(os.path.join(out_dir, "bounds.jsonl"),
                 [r.to_json_obj() for r in reports])
    summary = {}
    for r in reports:
        agg = summary.setdefault(r.bound_id, {"instances": 0, "passes": 0})
        agg["instances"] += 1
        agg["passes"] += int(r.passed)
    with open(os.path.join(out_dir, "verify_summary.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["bound_id", "instances", "passes", "pass_rate"])
        for bound_id in sorted(summary):
            agg = summary[bound_id]
            wr.writerow([bound_id, agg["instances"], agg["passes"],
                         agg["passes"] / agg["instances"]])
    literal_fail = any(not r.passed and r.bound_id in dvg.LITERAL_BOUND_IDS
                       for r in reports)
    return (2 if literal_fail else 0), ["bounds.jsonl", "verify_summary.csv"]


def _sweep_cell(model, prior, G0, m, n, rep, seed, sw, debug=False):
    cell_seed = derive_seed(seed, m, n, rep)
    ds = sample_dataset(model, m, n, cell_seed)
    chain = inf.posterior_sample(
        ds, prior, iters=int(sw.get("iters", 4000)),
        burnin=sw.get("burnin"), thin=sw.get("thin"),
        chains=int(sw.get("chains", 2)),
        seed=derive_seed(cell_seed, "posterior"), G0=G0,
        debug_recount=debug)
    alpha = float(sw.get("alpha", 0.0))
    variant = sw.get("variant", "overfitted")
    rate = inf.make_rate_spec(m, n, model.k, model.d, alpha, variant=variant)
    rows = []
    for C in sw.get("C_list", DEFAULT_C_LIST):
        st = inf.contraction_stat(chain, G0, float(C), rate)
        rows.append({"m": m, "n": n, "k": model.k, "d": model.d, "alpha": alpha,
                     "p": rate.p, "variant": variant, "delta_mn": rate.delta_mn,
                     "C": float(C), "prob_exceed": st.prob_exceed,
                     "dM_q10": st.dM_quantiles["q10"], "dM_q50": st.dM_quantiles["q50"],
                     "dM_q90": st.dM_quantiles["q90"], "dH_q50": st.dH_quantiles["q50"],
                     "loglik_rhat": chain.loglik_rhat, "seed": cell_seed})
    return rows


def cmd_sweep(cfg, out_dir, seed, threads, debug):
    model = model_from_config(cfg)
    prior = prior_from_config(cfg, model)
    G0 = model.polytope()
    sw = cfg.get("sweep", {})
    reps = int(sw.get("replicates", 5))
    grid = [(int(m), int(n)) for m, n in cfg["grid"]]

    def guarded(m, n, rep):
        # a failed grid cell is recorded and the sweep continues
        try:
            return _sweep_cell(model, prior, G0, m, n, rep, seed, sw, debug), None
        except Exception as exc:
            return [], {"m": m, "n": n, "replicate": rep,
                        "error": f"{type(exc).__name__}: {exc}"}

    cells = [(m, n, rep) for (m, n) in grid for rep in range(reps)]
    results = _run_parallel(
        [lambda c=c: guarded(*c) for c in cells], threads)
    failures = [fail for _, fail in results if fail is not None]
    all_rows = [row for cell_rows, _ in results for row in cell_rows]
    with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        wr.writeheader()
        for row in all_rows:
            wr.writerow(row)

    per_cell = {}
    for row in all_rows:
        per_cell.setdefault((row["m"], row["n"]), []).append(row)
    cells_summary = []
    for (m, n) in grid:
        rows = per_cell.get((m, n), [])
        if not rows:
            continue
        at_c1 = [r["prob_exceed"] for r in rows if r["C"] == 1.0]
        cells_summary.append({"m": m, "n": n, "delta_mn": rows[0]["delta_mn"],
                              "dM_q50_mean": float(np.mean([r["dM_q50"] for r in rows])),
                              "prob_exceed_C1_mean": float(np.mean(at_c1)) if at_c1
                              else float("nan")})
    slope = float("nan")
    if len(cells_summary) >= 2:
        lx = np.log([c["delta_mn"] for c in cells_summary])
        ly = np.log([max(c["dM_q50_mean"], 1e-300) for c in cells_summary])
        slope = float(np.polyfit(lx, ly, 1)[0])
    _write_json(os.path.join(out_dir, "sweep_summary.json"),
                {"cells": cells_summary, "log_dM_vs_log_delta_slope": slope,
                 "failed_cells": failures})
    return 0, ["sweep.csv", "sweep_summary.json"]


def cmd_minimax(cfg, out_dir, seed, threads, debug):
    mm = cfg["minimax"]
    k, d = int(mm["k"]), int(mm["d"])
    eps_list = [float(e) for e in mm["eps_list"]]
    n_list = [int(n) for n in mm.get("n_list", [2, 4, 8])]
    rows = []
    for i, eps in enumerate(eps_list):
        pair = fam.minimax_construction(k, d, eps)
        dh = hausdorff(pair.G0, pair.G0_chop)
        if pair.G0.affine_dim == 2:
            vol = sym_diff_volume(pair.G0, pair.G0_chop, "exact2d")
        else:
            vol = sym_diff_volume(pair.G0, pair.G0_chop, "montecarlo",
                                  samples=200_000, rng=derive_seed(seed, "vol", i))
        Vs = {str(n): dvg.divergence_exact_uniform(pair.G0, pair.G0_chop, n, "V").value
              for n in n_list}
        rows.append({"eps": eps, "case": pair.case, "q": pair.q,
                     "vertices_G0": len(pair.G0.extr_idx),
                     "vertices_chop": len(pair.G0_chop.extr_idx),
                     "dH": dh, "vol": vol.value, "vol_stderr": vol.stderr,
                     "V_by_n": Vs})
    slope = float("nan")
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log([r["eps"] for r in rows]),
                                 np.log([max(r["vol"], 1e-300) for r in rows]), 1)[0])
    _write_json(os.path.join(out_dir, "minimax.json"),
                {"k": k, "d": d, "q": rows[0]["q"], "rows": rows,
                 "vol_vs_eps_slope": slope})
    return 0, ["minimax.json"]


def cmd_posterior(cfg, out_dir, seed, threads, debug):
    model = model_from_config(cfg) if "model" in cfg else None
    prior = prior_from_config(cfg, model)
    if "dataset_path" in cfg:
        with open(cfg["dataset_path"]) as fh:
            ds = Dataset.from_json(fh.read())
    elif model is not None:
        ds = sample_dataset(model, int(cfg["m"]), int(cfg["n"]),
                            derive_seed(seed, "data"))
    else:
        raise ConfigError("posterior runs need a dataset_path or a model with m, n")
    G0 = model.polytope() if model is not None else None
    sw = cfg.get("sweep", {})
    chain = inf.posterior_sample(ds, prior, iters=int(sw.get("iters", 2000)),
                                 burnin=sw.get("burnin"), thin=sw.get("thin"),
                                 chains=int(sw.get("chains", 2)),
                                 seed=derive_seed(seed, "posterior"),
                                 G0=G0, debug_recount=debug)
    _write_jsonl(os.path.join(out_dir, "chain.jsonl"),
                 [{"chain": s.chain, "iter": s.iteration, "loglik": s.loglik,
                   "dM": s.dM, "dH": s.dH,
                   "theta": [list(map(float, r)) for r in s.theta]}
                  for s in chain.samples])
    _write_json(os.path.join(out_dir, "chain_summary.json"),
                {"loglik_rhat": chain.loglik_rhat, "rhat_flag": chain.rhat_flag,
                 "retained": len(chain.samples), "thin": chain.thin,
                 "burnin": chain.burnin, "floor_fallbacks": chain.floor_fallbacks})
    return 0, ["chain.jsonl", "chain_summary.json"]


_COMMANDS = {"simulate": cmd_simulate, "posterior": cmd_posterior,
             "verify": cmd_verify, "sweep": cmd_sweep, "minimax": cmd_minimax}


class _Parser(argparse.ArgumentParser):
    def error(self, message):          # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def main(argv=None) -> int:
    parser = _Parser(prog="admixgeom", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--debug-recount", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if cfg["experiment"] != args.command:
        print(f"config error: config is for {cfg['experiment']!r}, "
              f"command is {args.command!r}", file=sys.stderr)
        return 1

    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out_dir = args.out or os.environ.get("OUT_DIR") or cfg.get("out") or "out"
    threads = args.threads if args.threads is not None else \
        int(os.environ.get("THREADS", "1"))
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        print(f"runtime failure: cannot create output dir: {exc}", file=sys.stderr)
        return 3

    record = RunRecord(cfg, seed)
    try:
        code, outputs = _COMMANDS[args.command](cfg, out_dir, seed, threads,
                                                args.debug_recount)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:           # runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    record.outputs = outputs
    record.close()
    record.write(out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
