"""Command line interface: ``invopt {solve|cutplane|verify|batch}``.

Exit codes: 0 success, 1 some batch instances failed, 2 schema or input
error, 3 infeasible or fractional observation, 4 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import cutting_plane, inverse_mip
from .errors import InvOptError, ObservationError, SchemaError, SizeLimitError, SolverError
from .inverse_mip import (compute_metrics, default_tau, default_weights, evaluate_forward,
                          relative_gap, scale_cost)
from .io import (FORMAT_VERSION, InstanceFile, dumps_record, dumps_report, load_cost,
                 load_instance, to_jsonable)
from .milp import solve_milp
from .oracle import certify_inverse
from .problem import forward_model

EXIT_OK = 0
EXIT_BATCH_FAILED = 1
EXIT_SCHEMA = 2
EXIT_OBSERVATION = 3
EXIT_SOLVER = 4

MODELS = ("tolerance", "biobj", "bigm", "concise")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, SchemaError):
        return EXIT_SCHEMA
    if isinstance(exc, ObservationError):
        return EXIT_OBSERVATION
    return EXIT_SOLVER


# ---------------------------------------------------------------- pipelines

def parse_weights(spec, obs):
    """``default`` -> max(x_hat_i, 2); ``unit`` -> ones; list or comma string -> as given."""
    if spec is None or spec == "default":
        return default_weights(obs)
    n_i = int(np.sum(obs.x_hat > 1e-9))
    if spec == "unit":
        return np.ones(n_i)
    if isinstance(spec, str):
        try:
            spec = [float(v) for v in spec.split(",") if v.strip()]
        except ValueError:
            raise SchemaError(f"cannot parse weights {spec!r}") from None
    w = np.asarray(spec, dtype=float)
    if w.shape != (n_i,):
        raise SchemaError(f"weights need {n_i} entries (one per positive x_hat entry)")
    return w


def reference_objective(p, c_ring, time_cap, node_cap=None) -> float:
    """Best objective under ``c_ring`` from a capped forward solve (for the tau ladder)."""
    res = solve_milp(forward_model(p, c_ring), p.integrality, time_limit=time_cap,
                     node_limit=node_cap)
    if math.isfinite(res.upper_bound):
        return res.upper_bound
    if math.isfinite(res.lower_bound):
        return res.lower_bound
    return 0.0


def _oracle_block(p, obs, c_hat):
    try:
        cert = certify_inverse(p, obs, c_hat[:p.structural_count])
    except SizeLimitError:
        return None
    own = float(c_hat @ obs.x_hat)
    rg = relative_gap(own, float(cert.value))
    return {"optimal": cert.optimal, "gap": float(cert.gap), "value": float(cert.value),
            "rgap": rg, "optimal_at_e2": rg <= 1e-2, "optimal_at_e5": rg <= 1e-5}


def _metrics_block(m):
    if m is None:
        return None
    return {"rgap": m.rgap, "rnorm_norm_of_diff": m.rnorm_norm_of_diff,
            "rnorm_diff_of_norms": m.rnorm_diff_of_norms, "optimal_at_e2": m.optimal_at_e2,
            "optimal_at_e5": m.optimal_at_e5, "upper_bound": m.upper_bound,
            "lower_bound": m.lower_bound, "objective_at_x_hat": m.objective_at_x_hat}


def solution_report(inst: InstanceFile, p, obs, sol, *, timing=True) -> dict:
    n_s = p.structural_count
    cert = sol.lp_certificate
    rep = {
        "format": FORMAT_VERSION,
        "instance": inst.name,
        "group": inst.group,
        "model_kind": sol.model_kind,
        "c_hat": sol.c_hat[:n_s],
        "l1_deviation": sol.l1_deviation,
        "eps_total": sol.eps_total,
        "master_objective": sol.master_objective,
        "tau": sol.tau,
        "weights": sol.weights,
        "big_m": sol.big_m,
        "metrics": _metrics_block(sol.metrics),
        "lp_certificate": None if cert is None else {
            "z_lp": cert.z_lp, "x_lp": cert.x_lp[:n_s],
            "identity_residual": cert.identity_residual,
            "primal_residual": cert.primal_residual,
            "duality_residual": cert.duality_residual},
    }
    if "seed" in inst.config:
        rep["seed"] = inst.config["seed"]
    if timing:
        rep["timing"] = {"cpu_seconds": sol.cpu_seconds}
    return rep


def _verify_identities(sol):
    """Re-check the reported identities; raise rather than emit a wrong report."""
    cert = sol.lp_certificate
    if cert is None:
        raise SolverError("missing LP certificate")
    if cert.identity_residual > inverse_mip.IDENTITY_TOL * (1.0 + abs(cert.z_lp)):
        raise SolverError("gap identity failed re-verification")
    if sol.tau is not None and sol.eps_total > sol.tau * sol.l1_deviation + 1e-9:
        raise SolverError("tolerance constraint failed re-verification")
    if np.max(np.abs(sol.c_hat - (sol.c_ring + sol.f - sol.g)), initial=0.0) > 1e-9:
        raise SolverError("c_hat != c_ring + f - g")


def run_solve(inst: InstanceFile, model="tolerance", *, tau=None, weights=None, scale=False,
              big_m=None, time_cap=30.0, node_cap=None, timing=True, certify=False) -> dict:
    cfg = inst.config
    model = cfg.get("model", model) if model is None else model
    tau = cfg.get("tau") if tau is None else tau
    weights = cfg.get("weights") if weights is None else weights
    big_m = cfg.get("big_m") if big_m is None else big_m
    time_cap = cfg.get("forward_time_cap", time_cap)
    node_cap = cfg.get("forward_node_cap", node_cap)
    p, obs, c_ring = inst.build()
    common = dict(time_limit=time_cap, node_limit=node_cap)
    if model == "tolerance":
        if tau is None:
            tau = default_tau(c_ring, reference_objective(p, c_ring, time_cap, node_cap))
        sol = inverse_mip.solve_tolerance_model(p, obs, c_ring, float(tau), **common)
    elif model == "biobj":
        sol = inverse_mip.solve_biobjective_model(p, obs, c_ring, parse_weights(weights, obs),
                                                  **common)
    elif model == "bigm":
        w = None if weights is None else parse_weights(weights, obs)
        sol = inverse_mip.solve_bigm_model(p, obs, c_ring, M=big_m, weights=w, **common)
    elif model == "concise":
        sol = inverse_mip.solve_concise_model(p, obs, c_ring, **common)
    else:
        raise SchemaError(f"unknown model {model!r}")
    _verify_identities(sol)
    rep = solution_report(inst, p, obs, sol, timing=timing)
    if scale:
        sc = scale_cost(sol.c_hat[:p.structural_count], c_ring)
        rep["scaled"] = {"factor": sc.factor, "c_hat": sc.c_hat,
                         "l1_deviation": sc.l1_deviation}
    if certify:
        rep["oracle"] = _oracle_block(p, obs, sol.c_hat)
    return rep


def run_cutplane(inst: InstanceFile, cfg: cutting_plane.CutPlaneConfig, *, log_sink=None,
                 timing=True) -> dict:
    p, obs, c_ring = inst.build()

    def emit(rec):
        if log_sink is not None:
            d = rec.as_dict()
            if not timing:
                d.pop("cpu")
            log_sink.write(dumps_record(d) + "\n")
            log_sink.flush()

    res = cutting_plane.run(p, obs, c_ring, cfg, on_iteration=emit)
    _verify_identities_cut(res.solution)
    rep = solution_report(inst, p, obs, res.solution, timing=timing)
    rep["status"] = res.status
    rep["iterations"] = res.iterations
    rep["cuts"] = len(res.state.cut_pool)
    log = [r.as_dict() for r in res.state.log]
    if not timing:
        for d in log:
            d.pop("cpu")
    rep["log"] = log
    return rep


def _verify_identities_cut(sol):
    cert = sol.lp_certificate
    if cert is None or cert.identity_residual > inverse_mip.IDENTITY_TOL * (1 + abs(cert.z_lp)):
        raise SolverError("gap identity failed re-verification")


def run_verify(inst: InstanceFile, c_hat, *, time_cap=30.0, node_cap=None) -> dict:
    p, obs, c_ring = inst.build()
    c_full = p.full_cost(c_hat)
    fwd = evaluate_forward(p, obs, c_full, node_limit=node_cap, time_limit=time_cap)
    m = compute_metrics(c_full, p.full_cost(c_ring), obs.x_hat,
                        (fwd.upper_bound, fwd.lower_bound),
                        structural_count=p.structural_count)
    return {"format": FORMAT_VERSION, "instance": inst.name,
            "c_hat": c_full[:p.structural_count], "forward_status": fwd.status,
            "objective_at_x_hat": m.objective_at_x_hat, "upper_bound": m.upper_bound,
            "lower_bound": m.lower_bound, "rgap": m.rgap, "optimal_at_e2": m.optimal_at_e2,
            "optimal_at_e5": m.optimal_at_e5, "l1_deviation": m.l1_deviation,
            "rnorm_norm_of_diff": m.rnorm_norm_of_diff,
            "rnorm_diff_of_norms": m.rnorm_diff_of_norms,
            "oracle": _oracle_block(p, obs, c_full)}


# ---------------------------------------------------------------- batch

def _batch_one(args):
    path, options = args
    try:
        inst = load_instance(path)
        rep = run_solve(inst, **options)
        return {"file": Path(path).name, "ok": True, "report": to_jsonable(rep)}
    except InvOptError as exc:
        return {"file": Path(path).name, "ok": False, "error": f"{type(exc).__name__}: {exc}"}


def _stats(values):
    vals = [v for v in values if v is not None and math.isfinite(v)]
    if not vals:
        return (None, None, None)
    return (min(vals), sum(vals) / len(vals), max(vals))


def aggregate(results) -> list:
    """Per-group summary rows recomputed from the individual reports."""
    groups = {}
    for r in results:
        if not r["ok"]:
            continue
        rep = r["report"]
        groups.setdefault(rep.get("group") or "default", []).append(rep)
    rows = []
    for g in sorted(groups):
        reps = groups[g]
        met = [rep["metrics"] for rep in reps]
        orc = [rep.get("oracle") for rep in reps]
        row = {"group": g, "count": len(reps)}
        for key, vals in (("rgap", [m["rgap"] for m in met]),
                          ("rnorm", [m["rnorm_norm_of_diff"] for m in met]),
                          ("cpu", [rep.get("timing", {}).get("cpu_seconds") for rep in reps])):
            lo, avg, hi = _stats(vals)
            row[f"{key}_min"], row[f"{key}_avg"], row[f"{key}_max"] = lo, avg, hi
        row["optimal_e2"] = sum(bool(m["optimal_at_e2"]) for m in met)
        row["optimal_e5"] = sum(bool(m["optimal_at_e5"]) for m in met)
        certified = [o for o in orc if o is not None]
        row["oracle_checked"] = len(certified)
        row["oracle_e2"] = sum(bool(o["optimal_at_e2"]) for o in certified)
        rows.append(row)
    return rows


SUMMARY_COLUMNS = ("group", "count", "rgap_min", "rgap_avg", "rgap_max", "rnorm_min",
                   "rnorm_avg", "rnorm_max", "cpu_min", "cpu_avg", "cpu_max", "optimal_e2",
                   "optimal_e5", "oracle_checked", "oracle_e2")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def summary_csv(rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def summary_markdown(rows) -> str:
    lines = ["| " + " | ".join(SUMMARY_COLUMNS) + " |",
             "|" + "|".join("---" for _ in SUMMARY_COLUMNS) + "|"]
    for r in rows:
        lines.append("| " + " | ".join(_fmt(r[c]) for c in SUMMARY_COLUMNS) + " |")
    return "\n".join(lines) + "\n"


def run_batch(directory, options, parallel=1):
    files = sorted(Path(directory).glob("*.json"))
    jobs = [(str(f), options) for f in files]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            results = list(ex.map(_batch_one, jobs))
    else:
        results = [_batch_one(j) for j in jobs]
    return results


# ---------------------------------------------------------------- argparse

def _add_forward_caps(sp):
    sp.add_argument("--time-cap", type=float, default=30.0,
                    help="time cap (s) for each forward MILP solve")
    sp.add_argument("--node-cap", type=int, default=None,
                    help="node cap for each forward MILP solve")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="invopt", description="Inverse mixed-integer optimization.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve one inverse model")
    sp.add_argument("instance")
    sp.add_argument("--model", choices=MODELS, default=None)
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--weights", default=None, help="default | unit | comma-separated list")
    sp.add_argument("--big-m", type=float, default=None)
    sp.add_argument("--scale", action="store_true", help="also report the best rescaled cost")
    sp.add_argument("--certify", action="store_true", help="add an enumeration-oracle check")
    sp.add_argument("--no-timing", action="store_true")
    sp.add_argument("--out", default=None)
    _add_forward_caps(sp)

    sp = sub.add_parser("cutplane", help="cutting-plane refinement")
    sp.add_argument("instance")
    sp.add_argument("--max-iters", type=int, default=None)
    sp.add_argument("--tau-init", type=float, default=None)
    sp.add_argument("--total-time-cap", type=float, default=None)
    sp.add_argument("--abs-gap", type=float, default=None)
    sp.add_argument("--log", default=None, help="JSONL iteration log path ('-' for stderr)")
    sp.add_argument("--no-timing", action="store_true")
    sp.add_argument("--out", default=None)
    _add_forward_caps(sp)

    sp = sub.add_parser("verify", help="check a cost against the observation")
    sp.add_argument("instance")
    sp.add_argument("--cost", required=True, help="JSON array or report with c_hat")
    sp.add_argument("--out", default=None)
    _add_forward_caps(sp)

    sp = sub.add_parser("batch", help="solve every *.json instance in a directory")
    sp.add_argument("directory")
    sp.add_argument("--model", choices=MODELS, default="tolerance")
    sp.add_argument("--parallel", type=int, default=1)
    sp.add_argument("--csv", default=None)
    sp.add_argument("--md", default=None)
    sp.add_argument("--json", default=None, help="write individual reports and summary")
    sp.add_argument("--no-certify", action="store_true")
    sp.add_argument("--no-timing", action="store_true")
    _add_forward_caps(sp)
    return ap


def _write(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cutplane_config(args, inst):
    cfg = inst.config
    kw = {"forward_time_cap": cfg.get("forward_time_cap", args.time_cap),
          "forward_node_cap": cfg.get("forward_node_cap", args.node_cap)}
    for key, val, name in ((args.max_iters, cfg.get("max_iters"), "max_iters"),
                           (args.total_time_cap, cfg.get("total_time_cap"), "total_time_cap"),
                           (args.tau_init, cfg.get("tau"), "tau_init"),
                           (args.abs_gap, None, "abs_gap_stop")):
        chosen = key if key is not None else val
        if chosen is not None:
            kw[name] = chosen
    try:
        return cutting_plane.CutPlaneConfig(**kw)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            inst = load_instance(args.instance)
            rep = run_solve(inst, args.model, tau=args.tau, weights=args.weights,
                            scale=args.scale, big_m=args.big_m, time_cap=args.time_cap,
                            node_cap=args.node_cap, timing=not args.no_timing,
                            certify=args.certify)
            _write(dumps_report(rep) + "\n", args.out)
        elif args.command == "cutplane":
            inst = load_instance(args.instance)
            cfg = _cutplane_config(args, inst)
            sink, close = None, False
            if args.log == "-":
                sink = sys.stderr
            elif args.log:
                sink, close = open(args.log, "w"), True
            try:
                rep = run_cutplane(inst, cfg, log_sink=sink, timing=not args.no_timing)
            finally:
                if close:
                    sink.close()
            _write(dumps_report(rep) + "\n", args.out)
        elif args.command == "verify":
            inst = load_instance(args.instance)
            rep = run_verify(inst, load_cost(args.cost), time_cap=args.time_cap,
                             node_cap=args.node_cap)
            _write(dumps_report(rep) + "\n", args.out)
        else:
            return _main_batch(args)
    except InvOptError as exc:
        print(f"invopt: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    return EXIT_OK


def _main_batch(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir() or not any(directory.glob("*.json")):
        print(f"invopt: error: no *.json instances in {directory}", file=sys.stderr)
        return EXIT_SCHEMA
    options = {"model": args.model, "time_cap": args.time_cap, "node_cap": args.node_cap,
               "timing": not args.no_timing, "certify": not args.no_certify}
    results = run_batch(directory, options, max(1, args.parallel))
    rows = aggregate(results)
    md = summary_markdown(rows)
    sys.stdout.write(md)
    if args.md:
        Path(args.md).write_text(md)
    if args.csv:
        Path(args.csv).write_text(summary_csv(rows))
    if args.json:
        Path(args.json).write_text(dumps_report({"format": FORMAT_VERSION, "model": args.model,
                                                 "results": results, "summary": rows}) + "\n")
    failed = [r for r in results if not r["ok"]]
    for r in failed:
        print(f"invopt: failed: {r['file']}: {r['error']}", file=sys.stderr)
    return EXIT_BATCH_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
