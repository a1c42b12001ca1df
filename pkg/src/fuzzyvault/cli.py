"""Command line: ``fvault <command> ...``.

Exit status is 0 on success, 1 when a query is rejected or an attack fails,
and 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import harness as h
from .attacks import (ATTACK_BUDGET, brute_force_attack, brute_force_time, correlate,
                      correlation_attack, fa_cost, false_accept_attack)
from .classic import ClassicVault, ClassicVaultParams
from .descriptor import DescriptorVault, load_descriptors
from .errors import FailureToCapture, FuzzyVaultError
from .field import Polynomial
from .grid import DEFAULT_D, GridParams, train_parameters
from .minutiae import MinutiaeTemplate
from .stats import TrialRecord, clopper_pearson, median_trials, point_estimate, rule_of_three

OK, REJECTED, USAGE = 0, 1, 2


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _emit(args, payload, text: str):
    if args.json:
        print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    else:
        print(text)


def _cores(args, fallback=None) -> int:
    if args.cores is not None:
        if args.cores < 1:
            raise ValueError("--cores must be positive")
        return args.cores
    return fallback if fallback is not None else h.default_cores()


def _pct(p) -> str:
    return "n/a" if p is None else f"{100 * p:.2f}%"


# ---------------------------------------------------------------------------
# scheme options

def _add_scheme_args(p, multi_k: bool = False):
    p.add_argument("--scheme", choices=h.SCHEMES, default="classic")
    if multi_k:
        p.add_argument("--k", type=int, nargs="+", help="polynomial length(s); one row each")
    else:
        p.add_argument("--k", type=int, help="polynomial length (default 9 classic, 7 grid)")
    p.add_argument("--n", type=int, default=224, help="vault size (classic/descriptor)")
    p.add_argument("--t-min", type=int, default=18)
    p.add_argument("--t-max", type=int, default=None, help="24 classic, 44 grid")
    p.add_argument("--code", default="BCH(511,19)", help="descriptor code")
    p.add_argument("--lam", type=float, default=29.0, help="grid distance")
    p.add_argument("--s", type=int, default=6, help="angle quantization")
    p.add_argument("--decoder", choices=h.DECODERS, default=None)
    p.add_argument("--D", type=int, default=DEFAULT_D, help="randomized decoder iterations")


def _scheme_config(args, k=None) -> h.SchemeConfig:
    k = k if k is not None else args.k
    if args.scheme == "grid":
        gp = GridParams(args.lam, args.s, t_max=args.t_max or 44, k=k or 7)
        return h.SchemeConfig("grid", grid=gp, decoder=args.decoder, D=args.D,
                              budget=args.budget, seed=args.seed)
    cp = ClassicVaultParams(args.n, args.t_min, args.t_max or 24, k or 9)
    return h.SchemeConfig(args.scheme, classic=cp, code=args.code, decoder=args.decoder,
                          D=args.D, budget=args.budget, seed=args.seed)


def _load_record(path):
    return h.deserialize_record(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args):
    cfg = h.SynthConfig(args.fingers, args.impressions, args.minutiae, args.pos_noise,
                        args.ang_noise, args.drop_rate, args.spurious, args.max_rotation,
                        args.max_shift, descriptor_bits=args.descriptor_bits,
                        descriptor_ber=args.descriptor_ber)
    ds = h.synthesize_dataset(args.out, cfg, args.seed)
    n = sum(len(v) for v in ds.fingers.values())
    _emit(args, {"dataset": str(ds.root), "fingers": len(ds.fingers), "templates": n,
                 "config": asdict(cfg), "seed": args.seed},
          f"wrote {n} templates for {len(ds.fingers)} fingers to {ds.root}")
    return OK


def cmd_enroll(args):
    cfg = _scheme_config(args)
    t = MinutiaeTemplate.load(args.template)
    desc = tuple(load_descriptors(args.descriptors)) if args.descriptors else None
    imp = h.Impression(0, 0, t, descriptors=desc)
    secret = Polynomial.random(cfg.k, np.random.default_rng(h.derive_seed(args.seed, 0)))
    try:
        record = h.enroll_record(cfg, imp, secret, h.derive_seed(args.seed, 1))
    except FailureToCapture as exc:
        print(f"enrollment failed: {exc}", file=sys.stderr)
        return REJECTED
    data = h.serialize_record(record)
    Path(args.out).write_bytes(data)
    payload = {"vault": args.out, "scheme": cfg.scheme, "bytes": len(data),
               "digest": record.digest.hex(), "config": cfg.to_dict()}
    if args.show_secret:
        payload["secret"] = list(secret.coefficients)
    _emit(args, payload, f"enrolled {cfg.scheme} vault ({len(data)} bytes) -> {args.out}\n"
                         f"digest {record.digest.hex()}")
    return OK


def cmd_verify(args):
    record = _load_record(args.vault)
    cfg = h.config_for(record, args.decoder, args.D, args.budget, args.seed)
    q = MinutiaeTemplate.load(args.query)
    desc = load_descriptors(args.descriptors) if args.descriptors else None
    res, secs = h.verify_record(cfg, record, q, desc, args.seed)
    payload = {"accepted": res.success, "attempts": res.attempts, "reason": res.reason,
               "seconds": secs}
    _emit(args, payload, f"{'ACCEPT' if res.success else 'REJECT'} after {res.attempts} "
                         f"interpolations ({secs:.3f} s)" + (f", {res.reason}" if res.reason else ""))
    return OK if res.success else REJECTED


def cmd_eval(args):
    ks = args.k or [None]
    reports = []
    for k in ks:
        cfg = _scheme_config(args, k)
        reports.append(h.run_fvc_protocol(args.dataset, cfg, workers=args.workers))
    rows = []
    for r in reports:
        row = r.row()
        rows.append([row["k"], f"{_pct(r.gar)} ({_pct(r.sub_gar)})", _pct(r.far),
                     "n/a" if row["far_ci"] is None else
                     f"[{_pct(row['far_ci'][0])}, {_pct(row['far_ci'][1])}]",
                     f"{r.gdt:.3f} s", f"{r.idt:.3f} s", _pct(r.ftcr),
                     f"{r.genuine_trials}/{r.impostor_trials}"])
    text = h.format_table(["k", "GAR (sub-GAR)", "FAR", "FAR 95% CI", "GDT", "IDT", "FTCR",
                           "trials gen/imp"], rows)
    _emit(args, [r.to_dict(not args.no_timings) for r in reports], text)
    return OK


def cmd_attack_bf(args):
    record = _load_record(args.vault)
    if isinstance(record, DescriptorVault):
        raise ValueError("brute force needs plain ordinates; descriptor vaults are rated "
                         "with `tables --table 3`")
    p = record.params
    n, t = len(record.points), p.t_max
    rep = brute_force_attack(record, args.seed, args.max_iterations)
    cores = _cores(args)
    payload = rep.to_dict()
    payload["expected_seconds"] = (brute_force_time(n, t, p.k, rep.per_core_rate, cores)
                                   if rep.per_core_rate else None)
    payload["cores"] = cores
    est = payload["expected_seconds"]
    _emit(args, payload,
          f"{'recovered secret' if rep.success else 'no success'} after {rep.iterations} "
          f"iterations ({rep.wall_time:.2f} s, {rep.per_core_rate or 0:.0f}/s per core)\n"
          f"expected time for (n,t,k)=({n},{t},{p.k}) on {cores} core(s): "
          f"{h.format_duration(est) if est else 'n/a'}")
    return OK if rep.success else REJECTED


def cmd_attack_fa(args):
    record = _load_record(args.vault)
    cfg = h.config_for(record, args.decoder, args.D, args.budget, args.seed)
    ds = h.load_dataset(args.dataset)
    queries = [imp for f in ds.finger_ids for imp in ds.impressions(f)]
    if args.max_queries:
        queries = queries[:args.max_queries]

    def authenticate(imp):
        return h.verify_record(cfg, record, imp.template, imp.descriptors, args.seed)[0]

    rep = false_accept_attack(authenticate, queries, record.digest)
    payload = rep.to_dict()
    _emit(args, payload, f"{'false accept' if rep.success else 'no false accept'} after "
                         f"{rep.iterations} queries (IDT {rep.metadata['idt']:.3f} s)")
    return OK if rep.success else REJECTED


def cmd_attack_correlate(args):
    va, vb = _load_record(args.vault_a), _load_record(args.vault_b)
    if type(va) is not type(vb):
        raise ValueError("both records must be of the same scheme")
    if isinstance(va, ClassicVault):
        rep = correlation_attack(va, vb, args.k, args.budget or ATTACK_BUDGET)
        payload = rep.to_dict()
        _emit(args, payload, f"correlation score {rep.metadata['score']}; "
                             f"{'recovered secret' if rep.success else 'no success'} after "
                             f"{rep.iterations} interpolations")
        return OK if rep.success else REJECTED
    # no plain ordinates to decode: report the linkage score only
    res = correlate(va, vb)
    payload = {"score": res.score, "linked": res.decision, "success": False}
    _emit(args, payload, f"correlation score {res.score} (decision {'linked' if res.decision else 'unlinked'}); "
                         f"no decoding attack for {h.scheme_of(va)} records")
    return REJECTED


def cmd_train_grid(args):
    ds = h.load_dataset(args.dataset)
    training = []
    for f in ds.finger_ids:
        imps = ds.impressions(f)
        training.append([h.align_to(i, imps[0]) for i in imps])
    best, rows = train_parameters(training, args.lambdas, args.s, args.t_max, args.k)
    ranked = sorted(rows, key=lambda r: (-r.gar, r.far, -r.k / r.t_max))[:args.top]
    payload = {"best": asdict(best), "r": best.r, "n": best.n,
               "rows": [{**asdict(r), "gar": r.gar, "far": r.far} for r in ranked]}
    text = (f"best: lambda={best.lam:g} s={best.s} t_max={best.t_max} k={best.k} "
            f"(r={best.r}, n={best.n})\n" +
            h.format_table(["lambda", "s", "t_max", "k", "GAR", "FAR"],
                           [[f"{r.lam:g}", r.s, r.t_max, r.k, _pct(r.gar), _pct(r.far)] for r in ranked]))
    _emit(args, payload, text)
    return OK


def cmd_stats_ci(args):
    rec = TrialRecord(args.s, args.n)
    ci = clopper_pearson(rec, args.level)
    payload = {"successes": args.s, "trials": args.n, "point": point_estimate(rec),
               "lower": ci.lower, "upper": ci.upper, "level": args.level}
    _emit(args, payload, f"{args.s}/{args.n} = {_pct(point_estimate(rec))}, "
                         f"{100 * args.level:g}% interval {ci.percent()}")
    return OK


def cmd_stats_rot(args):
    ci = rule_of_three(args.n)
    payload = {"trials": args.n, "lower": ci.lower, "upper": ci.upper}
    _emit(args, payload, f"0/{args.n}: 95% interval {ci.percent()}")
    return OK


def cmd_stats_median(args):
    payload = {"p": args.p, "trials": median_trials(args.p)}
    if args.idt is not None:
        payload["seconds"] = fa_cost(args.p, args.idt, _cores(args))
    text = f"median trials {payload['trials']:.4g}"
    if "seconds" in payload:
        text += f", {h.format_duration(payload['seconds'])}"
    _emit(args, payload, text)
    return OK


def cmd_stats_unlock(args):
    gp = GridParams(args.lam, args.s, t_max=args.t_max, k=min(args.ks))
    idt = dict(zip(args.ks, args.idt)) if args.idt else None
    if idt is not None and len(args.idt) != len(args.ks):
        raise ValueError("--idt needs one value per --ks entry")
    cores = _cores(args)
    st = h.run_unlocking_stats(args.dataset, gp, args.ks, args.D, idt, cores)
    rows = [[r["k"], f"{r['far_single']:.3g}", f"{r['queries']:.3g}",
             h.format_duration(r["seconds"]) if "seconds" in r else "n/a"] for r in st.rows]
    _emit(args, st.to_dict(),
          f"{len(st.stats)} impostor pairs\n" +
          h.format_table(["k", "FAR (1 iteration)", "queries", "time"], rows))
    return OK


def cmd_tables(args):
    # the published timings assume a four-core machine
    cores = _cores(args, None if os.environ.get(h.CORES_ENV) else 4)
    out, text = {}, []
    for tab in args.table:
        if tab == 2:
            rows = h.table2_rows(cores)
            out["2"] = rows
            text.append("brute-force security\n" + h.format_table(
                ["(n,t,k)", "log2 bf", "~", "log2 iterations", "rate/core", "time"],
                [[f"({r['n']},{r['t']},{r['k']})", f"{r['log2_security']:.2f}",
                  f"2^{round(r['log2_security'])}", f"{r['log2_expected_iterations']:.2f}",
                  f"{r['rate']:,}", h.format_duration(r["seconds"])] for r in rows]))
        elif tab == 3:
            rows = h.table3_rows()
            out["3"] = rows
            names = [c for c in rows[0] if c != "k"]
            text.append("descriptor-hardened security, log2 (n=224, t=24)\n" + h.format_table(
                ["k"] + names, [[r["k"]] + [f"{r[c]:.2f}" for c in names] for r in rows]))
        elif tab == 4:
            rows = h.table4_rows(cores)
            out["4"] = rows
            text.append("false-accept attack\n" + h.format_table(
                ["k", "FAR*", "IDT", "95% CI", "time"],
                [[r["k"], f"{r['accepts']}/{r['trials']}", f"{r['idt']} s",
                  f"[{_pct(r['ci'][0])}, {_pct(r['ci'][1])}]",
                  f"{h.format_duration(r['seconds'][0])} - {h.format_duration(r['seconds'][1])}"]
                 for r in rows]))
        elif tab == 5:
            rows = h.table5_rows(cores)
            out["5"] = rows
            text.append("false-accept attack on the randomized decoder\n" + h.format_table(
                ["k", "FAR", "queries", "time"],
                [[r["k"], f"{r['far']:.3g}", f"{r['queries']:.4g}",
                  h.format_duration(r["seconds"])] for r in rows]))
    out["cores"] = cores
    _emit(args, out, "\n\n".join(text))
    return OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cores", type=int, default=None,
                        help=f"cores for time estimates (default ${h.CORES_ENV} or 1)")
    common.add_argument("--budget", type=int, default=None, help="cap on decoder interpolations")

    ap = argparse.ArgumentParser(prog="fvault", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("out")
    p.add_argument("--fingers", type=int, default=100)
    p.add_argument("--impressions", type=int, default=8)
    p.add_argument("--minutiae", type=int, default=40)
    p.add_argument("--pos-noise", type=float, default=1.0)
    p.add_argument("--ang-noise", type=float, default=2.0)
    p.add_argument("--drop-rate", type=float, default=0.05)
    p.add_argument("--spurious", type=int, default=0)
    p.add_argument("--max-rotation", type=float, default=0.0)
    p.add_argument("--max-shift", type=float, default=0.0)
    p.add_argument("--descriptor-bits", type=int, default=0)
    p.add_argument("--descriptor-ber", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("enroll", parents=[common], help="enroll a template into a vault file")
    p.add_argument("template")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--descriptors", help="descriptor file (descriptor scheme)")
    p.add_argument("--show-secret", action="store_true")
    _add_scheme_args(p)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("verify", parents=[common], help="unlock a vault with a query template")
    p.add_argument("vault")
    p.add_argument("query")
    p.add_argument("--descriptors")
    p.add_argument("--decoder", choices=h.DECODERS, default=None)
    p.add_argument("--D", type=int, default=DEFAULT_D)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", parents=[common], help="run the FVC protocol on a dataset")
    p.add_argument("dataset")
    _add_scheme_args(p, multi_k=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timings", action="store_true", help="omit GDT/IDT from JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attack", help="run an attack")
    asub = p.add_subparsers(dest="attack", required=True)
    a = asub.add_parser("bf", parents=[common], help="brute force a classic or grid vault")
    a.add_argument("vault")
    a.add_argument("--max-iterations", type=int, default=1 << 22)
    a.set_defaults(func=cmd_attack_bf)
    a = asub.add_parser("fa", parents=[common], help="false-accept attack with a dataset")
    a.add_argument("vault")
    a.add_argument("dataset")
    a.add_argument("--max-queries", type=int, default=None)
    a.add_argument("--decoder", choices=h.DECODERS, default=None)
    a.add_argument("--D", type=int, default=DEFAULT_D)
    a.set_defaults(func=cmd_attack_fa)
    a = asub.add_parser("correlate", parents=[common], help="cross-match two records")
    a.add_argument("vault_a")
    a.add_argument("vault_b")
    a.add_argument("--k", type=int, default=None)
    a.set_defaults(func=cmd_attack_correlate)

    p = sub.add_parser("train-grid", parents=[common], help="sweep grid vault parameters")
    p.add_argument("dataset")
    p.add_argument("--lambdas", type=float, nargs="+", default=[25.0, 27.0, 29.0, 31.0])
    p.add_argument("--s", type=int, nargs="+", default=[4, 5, 6, 7, 8])
    p.add_argument("--t-max", type=int, nargs="+", default=[36, 40, 44, 48])
    p.add_argument("--k", type=int, nargs="+", default=list(range(7, 13)))
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_train_grid)

    p = sub.add_parser("stats", help="error-rate statistics")
    ssub = p.add_subparsers(dest="stat", required=True)
    s = ssub.add_parser("ci", parents=[common], help="Clopper-Pearson interval")
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--level", type=float, default=0.95)
    s.set_defaults(func=cmd_stats_ci)
    s = ssub.add_parser("rot", parents=[common], help="rule of three")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_stats_rot)
    s = ssub.add_parser("median", parents=[common], help="median trials until success")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--idt", type=float, default=None, help="seconds per trial")
    s.set_defaults(func=cmd_stats_median)
    s = ssub.add_parser("unlock", parents=[common],
                        help="impostor (t, omega) statistics for the grid vault")
    s.add_argument("dataset")
    s.add_argument("--lam", type=float, default=29.0)
    s.add_argument("--s", type=int, default=6)
    s.add_argument("--t-max", type=int, default=44)
    s.add_argument("--ks", type=int, nargs="+", default=list(range(7, 13)))
    s.add_argument("--D", type=int, default=DEFAULT_D)
    s.add_argument("--idt", type=float, nargs="+", help="seconds per D iterations, one per k")
    s.set_defaults(func=cmd_stats_unlock)

    p = sub.add_parser("tables", parents=[common], help="closed-form table columns")
    p.add_argument("--table", type=int, nargs="+", choices=[2, 3, 4, 5], default=[2, 3, 4, 5])
    p.set_defaults(func=cmd_tables)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FuzzyVaultError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
