"""Command-line entry point: exponent queries, energies, sweeps, corpus runs and the optimizer."""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from typing import Optional, Sequence

from .exponents import (ParamSet, ParameterError, as_number, classify_regime, exponent_bundle,
                        quotient_exponents, schedule_params)
from .experiments import (SCHEMA, CorpusSpec, SweepConfig, Verdict, dumps, run_boundedness,
                          run_bump_law, run_multibump, run_refined_sobolev, run_schedule,
                          run_weighted_checks)
from .functionals import evaluate
from .optimize import AscentConfig, default_grid, gradient_check, multi_start
from .radial import BumpParams, RadialGridFunction, superposition

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH = 0, 2, 3

SWEEP_COLUMNS = ("axis_value", "lp_p", "seminorm_sq", "coulomb", "quotient", "quotient_p")
CORPUS_COLUMNS = ("index", "value")


def _threads(value: Optional[int]) -> int:
    if value is not None:
        n = value
    else:
        env = os.environ.get("CSL_THREADS", "1")
        try:
            n = int(env)
        except ValueError as e:
            raise ParameterError(f"CSL_THREADS must be an integer, got {env!r}") from e
    if n < 1:
        raise ParameterError("thread count must be >= 1")
    return n


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from e
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _params(args, need_p: bool = False) -> ParamSet:
    params = ParamSet(args.d, as_number(args.s), as_number(args.alpha), as_number(args.q),
                      None if args.p is None else as_number(args.p))
    if need_p and params.p is None:
        raise ParameterError("--p is required for this command")
    return params


def _config(args) -> dict:
    raw = {k: v for k, v in vars(args).items() if k != "handler"}
    raw["schema"] = SCHEMA
    return raw


def _emit(args, text: str):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(args, payload: dict):
    payload = dict(payload)
    payload["config"] = _config(args)
    _emit(args, dumps(payload) + "\n")


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _sweep_out(args, result) -> int:
    if args.format == "csv":
        _emit(args, result.to_csv())
    else:
        _json(args, result.to_dict())
    return EXIT_MISMATCH if result.verdict is Verdict.MISMATCH else EXIT_OK


def _corpus_out(args, reports: dict) -> int:
    if args.format == "csv":
        rows = [(name, i, repr(v)) for name, rep in reports.items()
                for i, v in enumerate(rep.values)]
        _emit(args, _csv(rows, ("check",) + CORPUS_COLUMNS))
    else:
        body = {k: v.to_dict() for k, v in reports.items()}
        _json(args, {"schema": SCHEMA, "kind": "corpus_set", "reports": body,
                     "bounded": all(r.bounded for r in reports.values())})
    return EXIT_OK if all(r.bounded for r in reports.values()) else EXIT_MISMATCH


def _sweep_config(args) -> SweepConfig:
    return SweepConfig(tol=args.tol, abs_tol=args.abs_tol, nodes_across=args.nodes_across,
                       threads=_threads(args.threads))


def _corpus(args) -> CorpusSpec:
    if args.corpus_size < 1:
        raise ParameterError("--corpus-size must be >= 1")
    return CorpusSpec(size=args.corpus_size, seed=args.seed)


# ------------------------------------------------------------ commands

def cmd_exponents(args) -> int:
    params = _params(args)
    bundle = exponent_bundle(params)
    rep = classify_regime(params)
    _json(args, {"schema": SCHEMA, "kind": "exponents", "bundle": bundle.to_dict(),
                 "radial_improves": rep.radial_improves, "note": rep.note})
    return EXIT_OK


def cmd_energy(args) -> int:
    params = _params(args, need_p=True)
    if args.profile == "file":
        if not args.input:
            raise ParameterError("--profile file needs --input")
        with open(args.input, encoding="utf-8") as fh:
            f = RadialGridFunction.from_text(fh.read())
        if f.d != params.d:
            raise ParameterError(f"profile dimension {f.d} differs from --d {params.d}")
    else:
        f = superposition([BumpParams(args.lam, args.R, args.S, args.k)], params.d,
                          args.nodes_across)
    exps = quotient_exponents(params) if not params.is_critical_q else None
    if exps is None:
        raise ParameterError("CriticalQ: use `bounded --refined-eps` for the refined quotient")
    rep = evaluate(f, params, exps, threads=_threads(args.threads))
    body = rep.to_dict()
    body.update({"schema": SCHEMA, "kind": "energy", "lp_p": rep.lp_power,
                 "exponents": {"beta": float(exps[0]), "gamma": float(exps[1])}})
    _json(args, body)
    return EXIT_OK


def _axis_values(text: Optional[str]):
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ParameterError(f"--axis-values must be comma separated numbers: {text!r}") from e


def cmd_sweep(args) -> int:
    cfg = _sweep_config(args)
    if args.bump_law:
        params = _params(args, need_p=True)
        values = _axis_values(args.axis_values) or {
            "lambda": [2.0 ** k for k in range(-4, 5)],
            "R": [2.0 * 2 ** k for k in range(9)],
            "S": [2.0 ** -k for k in range(1, 10)]}[args.bump_law]
        result = run_bump_law(params, args.bump_law, values, config=cfg)
    else:
        if not args.schedule:
            raise ParameterError("sweep needs --schedule or --bump-law")
        params = _params(args, need_p=True)
        sched = schedule_params(params, args.schedule, fixed_R=args.fixed_R)
        result = run_schedule(params, sched, axis_values=_axis_values(args.axis_values),
                              config=cfg)
    return _sweep_out(args, result)


def cmd_multibump(args) -> int:
    params = _params(args)
    if args.m_max < 2:
        raise ParameterError("--m-max must be >= 2")
    result = run_multibump(params, R=args.R, m_values=range(1, args.m_max + 1), p=(
        None if args.p is None else as_number(args.p)), rescaled=args.rescaled,
        kind=args.schedule, config=_sweep_config(args))
    return _sweep_out(args, result)


def cmd_bounded(args) -> int:
    params = _params(args)
    threads = _threads(args.threads)
    corpus = _corpus(args)
    if args.refined_eps is not None:
        rep = run_refined_sobolev(params, as_number(args.refined_eps), corpus, args.threshold,
                                  threads)
    else:
        if params.p is None:
            raise ParameterError("--p is required unless --refined-eps is given")
        rep = run_boundedness(params, corpus=corpus, threshold=args.threshold, threads=threads)
    return _corpus_out(args, {rep.label: rep})


def cmd_weighted(args) -> int:
    params = _params(args)
    reps = run_weighted_checks(params, _corpus(args), threshold=args.threshold,
                               threads=_threads(args.threads))
    return _corpus_out(args, reps)


def cmd_optimize(args) -> int:
    params = _params(args)
    threads = _threads(args.threads)
    eps = None if args.epsilon is None else as_number(args.epsilon)
    cfg = AscentConfig(tol=args.tol, max_iter=args.max_iter, epsilon=eps, threads=threads)
    grid = default_grid(params.d, n=args.n_nodes, r_min=args.r_min, r_max=args.r_max)
    states = multi_start(params, grid, starts=args.starts, seed=args.seed, config=cfg,
                         include_default=True)
    best = max(states, key=lambda st: st.Q)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(best.trace_lines())
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            fh.write(best.f.to_text())
    qs = [st.Q for st in states]
    body = {"schema": SCHEMA, "kind": "optimizer", "best": best.to_dict(),
            "starts": [st.to_dict() for st in states],
            "start_spread": (max(qs) - min(qs)) / max(qs)}
    if args.check_gradients:
        body["gradient_check"] = gradient_check(best.params, best.profile, threads=threads)
    _json(args, body)
    return EXIT_OK


# ------------------------------------------------------------ parser

def _add_params(sp, p_required: bool = False):
    g = sp.add_argument_group("parameters")
    g.add_argument("--d", type=int, default=3, help="dimension")
    g.add_argument("--s", default="1", help="smoothness order (rational strings are exact)")
    g.add_argument("--alpha", default="2", help="Riesz order, 0 < alpha < d")
    g.add_argument("--q", default="2", help="Coulomb power")
    g.add_argument("--p", default=None, required=p_required, help="Lebesgue exponent")


def _add_common(sp, formats=("json",)):
    sp.add_argument("--format", choices=formats, default="json")
    sp.add_argument("--output", default=None, help="write to this path instead of stdout")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: CSL_THREADS or 1)")


def _add_sweep(sp):
    sp.add_argument("--tol", type=float, default=0.1, help="relative slope tolerance")
    sp.add_argument("--abs-tol", type=float, default=0.02, help="absolute tolerance for zero slopes")
    sp.add_argument("--nodes-across", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coulomb-sobolev",
                                 description="Coulomb-Sobolev interpolation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("exponents", help="exponent bundle and regime")
    _add_params(sp)
    _add_common(sp)
    sp.set_defaults(handler=cmd_exponents)

    sp = sub.add_parser("energy", help="energies and quotient of one profile")
    _add_params(sp)
    _add_common(sp)
    sp.add_argument("--profile", choices=("bump", "file"), default="bump")
    sp.add_argument("--input", default=None, help="radial columnar profile for --profile file")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--R", type=float, default=10.0)
    sp.add_argument("--S", type=float, default=1.0)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--nodes-across", type=int, default=64)
    sp.set_defaults(handler=cmd_energy)

    sp = sub.add_parser("sweep", help="schedule or bump-law slope sweep")
    _add_params(sp)
    _add_common(sp, ("json", "csv"))
    _add_sweep(sp)
    sp.add_argument("--schedule", default=None, help="e.g. table2-row1, table3-row1, fixedR")
    sp.add_argument("--bump-law", choices=("lambda", "R", "S"), default=None)
    sp.add_argument("--axis-values", default=None, help="comma separated axis values")
    sp.add_argument("--fixed-R", type=float, default=1.0)
    sp.set_defaults(handler=cmd_sweep)

    sp = sub.add_parser("multibump", help="multibump sweep in the bump count")
    _add_params(sp)
    _add_common(sp, ("json", "csv"))
    _add_sweep(sp)
    sp.add_argument("--R", type=float, default=64.0, help="radius ratio between bumps")
    sp.add_argument("--m-max", type=int, default=8)
    sp.add_argument("--rescaled", action="store_true")
    sp.add_argument("--schedule", default="Table2Row1")
    sp.set_defaults(handler=cmd_multibump)

    for name, fn, text in (("bounded", cmd_bounded, "quotient over a seeded corpus"),
                           ("weighted", cmd_weighted, "weighted inequality ratios over a corpus")):
        sp = sub.add_parser(name, help=text)
        _add_params(sp)
        _add_common(sp, ("json", "csv"))
        sp.add_argument("--seed", type=_seed, default=CorpusSpec.seed)
        sp.add_argument("--corpus-size", type=int, default=200)
        sp.add_argument("--threshold", type=float, default=10.0, help="max/median bound")
        if name == "bounded":
            sp.add_argument("--refined-eps", default=None,
                            help="refined Sobolev quotient with this epsilon (CriticalQ only)")
        sp.set_defaults(handler=fn)

    sp = sub.add_parser("optimize", help="multi-start constrained ascent")
    _add_params(sp)
    _add_common(sp)
    sp.add_argument("--seed", type=_seed, default=0)
    sp.add_argument("--starts", type=int, default=5)
    sp.add_argument("--n-nodes", type=int, default=401)
    sp.add_argument("--r-min", type=float, default=1e-3)
    sp.add_argument("--r-max", type=float, default=40.0)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--max-iter", type=int, default=5000)
    sp.add_argument("--epsilon", default=None, help="refined Sobolev family parameter")
    sp.add_argument("--trace", default=None, help="JSON lines trace of the best start")
    sp.add_argument("--export", default=None, help="write the candidate in columnar format")
    sp.add_argument("--check-gradients", action="store_true")
    sp.set_defaults(handler=cmd_optimize)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ParameterError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
