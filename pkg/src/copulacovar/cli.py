"""Command-line front end.

    copulacovar compute  --copula gaussian --rho 0.5 --alpha 0.95 --beta 0.95 --delta
    copulacovar sweep    --copula gaussian --sweep rho=-0.9:0.9:0.3 --quantity covar --alpha 0.95 --beta 0.95
    copulacovar validate --copula gumbel --theta 2 --alpha 0.95 --beta 0.95 --samples 10000000 --seed 42
    copulacovar estimate --input losses.csv --family gumbel --margins empirical

Exit codes: 0 success / PASS, 1 runtime or domain error, 2 usage error,
3 validation FAIL. Losses follow the positive-loss convention.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from typing import Sequence

from .copulas import make_copula
from .covar import (
    AtMean,
    AtQuantile,
    AtValue,
    RiskQuery,
    SystemModel,
    covar,
    covar_leq_level,
    covar_report,
    delta_covar,
    value_at_risk,
)
from .errors import CoVaRError, InsufficientDataError
from .ingestion import fit, read_loss_csv
from .margins import Empirical, Normal, StudentT
from .oracle import OracleConfig, mc_covar

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_FAIL = 0, 1, 2, 3
SWEEPABLE = ("alpha", "beta", "rho", "theta", "nu", "level")
QUANTITIES = ("covar", "delta", "tilde_alpha", "tail_dep_upper", "tail_dep_lower", "cond_quantile")


def margin_spec(text: str) -> tuple[str, tuple]:
    """Parse ``normal:MU,SIGMA`` | ``t:NU,LOC,SCALE`` | ``empirical:PATH``."""
    kind, sep, rest = text.partition(":")
    kind = kind.strip().lower()
    if not sep:
        raise argparse.ArgumentTypeError(f"margin spec {text!r} has no ':'")
    if kind == "empirical":
        if not rest:
            raise argparse.ArgumentTypeError("empirical margin needs a file path")
        return kind, (rest,)
    try:
        nums = tuple(float(x) for x in rest.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric parameters in margin spec {text!r}") from None
    if kind == "normal" and len(nums) == 2:
        return kind, nums
    if kind == "t" and len(nums) == 3:
        return kind, nums
    raise argparse.ArgumentTypeError(
        f"bad margin spec {text!r}; expected normal:MU,SIGMA, t:NU,LOC,SCALE or empirical:PATH"
    )


def _read_sample_file(path: str) -> list[float]:
    values = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            field = line.split(",")[0].strip()
            if not field:
                continue
            try:
                values.append(float(field))
            except ValueError:
                if i == 0:
                    continue  # header
                raise CoVaRError(f"{path}: non-numeric value {field!r} on line {i + 1}") from None
    return values


def build_margin(spec: tuple[str, tuple]):
    kind, params = spec
    if kind == "normal":
        return Normal(*params)
    if kind == "t":
        return StudentT(*params)
    return Empirical(_read_sample_file(params[0]))


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--copula", choices=("gaussian", "t", "gumbel", "clayton"), default="gaussian")
    p.add_argument("--rho", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--nu", type=float, help="t-copula degrees of freedom (default 5)")
    p.add_argument("--margin-i", type=margin_spec, default=("normal", (0.0, 1.0)), metavar="SPEC")
    p.add_argument("--margin-s", type=margin_spec, default=("normal", (0.0, 1.0)), metavar="SPEC")


def _default_seed() -> int:
    return int(os.environ.get("COVAR_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copulacovar", description="Copula-based CoVaR and Delta-CoVaR.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="single CoVaR / Delta-CoVaR query")
    _add_model_args(p)
    p.add_argument("--alpha", type=float, required=True)
    cond = p.add_mutually_exclusive_group(required=True)
    cond.add_argument("--beta", type=float)
    cond.add_argument("--l", type=float, help="condition on the institution loss value")
    cond.add_argument("--at-mean", action="store_true")
    p.add_argument("--delta", action="store_true", help="also report Delta-CoVaR (needs --beta)")
    p.add_argument("--leq", action="store_true", help="condition on L_i <= VaR_beta instead of equality")
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("sweep", help="evaluate a quantity over a parameter grid, as CSV")
    _add_model_args(p)
    p.add_argument("--sweep", action="append", required=True, metavar="NAME=VALUES",
                   help="NAME in {alpha,beta,rho,theta,nu,level}; VALUES as a,b,c or start:stop:step")
    p.add_argument("--quantity", choices=QUANTITIES, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--level", type=float)
    p.add_argument("--output", help="write CSV here instead of standard output")

    p = sub.add_parser("validate", help="compare analytic CoVaR with the Monte-Carlo oracle")
    _add_model_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--band", type=float, default=0.005)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("estimate", help="fit margins and copula to a loss CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--family", choices=("gaussian", "t", "gumbel", "clayton"), required=True)
    p.add_argument("--margins", choices=("normal", "t", "empirical"), default="normal")
    p.add_argument("--nu", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    return parser


def _check_copula_args(parser, args, swept=()) -> None:
    need = {"gaussian": "rho", "t": "rho", "gumbel": "theta", "clayton": "theta"}[args.copula]
    if getattr(args, need) is None and need not in swept:
        parser.error(f"--copula {args.copula} requires --{need}")


def _model(args, **override) -> SystemModel:
    params = {"rho": args.rho, "theta": args.theta, "nu": args.nu}
    params.update({k: v for k, v in override.items() if k in params})
    c = make_copula(args.copula, **params)
    return SystemModel(build_margin(args.margin_i), build_margin(args.margin_s), c)


def _emit_report(rep: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(rep, ensure_ascii=False))
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(list(rep))
        w.writerow(["" if v is None else repr(v) for v in rep.values()])


def cmd_compute(args, parser) -> int:
    _check_copula_args(parser, args)
    if (args.delta or args.leq) and args.beta is None:
        parser.error("--delta and --leq require --beta")
    if args.delta and args.leq:
        parser.error("--delta cannot be combined with --leq")
    model = _model(args)
    if args.leq:
        level = covar_leq_level(model, args.alpha, args.beta)
        rep = {
            "covar": float(model.margin_s.quantile(level)),
            "tilde_alpha": level,
            "var_s": value_at_risk(model.margin_s, args.alpha),
            "delta_covar": None,
        }
    elif args.beta is not None:
        rep = covar_report(model, args.alpha, args.beta, with_delta=args.delta).as_dict()
    else:
        condition = AtMean() if args.at_mean else AtValue(args.l)
        rep = covar(model, RiskQuery(args.alpha, condition)).as_dict()
    _emit_report(rep, args.format)
    return EXIT_OK


def parse_grid(text: str) -> tuple[str, list[float]]:
    name, sep, values = text.partition("=")
    name = name.strip()
    if not sep or name not in SWEEPABLE:
        raise ValueError(f"bad sweep {text!r}; expected NAME=VALUES with NAME in {', '.join(SWEEPABLE)}")
    values = values.strip()
    if not values:
        return name, []
    if ":" in values:
        start, stop, step = (float(x) for x in values.split(":"))
        if step == 0 or (stop - start) / step < -1e-9:
            return name, []
        n = int(round((stop - start) / step)) + 1
        return name, [round(start + k * step, 12) + 0.0 for k in range(n)]
    return name, [float(x) for x in values.split(",") if x.strip()]


def _sweep_value(args, point: dict) -> float:
    get = lambda key: point.get(key, getattr(args, key, None))
    model = _model(args, **point)
    q = args.quantity
    if q in ("tail_dep_upper", "tail_dep_lower"):
        if get("level") is None:
            raise CoVaRError(f"{q} needs --level or a level sweep")
        return model.copula.tail_dep_fn(get("level"), "upper" if q == "tail_dep_upper" else "lower")
    alpha, beta = get("alpha"), get("beta")
    if alpha is None:
        raise CoVaRError(f"{q} needs --alpha or an alpha sweep")
    if q == "cond_quantile":
        if beta is None:
            raise CoVaRError("cond_quantile needs --beta (the conditioning level u)")
        return model.copula.cond_quantile(alpha, beta)
    if q == "delta":
        if beta is None:
            raise CoVaRError("delta needs --beta or a beta sweep")
        return delta_covar(model, alpha, beta)
    if beta is not None:
        condition = AtQuantile(beta)
    elif args.l is not None:
        condition = AtValue(args.l)
    else:
        raise CoVaRError(f"{q} needs --beta, --l or a beta sweep")
    rep = covar(model, RiskQuery(alpha, condition))
    return rep.covar if q == "covar" else rep.tilde_alpha


def cmd_sweep(args, parser) -> int:
    try:
        grids = [parse_grid(s) for s in args.sweep]
    except ValueError as exc:
        parser.error(str(exc))
    if len(grids) > 2:
        parser.error("at most two swept dimensions")
    names = [g[0] for g in grids]
    if len(set(names)) != len(names):
        parser.error("a dimension is swept twice")
    if any(not g[1] for g in grids):
        parser.error("empty sweep grid")
    _check_copula_args(parser, args, swept=names)
    rows = []
    for combo in itertools.product(*(g[1] for g in grids)):
        point = dict(zip(names, combo))
        rows.append([*combo, _sweep_value(args, point)])
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([*names, args.quantity])
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def cmd_validate(args, parser) -> int:
    _check_copula_args(parser, args)
    model = _model(args)
    seed = _default_seed() if args.seed is None else args.seed
    cfg = OracleConfig(n_samples=args.samples, band_halfwidth=args.band, seed=seed, workers=args.workers)
    analytic = covar(model, RiskQuery(args.alpha, AtQuantile(args.beta))).covar
    est = mc_covar(model, args.alpha, args.beta, cfg)
    passed = abs(analytic - est.value) <= est.half_width + 1e-9
    if args.format == "json":
        print(json.dumps({
            "analytic": analytic, "oracle": est.value, "half_width": est.half_width,
            "n_in_band": est.n_in_band, "result": "PASS" if passed else "FAIL",
        }))
    else:
        print(f"{'analytic':>12} {'oracle':>12} {'half_width':>12} {'n_in_band':>10}  result")
        print(f"{analytic:12.6f} {est.value:12.6f} {est.half_width:12.6f} {est.n_in_band:10d}  "
              f"{'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_estimate(args, parser) -> int:
    if (args.alpha is None) != (args.beta is None):
        parser.error("--alpha and --beta must be given together")
    series = read_loss_csv(args.input)
    margins = "student_t" if args.margins == "t" else args.margins
    report = fit(series, args.family, margins, args.nu)
    out = report.as_dict()
    if args.alpha is not None:
        model = SystemModel(report.margin_i, report.margin_s, report.copula)
        out["report"] = covar_report(model, args.alpha, args.beta, with_delta=True).as_dict()
    print(json.dumps(out, ensure_ascii=False))
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "sweep": cmd_sweep, "validate": cmd_validate, "estimate": cmd_estimate}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except InsufficientDataError as exc:
        print(f"error: insufficient data: {exc}", file=sys.stderr)
    except (CoVaRError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
