"""Batch experiment runner: bounds, oracle verification, power and phase runs.

All output is CSV on stdout (or --out); progress goes to stderr.  Every run is
fully determined by the master seed plus the configuration, which are embedded
in a comment line at the top of the CSV.

Exit codes: 0 success, 1 config validation failure, 2 oracle failure,
3 runtime numerical error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys

from . import divergence as dv
from . import oracles_suite
from .stat_tests import ProblemConfig, estimate_avg_power, estimate_level, phase_curve

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ORACLE = 2
EXIT_NUMERIC = 3


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad comma-separated number list: {text!r}")


def _load_config_file(path: str) -> dict[str, str]:
    """Flat key=value file; blank lines and '#' comments ignored."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indeplab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key=value config file; flags override")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="CSV output path (default stdout)")
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--beta", type=float, default=0.35)
        sp.add_argument("--kappa", type=float, default=1.0)

    sp = sub.add_parser("bound", help="divergence and power bounds over a grid")
    common(sp)
    sp.add_argument("--b", type=float, help="signal constant; default select_b(kappa, alpha, beta)")
    sp.add_argument("--grid-n", type=_parse_grid, default=[100.0])
    sp.add_argument("--grid-p", type=_parse_grid, default=[10.0])
    sp.add_argument("--grid-q", type=_parse_grid, default=[10.0])

    sp = sub.add_parser("verify", help="run the brute-force oracle suite")
    common(sp)
    sp.add_argument("--inject-fault", action="store_true", help="negative control: perturb one closed form")

    sp = sub.add_parser("power", help="Monte-Carlo level / power estimation")
    common(sp)
    sp.add_argument("--regime", choices=["null", "lf"], default="lf")
    sp.add_argument("--b", type=float, help="signal constant; default select_b(kappa, alpha, beta)")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--perms", type=int, default=200)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--grid-n", type=_parse_grid, default=[100.0])
    sp.add_argument("--grid-p", type=_parse_grid, default=[10.0])
    sp.add_argument("--grid-q", type=_parse_grid, default=[10.0])

    sp = sub.add_parser("phase", help="power curve over the dimensionless signal axis")
    common(sp)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--perms", type=int, default=200)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--grid-n", type=_parse_grid, default=[200.0])
    sp.add_argument("--grid-p", type=_parse_grid, default=[10.0])
    sp.add_argument("--grid-q", type=_parse_grid, default=[10.0])
    sp.add_argument("--grid-s", type=_parse_grid, default=[0.0, 1.0, 5.0, 25.0, 50.0])

    sp = sub.add_parser("divergence", help="single-point divergence report")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--b", type=float, help="signal constant; default select_b(kappa, alpha, beta)")
    return parser


def _apply_config_file(args: argparse.Namespace, argv: list[str]) -> None:
    if not getattr(args, "config", None):
        return
    file_vals = _load_config_file(args.config)
    # Explicit CLI flags take precedence over the config file.
    explicit = {a.lstrip("-").replace("-", "_").split("=")[0] for a in argv if a.startswith("--")}
    casts = {"seed": int, "trials": int, "perms": int, "workers": int}
    for key, val in file_vals.items():
        if not hasattr(args, key):
            raise ValueError(f"unknown config key {key!r}")
        if key in explicit:
            continue
        if key in casts:
            setattr(args, key, casts[key](val))
        elif key.startswith("grid_"):
            setattr(args, key, _parse_grid(val))
        elif key in ("regime", "out"):
            setattr(args, key, val)
        elif key == "inject_fault":
            setattr(args, key, val.lower() in ("1", "true", "yes"))
        else:
            setattr(args, key, float(val))


def _validate(args: argparse.Namespace) -> list[str]:
    errs = []
    if not (0.0 < args.alpha < 1.0):
        errs.append(f"alpha must be in (0,1), got {args.alpha}")
    if not (args.alpha < args.beta < 1.0):
        errs.append(f"beta must be in (alpha,1), got {args.beta}")
    if args.kappa <= 0:
        errs.append(f"kappa must be positive, got {args.kappa}")
    if getattr(args, "seed", 0) < 0 or getattr(args, "seed", 0) >= 2**64:
        errs.append("seed must fit in an unsigned 64-bit integer")
    for name in ("trials", "perms", "workers"):
        if hasattr(args, name) and getattr(args, name) < 1:
            errs.append(f"{name} must be positive")
    if hasattr(args, "perms") and getattr(args, "perms", 200) < 19:
        errs.append("perms must be at least 19")
    for gname in ("grid_n", "grid_p", "grid_q"):
        if hasattr(args, gname):
            for val in getattr(args, gname):
                if val < 1 or val != int(val):
                    errs.append(f"{gname} entries must be positive integers, got {val}")
    if hasattr(args, "grid_s"):
        for val in args.grid_s:
            if val < 0:
                errs.append(f"grid_s entries must be nonnegative, got {val}")
    if getattr(args, "b", None) is not None and args.b < 0:
        errs.append(f"b must be nonnegative, got {args.b}")
    return errs


def _fingerprint(args: argparse.Namespace) -> str:
    items = sorted((k, repr(v)) for k, v in vars(args).items() if k not in ("out", "config"))
    return hashlib.sha256(repr(items).encode()).hexdigest()[:16]


class _Emitter:
    def __init__(self, args: argparse.Namespace, columns: list[str]):
        self.path = getattr(args, "out", None)
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        self.fh.write(f"# command={args.command} seed={getattr(args, 'seed', 0)} fingerprint={_fingerprint(args)}\n")
        self.writer = csv.DictWriter(self.fh, fieldnames=columns, lineterminator="\n")
        self.writer.writeheader()

    def row(self, **kwargs):
        self.writer.writerow(kwargs)

    def close(self):
        if self.path:
            self.fh.close()


def _resolve_b(args: argparse.Namespace) -> float:
    if getattr(args, "b", None) is not None:
        return args.b
    return dv.select_b(args.kappa, args.alpha, args.beta)


def cmd_bound(args) -> int:
    b = _resolve_b(args)
    cols = ["n", "p", "q", "b", "chi2_exact", "chi2_closed_bound", "tv_upper", "power_upper",
            "pd_ok", "mgf_ok", "b_caps_ok", "error"]
    em = _Emitter(args, cols)
    had_error = False
    for n in args.grid_n:
        for p in args.grid_p:
            for q in args.grid_q:
                n_, p_, q_ = int(n), int(p), int(q)
                try:
                    rep = dv.minimax_power_upper(n_, p_, q_, b, args.alpha)
                    em.row(n=n_, p=p_, q=q_, b=f"{b:.12g}",
                           chi2_exact=f"{rep.chi2_exact:.12g}",
                           chi2_closed_bound=f"{rep.chi2_closed_bound:.12g}",
                           tv_upper=f"{rep.tv_upper:.12g}",
                           power_upper=f"{rep.power_upper:.12g}",
                           pd_ok=rep.pd_ok, mgf_ok=rep.mgf_ok, b_caps_ok=rep.b_caps_ok, error="")
                except (ValueError, ArithmeticError) as exc:
                    had_error = True
                    em.row(n=n_, p=p_, q=q_, b=f"{b:.12g}", error=str(exc),
                           chi2_exact="", chi2_closed_bound="", tv_upper="", power_upper="",
                           pd_ok="", mgf_ok="", b_caps_ok="")
    em.close()
    return EXIT_NUMERIC if had_error else EXIT_OK


def cmd_verify(args) -> int:
    rows = oracles_suite.run_suite(seed=args.seed, inject_fault=args.inject_fault)
    cols = ["name", "closed_form", "brute_force", "abs_err", "rel_err", "pass"]
    em = _Emitter(args, cols)
    all_pass = True
    for r in rows:
        all_pass &= r["pass"]
        em.row(name=r["name"], closed_form=f"{r['closed_form']:.12g}",
               brute_force=f"{r['brute_force']:.12g}", abs_err=f"{r['abs_err']:.3g}",
               rel_err=f"{r['rel_err']:.3g}", **{"pass": r["pass"]})
    em.close()
    return EXIT_OK if all_pass else EXIT_ORACLE


def cmd_power(args) -> int:
    cols = ["regime", "n", "p", "q", "s_or_b", "trials", "rejections", "estimate",
            "ci_low", "ci_high", "seed", "error"]
    em = _Emitter(args, cols)
    had_error = False
    b = _resolve_b(args) if args.regime == "lf" else 0.0
    for n in args.grid_n:
        for p in args.grid_p:
            for q in args.grid_q:
                n_, p_, q_ = int(n), int(p), int(q)
                print(f"power: regime={args.regime} n={n_} p={p_} q={q_}", file=sys.stderr)
                try:
                    cfg = ProblemConfig(n=n_, p=p_, q=q_, alpha=args.alpha, beta=args.beta,
                                        b=b if args.regime == "lf" else None)
                    if args.regime == "null":
                        est = estimate_level(cfg, args.trials, args.perms, args.seed, args.workers)
                    else:
                        est = estimate_avg_power(cfg, args.trials, args.perms, args.seed, args.workers)
                    em.row(regime=est.regime, n=n_, p=p_, q=q_, s_or_b=f"{b:.12g}",
                           trials=est.trials, rejections=est.rejections,
                           estimate=f"{est.estimate:.6g}", ci_low=f"{est.ci_low:.6g}",
                           ci_high=f"{est.ci_high:.6g}", seed=args.seed, error="")
                except ValueError as exc:
                    had_error = True
                    em.row(regime=args.regime, n=n_, p=p_, q=q_, s_or_b=f"{b:.12g}",
                           trials="", rejections="", estimate="", ci_low="", ci_high="",
                           seed=args.seed, error=str(exc))
    em.close()
    return EXIT_NUMERIC if had_error else EXIT_OK


def cmd_phase(args) -> int:
    cols = ["regime", "n", "p", "q", "s_or_b", "trials", "rejections", "estimate",
            "ci_low", "ci_high", "seed", "error"]
    em = _Emitter(args, cols)
    had_error = False
    for n in args.grid_n:
        for p in args.grid_p:
            for q in args.grid_q:
                n_, p_, q_ = int(n), int(p), int(q)
                print(f"phase: n={n_} p={p_} q={q_} s-grid={args.grid_s}", file=sys.stderr)
                try:
                    curve = phase_curve(n_, p_, q_, args.grid_s, args.trials, args.perms,
                                        args.seed, alpha=args.alpha, workers=args.workers)
                    for s, est in curve:
                        em.row(regime=est.regime, n=n_, p=p_, q=q_, s_or_b=f"{s:g}",
                               trials=est.trials, rejections=est.rejections,
                               estimate=f"{est.estimate:.6g}", ci_low=f"{est.ci_low:.6g}",
                               ci_high=f"{est.ci_high:.6g}", seed=args.seed, error="")
                except ValueError as exc:
                    had_error = True
                    em.row(regime="phase", n=n_, p=p_, q=q_, s_or_b="", trials="",
                           rejections="", estimate="", ci_low="", ci_high="",
                           seed=args.seed, error=str(exc))
    em.close()
    return EXIT_NUMERIC if had_error else EXIT_OK


def cmd_divergence(args) -> int:
    b = _resolve_b(args)
    try:
        rep = dv.minimax_power_upper(args.n, args.p, args.q, b, args.alpha)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"n={args.n} p={args.p} q={args.q} b={b:.12g}")
    print(f"chi2_exact={rep.chi2_exact:.12g}")
    print(f"chi2_closed_bound={rep.chi2_closed_bound:.12g}")
    print(f"tv_upper={rep.tv_upper:.12g}")
    print(f"power_upper={rep.power_upper:.12g}")
    print(f"pd_ok={rep.pd_ok} mgf_ok={rep.mgf_ok} b_caps_ok={rep.b_caps_ok}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args, argv)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    errs = _validate(args)
    if errs:
        for e in errs:
            print(f"invalid config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {
        "bound": cmd_bound,
        "verify": cmd_verify,
        "power": cmd_power,
        "phase": cmd_phase,
        "divergence": cmd_divergence,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
