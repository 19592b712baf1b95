"""Command-line entry point: ``seechain {sweep,fit,collapse,verify,plot}``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

from . import __version__
from .mps.chain import ConvergenceError
from .mps.svd import SvdError
from .orchestrator.analysis import run_collapse, run_fit
from .orchestrator.config import ConfigError, load_config, resolve_out_dir
from .orchestrator.plot import run_plot
from .orchestrator.sweep import NUMERICAL_ERRORS, SWEEP_CSV, SweepRunner
from .orchestrator.verify import run_verification
from .scaling.collapse import CollapseError, CollapseResult
from .scaling.fits import Backend, FitError
from .spin import Boundary, Model

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

log = logging.getLogger("seechain")


def _triple(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.backend is not None:
        overrides["backend"] = Backend(args.backend)
    if args.chi_max is not None:
        overrides["chi_max"] = args.chi_max
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    out = resolve_out_dir(cfg, args.out)
    manifest = SweepRunner(cfg, out).run()
    failed = [pt for pt in manifest["points"] if pt["status"] != "ok"]
    for pt in failed:
        log.error("L=%s p=%s failed: %s", pt["L"], pt["p"], pt.get("reason", ""))
    print(f"{len(manifest['points']) - len(failed)} point(s) ok, {len(failed)} failed -> "
          f"{os.path.join(out, SWEEP_CSV)}")  # fmt: skip
    if cfg.verify_oracles:
        report = run_verification(cfg.model, [L for L in cfg.L_list if L <= 12],
                                  cfg.delta, cfg.boundary, seed=cfg.seed)  # fmt: skip
        _write_json(os.path.join(out, "verify.json"), report)
        if not report["passed"]:
            return EXIT_VERIFY
    return EXIT_NUMERICAL if failed else EXIT_OK


def _out_dir(args) -> str:
    if args.out:
        return args.out
    if getattr(args, "config", None):
        return resolve_out_dir(load_config(args.config))
    return os.environ.get("SEECHAIN_OUT") or "results"


def cmd_fit(args) -> int:
    out = _out_dir(args)
    sweep = args.sweep or os.path.join(out, SWEEP_CSV)
    report = run_fit(sweep, out, window=args.window)
    for grp in report["groups"]:
        ref = grp["reference_g_at_half"]
        for f in grp["fits_at_half"]:
            dev = f.get("relative_deviation")
            print(f"{grp['model']} delta={grp['delta']} {grp['channel']} p=0.5 window {f['window']}: "
                  f"e^s0={f['g']:.6g}" + (f" (reference {ref:.6g}, deviation {dev:+.2%})" if ref else ""))  # fmt: skip
        for ex in grp["extrapolations"]:
            if ex["p"] == 0.5:
                print(f"  extrapolation at p=0.5: s0 = {ex['slope']:.4g}/L_sd + {ex['intercept']:.4g}")
    return EXIT_OK


def cmd_collapse(args) -> int:
    out = _out_dir(args)
    fits = args.fits or os.path.join(out, "fits.csv")
    init = CollapseResult(*args.init) if args.init else None
    bounds = None
    if args.nu_bounds or args.zeta_bounds or args.pc_bounds:
        bounds = [args.pc_bounds or (0.0, 0.5), args.nu_bounds or (0.5, 6.0),
                  args.zeta_bounds or (-0.5, 0.5)]  # fmt: skip
    p_window = None if args.no_p_window else tuple(args.p_window)
    seed = 0 if args.seed is None else args.seed
    report = run_collapse(fits, out, init=init, bounds=bounds, p_window=p_window, seed=seed)
    res = report["result"]
    print(f"p_c={res['p_c']:.6g} nu={res['nu']:.6g} zeta={res['zeta']:.6g} "
          f"quality={res['quality']:.4g}")  # fmt: skip
    return EXIT_OK


def cmd_verify(args) -> int:
    model, delta, boundary, sizes = args.model, args.delta, args.boundary, args.L
    if args.config:
        cfg = load_config(args.config)
        model = model or cfg.model.value
        delta = cfg.delta if delta is None else delta
        boundary = boundary or cfg.boundary.value
        sizes = sizes or [L for L in cfg.L_list if L <= 12]
    if not model or not sizes:
        raise ConfigError("verify needs --model and -L (or --config)")
    report = run_verification(
        model,
        sizes,
        delta=delta or 0.0,
        boundary=boundary or Boundary.PERIODIC.value,
        include_mps=args.mps,
        chi_max=args.chi_max or 64,
        corrupt=args.corrupt,
        seed=args.seed or 0,
    )
    out = args.out or os.environ.get("SEECHAIN_OUT")
    if out:
        os.makedirs(out, exist_ok=True)
        _write_json(os.path.join(out, "verify.json"), report)
    for c in report["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        value = "" if c["value"] is None else f" {c['value']:.3g}"
        print(f"[{mark}] L={c['L']} {c['name']}{value} {c['detail']}".rstrip())
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_plot(args) -> int:
    out = _out_dir(args)
    for path in run_plot(out):
        print(path)
    return EXIT_OK


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seechain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="INI sweep configuration")
        p.add_argument("--out", help="results directory (overrides config and $SEECHAIN_OUT)")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("sweep", help="run a (L, p) sweep into see_sweep.csv")
    common(p, config_required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--backend", choices=[b.value for b in Backend])
    p.add_argument("--chi-max", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="window fits of S_SE = alpha L - s0")
    common(p)
    p.add_argument("--sweep", help="sweep CSV (default: <out>/see_sweep.csv)")
    p.add_argument("--window", type=int, default=4, help="sizes per fit window")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("collapse", help="finite-size-scaling collapse of e^{s0} curves")
    common(p)
    p.add_argument("--fits", help="fits CSV (default: <out>/fits.csv)")
    p.add_argument("--init", type=_triple, help="p_c,nu,zeta starting point")
    p.add_argument("--pc-bounds", type=_triple)
    p.add_argument("--nu-bounds", type=_triple)
    p.add_argument("--zeta-bounds", type=_triple)
    p.add_argument("--p-window", type=_triple, default=(0.2, 0.5))
    p.add_argument("--no-p-window", action="store_true", help="use every p in the fits")
    p.set_defaults(func=cmd_collapse)

    p = sub.add_parser("verify", help="identity and oracle checks")
    common(p)
    p.add_argument("--model", choices=[m.value for m in Model])
    p.add_argument("--delta", type=float)
    p.add_argument("--boundary", choices=[b.value for b in Boundary])
    p.add_argument("-L", type=int, nargs="+")
    p.add_argument("--mps", action="store_true", help="also compare the MPS backend")
    p.add_argument("--chi-max", type=int)
    p.add_argument("--corrupt", action="store_true", help="inject a corrupted state")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="emit plot scripts and tidy data")
    common(p)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"seechain: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CollapseError, FitError, ConvergenceError, SvdError) + NUMERICAL_ERRORS as exc:
        print(f"seechain: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
