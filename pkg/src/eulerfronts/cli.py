"""Command-line entry point: ``eulerfronts <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .errors import AmbiguityError, DomainError, MonotoneCausticError, NumericalError, SingularParameterError
from .exact_solution import branches, profile_section, scan_grid
from .fvm import init_from_analytic, locate_shock, run as run_fvm
from .geometry_verify import run_verification
from .process import classify_at, is_characteristically_integrable
from .singularity import caustic, cusp, shock_front
from .thermo import eval_state, kappa_at

log = logging.getLogger("eulerfronts")

OUTPUT_ENV = "EULERFRONTS_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_SINGULAR = 4
EXIT_NUMERICAL = 5


class CheckFailed(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return format(float(v), ".17g")


def render_csv(cfg: RunConfig, header, rows) -> str:
    lines = [f"# eulerfronts {__version__} config-sha256:{cfg.digest}", ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def output_dir(cfg: RunConfig, flag) -> Path:
    return Path(flag or os.environ.get(OUTPUT_ENV) or cfg.data["output_dir"])


def commit(files: dict) -> list[Path]:
    """Write every output or none: stage in a temp dir next to the targets, then move."""
    staged = []
    tmp_dirs = {}
    try:
        for target, payload in files.items():
            target = Path(target)
            target.parent.mkdir(parents=True, exist_ok=True)
            if target.parent not in tmp_dirs:
                tmp_dirs[target.parent] = tempfile.mkdtemp(prefix=".eulerfronts-", dir=target.parent)
            d = tmp_dirs[target.parent]
            tmp = Path(d) / target.name
            if callable(payload):
                payload(tmp)
            else:
                tmp.write_text(payload)
            staged.append((tmp, target))
        for tmp, target in staged:
            os.replace(tmp, target)
    finally:
        for d in tmp_dirs.values():
            shutil.rmtree(d, ignore_errors=True)
    return [t for _, t in staged]


def emit(cfg: RunConfig, args, header, rows):
    text = render_csv(cfg, header, rows)
    if args.out:
        commit({args.out: text})
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_state(cfg, args):
    model = cfg.model()
    st = eval_state(model, args.v, args.T)
    k = kappa_at(model, args.v, args.T)
    out = {"v": st.v, "T": st.T, "p": st.p, "e": st.e, "s": st.s, "coeff_TT": k.coeff_TT, "coeff_vv": k.coeff_vv, "applicable": k.applicable}
    print(json.dumps(out, indent=2))


def cmd_process(cfg, args):
    curve = cfg.curve()
    lo, hi = curve.rho_domain
    grid = scan_grid((args.rho_min or lo, args.rho_max or hi), args.points)
    rows = []
    for r in grid:
        rep = classify_at(curve, r)
        applicable = ""
        if curve.model is not None and curve.T is not None:
            applicable = kappa_at(curve.model, 1.0 / r, float(curve.T(r))).applicable
        rows.append((r, curve.p(r), curve.dp(r), curve.A(r), curve.dA(r), rep.det, rep.classification, applicable))
    log.info("characteristically integrable: %s", is_characteristically_integrable(curve))
    emit(cfg, args, ("rho", "p", "dp", "A", "dA", "det", "classification", "applicable"), rows)


def cmd_solve(cfg, args):
    fam = cfg.family()
    print(json.dumps(branches(fam, args.t, args.x, cfg.rho_window).as_dict(), indent=2))


def _rho_grid(cfg, args):
    lo, hi = cfg.rho_window
    return scan_grid((args.rho_min or lo, args.rho_max or hi), args.points)


def cmd_section(cfg, args):
    prof = profile_section(cfg.family(), args.t, _rho_grid(cfg, args))
    emit(cfg, args, ("x", "rho", "u"), prof.tolist())


def cmd_caustic(cfg, args):
    cc = caustic(cfg.family(), args.branch, _rho_grid(cfg, args))
    emit(cfg, args, ("rho", "t", "x"), zip(cc.rho, cc.t, cc.x))


def cmd_cusp(cfg, args):
    print(json.dumps(cusp(cfg.family(), args.branch, cfg.rho_window).as_dict(), indent=2))


def cmd_front(cfg, args):
    fam = cfg.family()
    branch = args.branch or cfg.section("front")["branch"]
    steps = args.steps or cfg.section("front")["steps"]
    c = cusp(fam, branch, cfg.rho_window)
    t_min = c.t if args.t_min is None else args.t_min
    t_max = 2.0 * c.t if args.t_max is None else args.t_max
    fr = shock_front(fam, (t_min, t_max), steps, branch, cfg.rho_window)
    emit(cfg, args, ("t", "x", "rho1", "rho2"), fr.rows())


def cmd_verify(cfg, args):
    v = cfg.section("verify")
    seed = v["seed"] if args.seed is None else args.seed
    samples = v["samples"] if args.samples is None else args.samples
    rows = run_verification(cfg.family(), seed=seed, samples=samples)
    for r in rows:
        print(r.row())
    bad = [r.name for r in rows if not r.passed]
    print(f"{len(rows) - len(bad)}/{len(rows)} checks passed (seed {seed}, {samples} samples)")
    if bad:
        raise CheckFailed(", ".join(bad))


def cmd_fvm(cfg, args):
    fam = cfg.family()
    opts = cfg.section("fvm")
    t0 = opts["t0"] if args.t0 is None else args.t0
    cells = opts["cells"] if args.cells is None else args.cells
    c = cusp(fam, "+", cfg.rho_window)
    t_end = args.t_end if args.t_end is not None else opts.get("t_end", 1.2 * c.t)

    started = time.perf_counter()
    s0 = init_from_analytic(fam, t0, opts["x_min"], opts["x_max"], cells, cfg.rho_window, opts["boundary"])
    s1 = run_fvm(s0, t_end, opts["cfl"])
    elapsed = time.perf_counter() - started

    shock = locate_shock(s1)
    summary = {
        "t0": t0,
        "t_end": t_end,
        "cells": cells,
        "dx": s1.dx,
        "boundary": opts["boundary"],
        "mass_drift": abs(s1.mass_balance() - s0.mass_balance()) / abs(s0.mass_balance()),
        "shock_x": shock.x,
        "shock_count": shock.count,
        "runtime_s": round(elapsed, 3),
    }
    if t_end > c.t:
        fr = shock_front(fam, (t_end, t_end), 1, "+", cfg.rho_window)
        summary["front_x"] = float(fr.x[-1])
        summary["front_speed"] = float(fr.speed(fam)[-1])
        if shock.found:
            summary["offset_cells"] = abs(shock.x - summary["front_x"]) / s1.dx
    if args.out:
        emit(cfg, args, ("x", "rho", "u"), zip(s1.centers, s1.rho, s1.u))
    print(json.dumps(summary, indent=2))


def cmd_figure(cfg, args):
    from .plotting import density_sections_figure, front_figure

    fam = cfg.family()
    fig = cfg.section("figure")
    lo, hi = fig.get("rho_range", (0.02, 3.0))
    grid = scan_grid((args.rho_min or lo, args.rho_max or hi), args.points)
    out = output_dir(cfg, args.output_dir)
    files = {}
    if args.kind == "density":
        times = args.times or fig["density_times"]
        sections = [(t, profile_section(fam, t, grid)) for t in times]
        rows = [(t, *r) for t, prof in sections for r in prof.tolist()]
        files[out / "density_sections.csv"] = render_csv(cfg, ("t", "x", "rho", "u"), rows)
        files[out / "density_sections.png"] = lambda p: density_sections_figure(sections, p)
    else:
        c = cusp(fam, "+", cfg.rho_window)
        t_max = fig["front_t_max_factor"] * c.t
        cc = [caustic(fam, b, grid) for b in ("+", "-")]
        cc = [type(k)(k.branch, k.rho[m], k.t[m], k.x[m]) for k in cc for m in [(k.t >= 0) & (k.t <= t_max)]]
        fr = shock_front(fam, (c.t, t_max), args.steps or cfg.section("front")["steps"], "+", cfg.rho_window)
        crow = [(k.branch, r, t, x) for k in cc for r, t, x in zip(k.rho, k.t, k.x)]
        files[out / "front_caustic.csv"] = render_csv(cfg, ("branch", "rho", "t", "x"), crow)
        files[out / "front_shock.csv"] = render_csv(cfg, ("t", "x", "rho1", "rho2"), fr.rows())
        files[out / "front.png"] = lambda p: front_figure([k for k in cc if len(k)], fr, c, p)
    for p in commit(files):
        print(p)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eulerfronts", allow_abbrev=False, description="Exact multivalued Euler flows, caustics and shock fronts.")
    ap.add_argument("--config", help="JSON run configuration (defaults: reference ideal-gas family)")
    ap.add_argument("--output-dir", help=f"directory for figure outputs (overrides ${OUTPUT_ENV} and the config)")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def rho_opts(p, points=512):
        p.add_argument("--rho-min", type=float)
        p.add_argument("--rho-max", type=float)
        p.add_argument("--points", type=int, default=points)

    p = sub.add_parser("state", help="state variables and kappa at (v, T)")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("process", help="tabulate the process curve and its type")
    rho_opts(p, 64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("solve", help="all densities at a point (t, x), as JSON")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("section", help="profile x, rho, u at time t (CSV)")
    p.add_argument("--t", type=float, required=True)
    rho_opts(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_section)

    p = sub.add_parser("caustic", help="caustic samples rho, t, x (CSV)")
    p.add_argument("--branch", choices=["+", "-"], default="+")
    rho_opts(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_caustic)

    p = sub.add_parser("cusp", help="cusp point as JSON")
    p.add_argument("--branch", choices=["+", "-"], default="+")
    p.set_defaults(func=cmd_cusp)

    p = sub.add_parser("front", help="shock front t, x, rho1, rho2 (CSV)")
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--branch", choices=["+", "-"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_front)

    p = sub.add_parser("verify", help="geometric identity checks; exit 1 on any failure")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fvm", help="finite-volume cross-check; summary JSON")
    p.add_argument("--t0", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--cells", type=int)
    p.add_argument("--out", help="write the final profile x, rho, u here")
    p.set_defaults(func=cmd_fvm)

    p = sub.add_parser("figure", help="figure data (CSV) and PNG into the output directory")
    p.add_argument("kind", choices=["density", "front"])
    p.add_argument("--times", type=float, nargs="+")
    p.add_argument("--output-dir", default=argparse.SUPPRESS, help="same as the global option")
    p.add_argument("--steps", type=int)
    rho_opts(p, 1024)
    p.set_defaults(func=cmd_figure)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.load(args.config)
        log.info("resolved config %s: %s", cfg.digest, cfg.resolved_json())
        args.func(cfg, args)
    except CheckFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularParameterError, DomainError, AmbiguityError, MonotoneCausticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
