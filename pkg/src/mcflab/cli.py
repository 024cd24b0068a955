"""Command-line entry point: ``mcflab <subcommand> [options]``.

Exit codes: 0 when every configured check passes, 1 when a check fails,
2 for usage or configuration errors, 3 for numerical failures (shooting,
unresolved data, divergence).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .config import OUTPUT_ENV, PRESETS, ConfigError, ExperimentConfig
from .grid import PeriodicGrid, ScalarField, read_snapshot, write_snapshot
from .initial_data import InitialDataError, SlabLayout, build_phi0, build_spiked_u0, build_w0
from .shrinker import ShrinkerError, scale_torus, shoot_torus, write_profile
from .solvers import FlowDiverged, FlowParams, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _out_dir(flag: str | None, cfg: ExperimentConfig | None, name: str) -> Path:
    # flag > environment > config file > default
    if flag:
        return Path(flag)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    if cfg is not None and cfg.output_dir:
        return Path(cfg.output_dir)
    return Path("runs") / name


# ---------------------------------------------------------------- shoot-torus

def cmd_shoot_torus(args) -> int:
    bracket = tuple(args.bracket) if args.bracket else None
    try:
        prof = shoot_torus(args.n, bracket=bracket, tol=args.tol, step=args.step)
    except ShrinkerError as e:
        print(f"shooting failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.scale_outer or args.scale_height:
        outer = args.scale_outer or prof.r_out
        height = args.scale_height or prof.delta
        prof = scale_torus(prof, outer, height)
    out = _out_dir(args.out, None, "shoot-torus")
    out.mkdir(parents=True, exist_ok=True)
    write_profile(prof, out / "profile.csv")
    convex = prof.is_convex()
    resid = float(abs(prof.residual()).max())
    print(f"n={prof.n}")
    print(f"ell={prof.ell:.10f}")
    print(f"r_out={prof.r_out:.10f}")
    print(f"delta={prof.delta:.10f}")
    print(f"t_star={prof.t_star:.10f}")
    print(f"scale={prof.scale:.10f}")
    print(f"miss={prof.miss:.3e}")
    print(f"max_residual={resid:.3e}")
    print(f"convex={'yes' if convex else 'no'}")
    print(f"wrote {out / 'profile.csv'}")
    return EXIT_OK if convex else EXIT_FAIL


# ---------------------------------------------------------------- experiments

def _experiment_config(args, name: str) -> ExperimentConfig:
    values = {}
    if args.config:
        values.update(ExperimentConfig.parse_text(Path(args.config).read_text()))
    if getattr(args, "preset", None):
        values.update(PRESETS[args.preset])
    for key in ExperimentConfig.field_types():
        raw = getattr(args, f"cfg_{key}", None)
        if raw is not None:
            values[key] = ExperimentConfig.coerce(key, raw)
    for item in args.set or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        values[key.strip()] = ExperimentConfig.coerce(key.strip(), raw)
    values["experiment"] = name
    cfg = ExperimentConfig(**values)
    return cfg.replace(output_dir=str(_out_dir(args.out, cfg, name)))


def _report(res) -> int:
    print(res.summary_text(), end="")
    failed = [c.name for c in res.checks if not c.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_validate(args) -> int:
    from .experiments import run_validate, validation_table

    cfg = ExperimentConfig(experiment="validate")
    out = _out_dir(args.out, None, "validate")
    res = run_validate(cfg.replace(output_dir=str(out)), out)
    print(validation_table(res), end="")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_theorem1(args) -> int:
    from .experiments import run_theorem1

    cfg = _experiment_config(args, "theorem1")
    return _report(run_theorem1(cfg, Path(cfg.output_dir)))


def cmd_theorem2(args) -> int:
    from .experiments import run_theorem2

    cfg = _experiment_config(args, "theorem2")
    return _report(run_theorem2(cfg, Path(cfg.output_dir)))


# ---------------------------------------------------------------- run

BUILDERS = ("sine", "constant", "spiked", "phi0", "w0")


def _build(args) -> ScalarField:
    name = args.builder
    if name in ("sine", "constant"):
        if args.dim == 1:
            grid = PeriodicGrid((args.extent,), (args.cells,), (0.0,))
        else:
            grid = PeriodicGrid((args.extent,) * 2, (args.cells,) * 2, (0.0, 0.0))
        if name == "constant":
            return ScalarField.constant(grid, args.value)
        k = 2 * math.pi / args.extent
        return ScalarField.from_function(grid, lambda *xs: np.sin(k * xs[0]))
    cfg = ExperimentConfig()
    torus = shoot_torus(cfg.n)
    if name == "spiked":
        grid = PeriodicGrid((1.0, 1.0), (args.cells, args.cells))
        f, _ = build_spiked_u0(grid, scale_torus(torus, cfg.t1_outer, cfg.eps))
        return f
    layout = SlabLayout(ell=cfg.t2_ell, m_max=cfg.t2_m_max)
    D = cfg.t2_half_width
    if name == "phi0":
        grid = PeriodicGrid((2 * D,), (args.cells,), (-D,))
        return ScalarField(grid, build_phi0(layout, grid.axis(0)))
    grid = PeriodicGrid((2 * D, 1.0), (args.cells, max(8, round(args.cells / (2 * D)))), (-D, -0.5))
    f, _, _ = build_w0(grid, layout, scale_torus(torus, cfg.t2_outer, cfg.eps))
    return f


def cmd_run(args) -> int:
    if args.snapshot:
        field, t0 = read_snapshot(args.snapshot)
    else:
        field, t0 = _build(args), 0.0
    if args.flow == "csf" and field.grid.dim != 1:
        print("csf needs 1-D data", file=sys.stderr)
        return EXIT_USAGE
    t_end = t0 + args.t_end if args.snapshot else args.t_end
    params = FlowParams(args.flow, t_end, args.cfl, args.record_every, args.dt_cap, args.mixed_stencil)
    probes = [tuple(float(c) for c in p.split(",")) for p in args.probe or ()]
    out = _out_dir(args.out, None, "run")
    out.mkdir(parents=True, exist_ok=True)
    write_snapshot(out / f"snapshot_t{t0:.5f}.txt", field, t0)
    final, ts = run(field, params, probes=probes, t_start=t0)
    write_snapshot(out / f"snapshot_t{t_end:.5f}.txt", final, t_end)
    ts.to_csv(out / "series.csv")
    resolved = {k: v for k, v in vars(args).items() if k not in ("func",)}
    (out / "resolved.config").write_text("".join(f"{k}={v}\n" for k, v in resolved.items()))
    last = ts.last()
    print(f"t={last['t']:.6g} sup={last['sup']:.6g} inf={last['inf']:.6g} mean={last['mean']:.6g}")
    print(f"wrote {out / 'series.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_config_flags(p: argparse.ArgumentParser, presets: bool) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", help=f"output directory (else ${OUTPUT_ENV}, config, runs/<name>)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    if presets:
        p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter bundle")
    g = p.add_argument_group("config keys (override the file)")
    for f in fields(ExperimentConfig):
        if f.name in ("experiment", "output_dir"):
            continue
        g.add_argument("--" + f.name.replace("_", "-"), dest=f"cfg_{f.name}", metavar=type(f.default).__name__.upper())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mcflab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="progress logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shoot-torus", help="compute the shrinking torus profile")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--scale-outer", type=float)
    p.add_argument("--scale-height", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_shoot_torus)

    p = sub.add_parser("validate", help="exact-solution checks of the solvers")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("theorem1", help="periodic spikes: MCF vs heat limits")
    _add_config_flags(p, presets=False)
    p.set_defaults(func=cmd_theorem1)

    p = sub.add_parser("theorem2", help="slab data: barriers and oscillation")
    _add_config_flags(p, presets=True)
    p.set_defaults(func=cmd_theorem2)

    p = sub.add_parser("run", help="single flow from a builder or snapshot")
    p.add_argument("--flow", choices=("mcf", "heat", "csf"), required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builder", choices=BUILDERS)
    src.add_argument("--snapshot", help="start from a snapshot file")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--cells", type=int, default=128)
    p.add_argument("--extent", type=float, default=1.0)
    p.add_argument("--value", type=float, default=0.0, help="level for the constant builder")
    p.add_argument("--t-end", type=float, default=0.05, help="duration of the run")
    p.add_argument("--cfl", type=float, default=0.9)
    p.add_argument("--record-every", type=float)
    p.add_argument("--dt-cap", type=float)
    p.add_argument("--mixed-stencil", choices=("skew", "cross"), default="skew")
    p.add_argument("--probe", action="append", metavar="X[,Y]")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ShrinkerError, InitialDataError, FlowDiverged) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
