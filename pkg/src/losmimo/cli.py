"""Command-line front end.

Usage::

    losmimo simulate --config exp.ini [--seed S] [--trials N] [--drops D] [--out DIR] [--workers W]
    losmimo plot --in a.csv b.csv --out fig.svg [--title TEXT]
    losmimo preset fig1 --out DIR [--seed S] [--trials N] [--drops D] [--workers W]
    losmimo preset --list

Exit status is 0 on success, 1 on a validation error and 2 on any other
failure.
"""

import argparse
from dataclasses import replace
import os
import re
import sys

import numpy as np

from .config import ConfigError, load_config, serialize_config
from .errors import InvalidArgumentError, SingularMatrixError
from .montecarlo import average_over_drops
from .plotting import plot_tables, read_table, render_svg
from .presets import preset, preset_names

__all__ = ["main", "run_experiment", "format_table", "write_outputs", "COLUMNS"]

COLUMNS = ("axis_value", "analytic_sinr", "rate_lower", "rate_upper", "limit_rate",
           "mc_mean", "mc_ci", "trials", "seed")


def _g(x):
    return format(float(x), ".12g")


def run_experiment(cfg, *, workers=1):
    """Run every series of ``cfg``; returns ``[(label, spec, rows), ...]``.

    All series are computed before anything is written, so an invalid
    series leaves no partial output behind.
    """
    results = []
    for label, spec in cfg.resolved():
        template = spec.template()
        rows = average_over_drops(cfg.drops, template, cfg.axis, cfg.grid, cfg.trials, cfg.seed,
                                  workers=workers, transform=cfg.grid_transform())
        results.append((label, spec, rows))
    return results


def format_table(cfg, label, spec, rows):
    """CSV text of one series, with ``#`` metadata lines carrying the seed
    and the complete resolved configuration."""
    lines = [f"# experiment: {cfg.name}",
             f"# series: {label}",
             f"# axis: {cfg.axis}",
             f"# report: {cfg.report}",
             f"# seed: {cfg.seed}"]
    lines += [f"# config: {line}" if line else "# config:" for line in serialize_config(cfg).splitlines()]
    lines.append(",".join(COLUMNS))
    for row in rows:
        users = row.K if cfg.report == "sum" else 1
        ff_scale = 1.0
        if spec.scheme == "FF" and cfg.prelog == "exclude":
            tau = spec.tau if spec.tau is not None else row.K
            ff_scale = spec.T / (spec.T - tau)
        rep = row.report
        if row.rate is None:
            mc_mean = mc_ci = float("nan")
            trials = 0
        else:
            mc_mean = row.rate.mean * users * ff_scale
            mc_ci = row.rate.ci_halfwidth * users * ff_scale
            trials = row.rate.trials
        values = (row.axis_value, rep.statistical_sinr, rep.rate_lower * users, rep.rate_upper * users,
                  rep.limit_rate * users, mc_mean, mc_ci)
        lines.append(",".join(_g(v) for v in values) + f",{trials},{cfg.seed}")
    return "\n".join(lines) + "\n"


def _slug(text):
    return re.sub(r"[^A-Za-z0-9._=-]+", "_", text).strip("_")


def write_outputs(cfg, results, out_dir, plot=True):
    """Write one CSV per series (and an SVG); returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    texts = []
    for label, spec, rows in results:
        text = format_table(cfg, label, spec, rows)
        name = cfg.name if len(results) == 1 else f"{cfg.name}__{_slug(label)}"
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        paths.append(path)
        texts.append((text, label))
    if plot:
        svg = render_svg([read_table(t, default_label=label) for t, label in texts], title=cfg.name)
        path = os.path.join(out_dir, f"{cfg.name}.svg")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
        paths.append(path)
    return paths


def _override(cfg, args):
    changes = {k: getattr(args, k) for k in ("seed", "trials", "drops") if getattr(args, k) is not None}
    return replace(cfg, **changes) if changes else cfg


def _add_run_options(p):
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per grid point; 0 = analytic only")
    p.add_argument("--drops", type=int, help="user drops averaged per grid point")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--no-plot", action="store_true", help="skip the SVG")


def build_parser():
    parser = argparse.ArgumentParser(prog="losmimo", description="Massive-MIMO LOS beamforming simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run an experiment config")
    sim.add_argument("--config", required=True)
    _add_run_options(sim)
    plot = sub.add_parser("plot", help="render CSV tables to an SVG chart")
    plot.add_argument("--in", dest="inputs", nargs="+", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--title", default="")
    pre = sub.add_parser("preset", help="run a built-in experiment")
    pre.add_argument("name", nargs="?")
    pre.add_argument("--list", action="store_true", help="list presets and exit")
    pre.add_argument("--dump", action="store_true", help="print the preset config and exit")
    _add_run_options(pre)
    return parser


def _execute(args):
    if args.command == "plot":
        plot_tables(args.inputs, args.out, title=args.title)
        return
    if args.command == "preset":
        if args.list:
            print("\n".join(preset_names()))
            return
        if not args.name:
            raise InvalidArgumentError("preset name required (see --list)")
        cfg = preset(args.name)
        if args.dump:
            sys.stdout.write(serialize_config(_override(cfg, args)))
            return
    else:
        cfg = load_config(args.config)
    cfg = _override(cfg, args)
    if args.workers < 1:
        raise InvalidArgumentError(f"workers must be >= 1, got {args.workers}")
    with np.errstate(divide="ignore", invalid="ignore"):
        results = run_experiment(cfg, workers=args.workers)
    for path in write_outputs(cfg, results, args.out, plot=not args.no_plot):
        print(path)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are validation errors here
        return 1 if exc.code else 0
    try:
        _execute(args)
    except (InvalidArgumentError, SingularMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
