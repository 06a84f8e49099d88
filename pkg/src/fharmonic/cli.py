"""Command-line entry point.

    fharmonic run <config.toml> [--out DIR]
    fharmonic catalog list
    fharmonic catalog run <name> [--out DIR]
    fharmonic plot <sweep.csv> <plot.svg>

Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 on a
configuration or input error.  ``FHARMONIC_THREADS`` sets the number of
worker threads for the compiled kernels.
"""
import argparse
from importlib import resources
import os
import sys

from . import _kernels
from .errors import ConfigurationError
from .plot import emit_plot
from .report import run_built
from .scenario import build, load_scenario, parse_scenario

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
THREADS_ENV = "FHARMONIC_THREADS"


def catalog_names():
    files = resources.files("fharmonic").joinpath("scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def catalog_text(name):
    path = resources.files("fharmonic").joinpath("scenarios", f"{name}.toml")
    if not path.is_file():
        raise ConfigurationError(f"{name}:0: no built-in scenario named {name!r}; "
                                 "see 'fharmonic catalog list'")
    return path.read_text(encoding="utf-8")


def _default_out(name):
    return os.path.join("fharmonic-out", name)


def _run(sc, out_dir):
    built = build(sc)
    outcome = run_built(built, out_dir)
    for line in outcome.summary_lines:
        print(line)
    print(f"output: {out_dir}")
    return EXIT_OK if outcome.passed else EXIT_FAIL


def cmd_run(args):
    sc = load_scenario(args.config)
    out = args.out
    if out is None:
        given = sc.get("output_dir")
        out = (os.path.join(os.path.dirname(os.path.abspath(args.config)), given)
               if given else _default_out(sc.name))
    return _run(sc, out)


def cmd_catalog(args):
    if args.action == "list":
        for name in catalog_names():
            sc = parse_scenario(catalog_text(name), f"{name}.toml")
            desc = sc.get("description", "")
            print(f"{name:40s} expect {sc.expect:18s} {desc}")
        return EXIT_OK
    if not args.name:
        raise ConfigurationError("catalog:0: 'catalog run' needs a scenario name")
    sc = parse_scenario(catalog_text(args.name), f"{args.name}.toml")
    return _run(sc, args.out or _default_out(sc.name))


def cmd_plot(args):
    emit_plot(args.csv, args.svg)
    print(f"wrote {args.svg}")
    return EXIT_OK


def parser():
    ap = argparse.ArgumentParser(prog="fharmonic",
                                 description="F-energy of maps into spheres along conformal flows")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a scenario config file")
    p.add_argument("config")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("catalog", help="list or run built-in scenarios")
    p.add_argument("action", choices=("list", "run"))
    p.add_argument("name", nargs="?")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_catalog)
    p = sub.add_parser("plot", help="plot E(t) from a sweep CSV as SVG")
    p.add_argument("csv")
    p.add_argument("svg")
    p.set_defaults(func=cmd_plot)
    return ap


def _threads():
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return
    try:
        count = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV}:0: expected a positive integer, got {raw!r}") from None
    if count < 1:
        raise ConfigurationError(f"{THREADS_ENV}:0: expected a positive integer, got {raw!r}")
    _kernels.set_threads(count)


def main(argv=None):
    ap = parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        _threads()
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
