"""Command-line entry point: ``capbayes <subcommand> --config PATH [--out DIR] [--set k=v ...]``.

Exit status is 0 on success, 2 when the config cannot be read or fails
validation, and 1 when the experiment itself fails.
"""
import argparse
import logging
import os
import sys
from importlib import resources

from . import __version__
from .config import ConfigError, load_config
from .harness import run_experiment

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

SUBCOMMAND_KINDS = {
    "rd-curve": ("rd-curve",),
    "marginal-sweep": ("marginal-sweep",),
    "run": None,  # any kind
}


def bundled_configs():
    root = resources.files("capbayes") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_config(path):
    """A filesystem path, or the name of a bundled config (with or without ``.json``)."""
    if os.path.exists(path):
        return path
    name = path[:-5] if path.endswith(".json") else path
    if os.sep not in name and name in bundled_configs():
        return str(resources.files("capbayes") / "configs" / f"{name}.json")
    return path


def build_parser():
    parser = argparse.ArgumentParser(prog="capbayes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def with_config(p, outputs=True):
        p.add_argument("--config", required=True, metavar="PATH",
                       help="JSON config file or bundled config name")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field (dotted path, repeatable)")
        p.add_argument("--seeds", type=int, metavar="N", help="shorthand for seeds = [0, ..., N-1]")
        if outputs:
            p.add_argument("--out", metavar="DIR", help="output directory (default: config 'out')")

    with_config(sub.add_parser("run", help="run any experiment config"))
    with_config(sub.add_parser("rd-curve", help="trace BLASTS and STS rate-distortion curves"))
    with_config(sub.add_parser("marginal-sweep", help="BLASTS marginal action probabilities vs lambda"))
    with_config(sub.add_parser("validate-config", help="parse and validate a config"), outputs=False)
    sub.add_parser("version", help="print the package version")
    return parser


def _load(args):
    path = resolve_config(args.config)
    if not os.path.isfile(path):
        raise ConfigError("--config", f"cannot read config file {args.config!r}: no such file")
    if args.seeds is not None and args.seeds < 1:
        raise ConfigError("--seeds", "must be at least 1")
    try:
        return load_config(path, args.overrides, args.seeds)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read config file {args.config!r}: {exc.strerror}") from exc


def _prepare_out(out):
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out!r}: {exc.strerror}") from exc
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out!r} is not writable")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "version":
        print(f"capbayes {__version__}")
        return EXIT_OK
    try:
        cfg = _load(args)
    except ValueError as exc:  # ConfigError, or a value rejected by an agent config
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    allowed = SUBCOMMAND_KINDS.get(args.command)
    if allowed and cfg.kind not in allowed:
        print(f"config error: field 'kind': {args.command} needs kind {allowed[0]!r}, got {cfg.kind!r}",
              file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate-config":
        print("OK")
        return EXIT_OK
    out = args.out or cfg.out
    try:
        _prepare_out(out)
        result = run_experiment(cfg, out, args.overrides + ([f"--seeds {args.seeds}"] if args.seeds else []))
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    failures = getattr(result, "failures", [])
    if failures:
        for f in failures:
            print(f"runtime error: {f}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote outputs to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
