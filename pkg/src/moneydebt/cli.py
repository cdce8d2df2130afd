"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 runtime numerical error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import ModelError, ParseError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_run(args) -> int:
    from .scenario import export_series, parse_scenario, run_scenario

    config = parse_scenario(_read(args.config))
    formats = [args.format] if args.format else list(config.outputs)
    result = run_scenario(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = {"csv": "csv", "jsonl": "jsonl"}
    for fmt in formats:
        path = out / f"{config.name}.{ext[fmt]}"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(export_series(result, fmt))
        print(path)
    print(f"norm_drift {result.metadata['norm_drift']:.3e}  config_hash {result.metadata['config_hash'][:16]}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .scenario import parse_scenario

    config = parse_scenario(_read(args.config))
    print(f"{args.config}: ok ({config.name}, hash {config.config_hash()[:16]})")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    from .scenario import parse_scenario, spectrum

    for e in spectrum(parse_scenario(_read(args.config))):
        print(format(e, ".17g"))
    return EXIT_OK


def cmd_exciton1d(args) -> int:
    from .exciton1d import solve_eigen, write_wavefunctions_csv
    from .scenario import parse_exciton_config

    cfg = parse_exciton_config(_read(args.config), Path(args.config).parent)
    result = solve_eigen(cfg.grid, cfg.potential, cfg.mass, cfg.n_states)
    for n, e in enumerate(result.energies):
        print(f"{n} {e:.17g}")
    if args.wavefunctions:
        write_wavefunctions_csv(result, args.wavefunctions)
    return EXIT_OK


def cmd_presets(args) -> int:
    from .scenario import list_presets, preset_text

    if args.action == "list":
        for name in list_presets():
            print(name)
        return EXIT_OK
    if not args.name:
        print("presets show needs a preset name", file=sys.stderr)
        return EXIT_INVALID
    try:
        sys.stdout.write(preset_text(args.name))
    except KeyError as e:
        print(e.args[0], file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all

    return EXIT_OK if run_all() else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moneydebt", description="Money/debt Fock-space simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and export its time series")
    p.add_argument("config")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--format", choices=["csv", "jsonl"], help="override the config's outputs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("spectrum", help="eigenvalues of the static Hamiltonian")
    p.add_argument("config")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("exciton1d", help="solve the 1-D exciton eigenproblem")
    p.add_argument("config")
    p.add_argument("--wavefunctions", help="write wavefunctions to this CSV")
    p.set_defaults(func=cmd_exciton1d)

    p = sub.add_parser("presets", help="list or print shipped presets")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("selftest", help="run the invariant battery")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print("validation failed:", file=sys.stderr)
        for path, msg in e.errors:
            print(f"  {path or '<document>'}: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ModelError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
