"""Command-line entry point: ``dynaquant run|check-algebra|dequantize``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..dynquant import dequantize_coefficients
from .algebra import check_algebra
from .config import ConfigError, load_config
from .scenarios import read_generator_dump, run_scenario

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynaquant",
                                     description="Dynamical quantization of classical phase-space generators.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a JSON config")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    run.add_argument("--seed", type=int, help="override the config seed")

    chk = sub.add_parser("check-algebra", help="verify operator and superoperator identities")
    chk.add_argument("--n", type=int, default=32)
    chk.add_argument("--profile", choices=("default", "strict"), default="default")
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--out", type=Path, help="directory for algebra_report.txt")

    deq = sub.add_parser("dequantize", help="recover QP-form coefficients from a generator dump")
    deq.add_argument("dump", type=Path)
    deq.add_argument("--degree", type=int, default=3)
    deq.add_argument("--cutoff", type=float, default=1e-10)
    deq.add_argument("--out", type=Path, help="directory for dequantized.txt")
    return parser


def _emit(text: str, out: Path | None, name: str) -> None:
    sys.stdout.write(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            if args.seed is not None:
                if args.seed < 0:
                    raise ConfigError("seed", "must be non-negative")
                cfg.seed = args.seed
            result = run_scenario(cfg, args.out)
            for key in sorted(result.files):
                print(f"{key}: {result.files[key]}")
            return 0
        if args.command == "check-algebra":
            rep = check_algebra(args.n, args.profile, args.seed)
            _emit(rep.text(), args.out, "algebra_report.txt")
            return 0 if rep.all_passed else 1
        if args.command == "dequantize":
            gen = read_generator_dump(args.dump)
            keys, coeffs, residual = dequantize_coefficients(gen.space, gen, args.degree)
            lines = [f"# degree {args.degree} N={gen.space.dim} residual={residual:.3e}",
                     "# coeff_re coeff_im q p dq dp"]
            for k, c in zip(keys, coeffs):
                if abs(c) >= args.cutoff:
                    lines.append(f"{c.real:.17g} {c.imag:.17g} {k[0]} {k[1]} {k[2]} {k[3]}")
            _emit("\n".join(lines) + "\n", args.out, "dequantized.txt")
            return 0
    except (ConfigError, ValueError, OSError) as exc:
        print(f"dynaquant: error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
