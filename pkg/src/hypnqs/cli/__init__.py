"""Command-line interface: ``hypnqs {train,ed,evaluate,sweep,plot}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical abort,
3 resource guard.  ``HYPNQS_OUTPUT_ROOT`` sets the default output root.
"""
import os

# Runs are single-threaded so that outputs are reproducible bit for bit.
# This has to happen before numpy loads its BLAS.
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse  # noqa: E402
import sys  # noqa: E402

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_GUARD = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    from ..config import PRESETS
    from ..grad import VARIANTS
    from .plot import STYLES

    p = _Parser(prog="hypnqs", description="Hyperbolic recurrent neural quantum states for Heisenberg chains.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="train a wavefunction and run final inference")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON experiment config")
    src.add_argument("--preset", choices=PRESETS)
    t.add_argument("--variant", choices=VARIANTS, help="override the model variant")
    t.add_argument("--seed", type=int, help="override the seed")
    t.add_argument("--epochs", type=int, help="override the epoch cap")
    t.add_argument("--j2", type=float)
    t.add_argument("--j3", type=float)
    t.add_argument("--out", help="run directory (default: $HYPNQS_OUTPUT_ROOT/<name>)")
    t.add_argument("--quiet", action="store_true")

    e = sub.add_parser("ed", help="exact ground-state energy of a short chain")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--j1", type=float, default=1.0)
    e.add_argument("--j2", type=float, default=0.0)
    e.add_argument("--j3", type=float, default=0.0)
    e.add_argument("--method", choices=("auto", "dense", "lanczos"), default="auto")
    e.add_argument("--dump", help="write the ground vector as little-endian float64")

    v = sub.add_parser("evaluate", help="fresh-sample energy estimate of a checkpoint")
    v.add_argument("--checkpoint", required=True, help="checkpoint directory or run directory")
    v.add_argument("--samples", type=int, default=10000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="result file to append to (default: <run>/result.json)")

    s = sub.add_parser("sweep", help="one training run per value of a hyperparameter")
    ssrc = s.add_mutually_exclusive_group(required=True)
    ssrc.add_argument("--config")
    ssrc.add_argument("--preset", choices=PRESETS)
    s.add_argument("--variant", choices=VARIANTS)
    s.add_argument("--param", required=True, choices=("r_max", "l_max", "lr_hyperbolic"))
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--seed", type=int)
    s.add_argument("--epochs", type=int)
    s.add_argument("--out", help="sweep directory")
    s.add_argument("--quiet", action="store_true")

    g = sub.add_parser("plot", help="SVG figure from run directories")
    g.add_argument("--runs", nargs="+", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--style", choices=STYLES, default="dots")
    g.add_argument("--title")
    g.add_argument("--zoom", type=int, default=0, help="curves: inset over the last K epochs")
    return p


def main(argv=None):
    from ..errors import ConfigError, ConvergenceError, NumericalAbort, SizeGuardError
    from ..io import CheckpointError
    from . import commands

    args = build_parser().parse_args(argv)
    handler = getattr(commands, f"cmd_{args.command}")
    try:
        return handler(args) or EXIT_OK
    except (ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalAbort, ConvergenceError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SizeGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
