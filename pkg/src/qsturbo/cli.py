"""Command line interface.

Subcommands: ``simulate``, ``analytic``, ``compare``, ``estimate-threshold``.
Options may also come from an INI file (``--config``) whose ``[qsturbo]``
section uses the long option names with dashes or underscores; options on
the command line win.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

import argparse
import configparser
import logging
import sys

import numpy as np

from .analytic import ThresholdSpec, fer_analytic_db, lookup_threshold
from .errors import ConfigError, QsturboError, SearchFailure
from .io import emit_analytic_csv, emit_csv, emit_metadata, emit_plotdata
from .sim import SimConfig, compare_codes, run_sweep
from .stbc import get_scheme
from .threshold import DEFAULT_TARGET_BER, estimate_threshold
from .trellis import CodeSpec
from .turbo import TurboConfig
from .viterbi import ViterbiConfig

EXIT_CONFIG = 2
EXIT_IO = 3


def parse_sweep(text):
    """``"0,5,10"`` or ``"start:stop:step"`` (stop inclusive) to a tuple of dB."""
    text = str(text).strip()
    if ":" in text:
        parts = [float(t) for t in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"bad sweep range {text!r}")
        start, stop, step = parts
        n = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(max(n, 0)))
    return tuple(float(t) for t in text.split(",") if t.strip())


def make_code(text, size, iterations, interleaver_seed):
    """``turbo:5/7`` or ``conv:753/561``; a bare polynomial pair means turbo."""
    family, _, poly = text.partition(":")
    if not poly:
        family, poly = "turbo", family
    family = family.strip().lower()
    spec = CodeSpec.parse(poly)
    if family == "turbo":
        return TurboConfig.make(spec, size, interleaver_seed, iterations)
    if family in ("conv", "convolutional", "viterbi"):
        return ViterbiConfig.make(spec, size)
    raise ConfigError(f"unknown code family {family!r}")


def _common(p):
    p.add_argument("--config", help="INI file with a [qsturbo] section")
    p.add_argument("--scheme", default="none", help="none, g2, g3 or g4")
    p.add_argument("--n-r", type=int, default=1, help="receive antennas")
    p.add_argument("--sweep", default="0:20:2",
                   help="Eb/N0 points in dB: 'a,b,c' or 'start:stop:step'")
    p.add_argument("--reference", default="combined",
                   choices=["combined", "per_antenna"],
                   help="whether Eb/N0 is after combining or per receive antenna")
    p.add_argument("--out", default="fer.csv", help="output CSV path")


def _sim_options(p):
    p.add_argument("--size", type=int, default=1024,
                   help="interleaver size / convolutional frame length")
    p.add_argument("--iterations", type=int, default=7)
    p.add_argument("--interleaver-seed", type=int, default=0)
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--max-frames", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--threshold", type=float, default=None,
                   help="convergence threshold in dB for the analytic overlay")
    p.add_argument("--llr-scaling", default="exact", choices=["exact", "printed"])
    p.add_argument("--plotdata", default=None, help="also write plot data here")
    p.add_argument("--metadata", default=None,
                   help="JSON metadata path (default: <out>.meta.json)")


def build_parser():
    parser = argparse.ArgumentParser(prog="qsturbo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo FER sweep of one code")
    _common(p)
    _sim_options(p)
    p.add_argument("--code", default="turbo:5/7")

    p = sub.add_parser("compare", help="paired sweep of two codes on common channels")
    _common(p)
    _sim_options(p)
    p.add_argument("--code-a", default="turbo:5/7")
    p.add_argument("--code-b", default="conv:753/561")

    p = sub.add_parser("analytic", help="threshold-model FER curve")
    _common(p)
    p.add_argument("--code", default="5/7",
                   help="constituent polynomials used to look up the threshold")
    p.add_argument("--threshold", type=float, default=None,
                   help="threshold in dB (overrides the table)")

    p = sub.add_parser("estimate-threshold", help="AWGN bisection for the BER waterfall")
    p.add_argument("--config")
    p.add_argument("--code", default="turbo:5/7")
    p.add_argument("--size", type=int, default=4096)
    p.add_argument("--iterations", type=int, default=7)
    p.add_argument("--interleaver-seed", type=int, default=0)
    p.add_argument("--target-ber", type=float, default=DEFAULT_TARGET_BER)
    p.add_argument("--window", default="0,2", help="low,high in dB")
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--frames", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _apply_config_file(parser, argv):
    """Re-parse with defaults taken from the ``--config`` file, if any."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cp = configparser.ConfigParser()
    try:
        with open(args.config, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise OSError(f"cannot read config file {args.config}: {exc}") from exc
    if not cp.has_section("qsturbo"):
        raise ConfigError(f"{args.config} has no [qsturbo] section")
    known = vars(args)
    extra = []
    for key, value in cp.items("qsturbo"):
        dest = key.replace("-", "_")
        if dest not in known or dest in ("command", "config"):
            raise ConfigError(f"unknown config key {key!r}")
        extra += [f"--{dest.replace('_', '-')}", value]
    # file values first so explicit command line options override them
    cmd_index = argv.index(args.command)
    return parser.parse_args(argv[:cmd_index + 1] + extra + argv[cmd_index + 1:])


def _sim_config(args, code):
    th = args.threshold
    return SimConfig(
        code=code,
        scheme=args.scheme,
        n_r=args.n_r,
        sweep=parse_sweep(args.sweep),
        min_frame_errors=args.min_errors,
        max_frames=args.max_frames,
        master_seed=args.seed,
        workers=args.workers,
        threshold="auto" if th is None else ThresholdSpec(th, "user"),
        reference=args.reference,
        llr_scaling=args.llr_scaling,
    )


def _write_sweep(result, args, out=None):
    out = out or args.out
    emit_csv(result, out)
    emit_metadata(result, args.metadata or f"{out}.meta.json")


def cmd_simulate(args):
    code = make_code(args.code, args.size, args.iterations, args.interleaver_seed)
    result = run_sweep(_sim_config(args, code))
    _write_sweep(result, args)
    if args.plotdata:
        emit_plotdata({"sim": result}, args.plotdata)
    print(f"wrote {args.out}")


def cmd_compare(args):
    code_a = make_code(args.code_a, args.size, args.iterations, args.interleaver_seed)
    code_b = make_code(args.code_b, args.size, args.iterations, args.interleaver_seed)
    res_a, res_b = compare_codes(_sim_config(args, code_a), _sim_config(args, code_b),
                                 seed=args.seed)
    stem = args.out[:-4] if args.out.endswith(".csv") else args.out
    out_a, out_b = f"{stem}_a.csv", f"{stem}_b.csv"
    emit_csv(res_a, out_a)
    emit_csv(res_b, out_b)
    emit_metadata(res_a, f"{stem}.meta.json",
                  extra={"paired_with": res_b.metadata, "pairing": "common random numbers"})
    if args.plotdata:
        emit_plotdata({"a": res_a, "b": res_b}, args.plotdata)
    print(f"wrote {out_a} and {out_b}")


def cmd_analytic(args):
    scheme = get_scheme(args.scheme)
    if args.threshold is not None:
        th = ThresholdSpec(args.threshold, "user")
    else:
        th = lookup_threshold(args.code)
        if th is None:
            raise ConfigError(f"no tabulated threshold for {args.code}; pass --threshold")
    sweep = np.array(parse_sweep(args.sweep))
    if sweep.size == 0:
        raise ConfigError("sweep must contain at least one Eb/N0 point")
    if args.reference == "per_antenna":
        mean_db = sweep + 10 * np.log10(args.n_r)
    else:
        mean_db = sweep
    fer = fer_analytic_db(mean_db, th, scheme.n_t * args.n_r)
    emit_analytic_csv(sweep, np.atleast_1d(fer), args.out)
    print(f"wrote {args.out}")


def cmd_estimate(args):
    code = make_code(args.code, args.size, args.iterations, args.interleaver_seed)
    try:
        lo, hi = (float(t) for t in args.window.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad window {args.window!r}") from exc
    spec = estimate_threshold(code, args.target_ber, (lo, hi), args.tolerance,
                              args.frames, args.seed)
    print(f"{code.describe()}: threshold {spec.gamma_th_db:.3f} dB "
          f"(+/- {args.tolerance / 2:.3f} dB, {spec.provenance})")


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "analytic": cmd_analytic,
    "estimate-threshold": cmd_estimate,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except SearchFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QsturboError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
