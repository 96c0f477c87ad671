"""
Command-line surface: every subcommand reads a JSON cocycle file and writes one CSV
report to standard output.

    python cli.py radii golden.json --s 1 1.5 --depth 14 --orbits 8

Exit codes: 0 success, 2 invalid input, 3 desk-scale envelope exceeded
(rerun with --force), 4 internal consistency violation or numeric failure.
"""
import argparse
import logging
import sys

import matplotlib.pyplot as plt
import pandas as pd
import wandb
from tqdm import tqdm

from cocycle_file import SpecFileError, parse_spec, read_document
from compact_ops import spectral_convergence
from dynamics import cycle_product, periodic_orbits, sample_trajectory, uniform_weights
from linalg_core import rho_s
from radii import bracket, continuity_probe, kingman_estimate, orbit_contribution
from utils import DomainError, InternalConsistencyError, NumericError, word_label

log = logging.getLogger(__name__)

MAX_ALPHABET = 4
MAX_DIM = 8
MAX_WINDOW = 3
MAX_DEPTH = 16
MAX_ORBITS = 10

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ENVELOPE = 3
EXIT_INTERNAL = 4


class EnvelopeError(DomainError):
    """Raised when an input is larger than the desk-scale envelope and --force is not set."""


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def parse_arguments(argv=None):
    """
    Parse command-line arguments for the script.

    Returns:
        args: Parsed arguments as a namespace, with args.handler set to the subcommand.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", type=str, help="JSON cocycle file.")
    common.add_argument("--force", action="store_true", help="Run even when the input exceeds the desk-scale envelope")
    common.add_argument("--verbose", action="store_true", help="Log progress to standard error")

    parser = argparse.ArgumentParser(description="Brackets for the s-joint spectral radius of cocycles over subshifts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radii", parents=[common], help="Bracket per value of s.")
    p.add_argument("--s", type=positive_float, nargs="+", default=[1.0], help="Values of s (default: 1).")
    p.add_argument("--depth", type=positive_int, default=8, help="Word depth n of the upper bound (default: 8).")
    p.add_argument("--orbits", type=positive_int, default=4, help="Maximal period K of the lower bound (default: 4).")
    p.add_argument("--prune", action="store_true", help="Skip cycles that cannot beat the current lower bound")
    p.set_defaults(handler=cmd_radii)

    p = sub.add_parser("berger-wang", parents=[common], help="Gap table along increasing (depth, orbits) pairs.")
    p.add_argument("--s", type=positive_float, default=1.0, help="Value of s (default: 1).")
    p.add_argument("--depths", type=positive_int, nargs="+", required=True, help="Depths n, non-decreasing.")
    p.add_argument("--orbits", type=positive_int, nargs="+", default=[4], help="Periods K, one per depth or a single value.")
    p.add_argument("--plot", type=str, default=None, help="Save a gap-vs-depth figure to this path")
    p.add_argument("--wandb", action="store_true", help="Log the gap table to wandb")
    p.set_defaults(handler=cmd_berger_wang)

    p = sub.add_parser("continuity", parents=[common], help="Brackets along A + eps B.")
    p.add_argument("--direction", type=str, required=True, help="JSON cocycle file of the direction B.")
    p.add_argument("--s", type=positive_float, default=1.0, help="Value of s (default: 1).")
    p.add_argument("--eps", type=positive_float, nargs="+", default=[0.1, 0.01, 0.001], help="Strictly decreasing eps values.")
    p.add_argument("--alpha", type=positive_float, default=None, help="Hoelder exponent (default: alpha of the direction file).")
    p.add_argument("--depth", type=positive_int, default=8, help="Word depth n of the upper bound (default: 8).")
    p.add_argument("--orbits", type=positive_int, default=4, help="Maximal period K of the lower bound (default: 4).")
    p.add_argument("--plot", type=str, default=None, help="Save a drift-vs-eps figure to this path")
    p.set_defaults(handler=cmd_continuity)

    p = sub.add_parser("orbits", parents=[common], help="Periodic orbits and their lower-bound contributions.")
    p.add_argument("--max-period", type=positive_int, required=True, help="Largest period K.")
    p.add_argument("--s", type=positive_float, nargs="+", default=[1.0], help="Values of s; rows sort by the first.")
    p.set_defaults(handler=cmd_orbits)

    p = sub.add_parser("truncate", parents=[common], help="rho_s of finite sections of a compact model.")
    p.add_argument("--ranks", type=positive_int, nargs="+", required=True, help="Strictly increasing ranks m.")
    p.add_argument("--s", type=positive_float, default=1.0, help="Value of s (default: 1).")
    p.set_defaults(handler=cmd_truncate)

    p = sub.add_parser("kingman", parents=[common], help="Subadditive averages along a sampled Markov trajectory.")
    p.add_argument("--s", type=positive_float, nargs="+", default=[1.0], help="Values of s (default: 1).")
    p.add_argument("--length", type=positive_int, required=True, help="Number of cocycle steps to sample.")
    p.add_argument("--checkpoints", type=positive_int, nargs="+", default=None, help="Step counts to report (default: length).")
    p.add_argument("--seed", type=int, required=True, help="Seed of the trajectory sampler.")
    p.set_defaults(handler=cmd_kingman)

    return parser.parse_args(argv)


def check_envelope(args, A, depth=None, orbits=None):
    if args.force:
        return
    limits = [
        ("alphabet", A.subshift.alphabet_size, MAX_ALPHABET),
        ("dim", A.dim, MAX_DIM),
        ("window", A.window, MAX_WINDOW),
        ("depth", depth, MAX_DEPTH),
        ("orbits", orbits, MAX_ORBITS),
    ]
    for name, value, limit in limits:
        if value is not None and value > limit:
            raise EnvelopeError(f"{name} = {value} exceeds the envelope limit {limit}; use --force")


def check_document_envelope(args, doc):
    """Applies the alphabet and window limits to a raw cocycle document, before its window words are enumerated."""
    if args.force or not isinstance(doc, dict):
        return
    for name, limit in (("alphabet", MAX_ALPHABET), ("window", MAX_WINDOW)):
        value = doc.get(name)
        if isinstance(value, int) and not isinstance(value, bool) and value > limit:
            raise EnvelopeError(f"{name} = {value} exceeds the envelope limit {limit}; use --force")


def load_checked(args, path):
    doc = read_document(path)
    check_document_envelope(args, doc)
    return parse_spec(doc)


def progress(iterable, args):
    return tqdm(iterable, disable=not args.verbose, file=sys.stderr, leave=False)


def emit(df):
    df.to_csv(sys.stdout, index=False, float_format="%.17g", lineterminator="\n")


def save_plot(df, x, columns, path, title, logx=False):
    fig, ax = plt.subplots()
    for column in columns:
        ax.plot(df[x], df[column], marker="o", label=column)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(x)
    ax.set_title(title)
    ax.legend()
    fig.savefig(path, dpi=300, bbox_inches="tight")
    plt.close(fig)


def log_wandb(df, args):
    wandb.init(project="cocycle-radii", name=f"berger-wang s={args.s:g}", config={"file": args.file, "s": args.s})
    for row in df.itertuples(index=False):
        wandb.log({"depth": row.n, "orbits": row.K, "lower": row.lower, "upper": row.upper, "gap": row.gap})
    wandb.log({"gap_table": wandb.Table(dataframe=df)})
    wandb.finish()


def cmd_radii(args):
    A = load_checked(args, args.file).cocycle()
    check_envelope(args, A, args.depth, args.orbits)
    rows = []
    for s in progress(args.s, args):
        b = bracket(A, A.subshift, s, args.depth, args.orbits, prune=args.prune)
        rows.append({
            "s": b.s,
            "lower": b.lower,
            "lower_witness_cycle": word_label(b.lower_witness),
            "upper": b.upper,
            "upper_witness_word": word_label(b.upper_witness),
            "gap": b.gap,
            "depth": b.depth,
            "K": b.horizon,
        })
    return pd.DataFrame(rows)


def cmd_berger_wang(args):
    A = load_checked(args, args.file).cocycle()
    depths = args.depths
    orbits = args.orbits * len(depths) if len(args.orbits) == 1 else args.orbits
    if len(orbits) != len(depths):
        raise DomainError(f"--orbits needs 1 or {len(depths)} values, got {len(orbits)}")
    pairs = list(zip(depths, orbits))
    if any(n2 < n1 or k2 < k1 for (n1, k1), (n2, k2) in zip(pairs, pairs[1:])):
        raise DomainError("(depth, orbits) pairs must be non-decreasing")
    check_envelope(args, A, max(depths), max(orbits))

    rows = []
    for n, K in progress(pairs, args):
        b = bracket(A, A.subshift, args.s, n, K)
        rows.append({"n": n, "K": K, "lower": b.lower, "upper": b.upper, "gap": b.gap})
        log.info("n=%d K=%d gap=%.6g", n, K, b.gap)
    df = pd.DataFrame(rows)
    gaps = df["gap"].tolist()
    for i in range(1, len(gaps)):
        if gaps[i] > gaps[i - 1]:
            raise InternalConsistencyError(
                f"gap grew from {gaps[i - 1]!r} to {gaps[i]!r} between pairs {pairs[i - 1]} and {pairs[i]}"
            )
    if args.plot:
        save_plot(df, "n", ["lower", "upper"], args.plot, f"Bracket vs depth, s={args.s:g}")
    if args.wandb:
        log_wandb(df, args)
    return df


def cmd_continuity(args):
    A = load_checked(args, args.file).cocycle()
    direction = load_checked(args, args.direction)
    B = direction.cocycle()
    check_envelope(args, A, args.depth, args.orbits)
    alpha = args.alpha if args.alpha is not None else direction.alpha
    report = continuity_probe(A, B, alpha, args.s, args.depth, args.orbits, args.eps)

    rows = [
        {
            "eps": e.eps,
            "lower": e.bracket.lower,
            "upper": e.bracket.upper,
            "midpoint": e.bracket.midpoint,
            "drift": e.drift,
            "holder_distance": e.holder_distance,
        }
        for e in report.entries
    ]
    df = pd.DataFrame(rows)
    if args.plot:
        save_plot(df, "eps", ["drift", "holder_distance"], args.plot, f"Midpoint drift, s={args.s:g}", logx=True)
    return df


def cmd_orbits(args):
    A = load_checked(args, args.file).cocycle()
    check_envelope(args, A, orbits=args.max_period)
    rows = []
    for k in progress(range(1, args.max_period + 1), args):
        for orbit in periodic_orbits(A.subshift, k):
            P = cycle_product(A, orbit)
            row = {"k": k, "cycle": orbit.label}
            for s in args.s:
                row[f"rho_{s:g}"] = rho_s(P, s)
                row[f"value_{s:g}"] = orbit_contribution(P, s, k)
            rows.append(row)
    df = pd.DataFrame(rows)
    return df.sort_values(f"value_{args.s[0]:g}", ascending=False, kind="stable").reset_index(drop=True)


def cmd_truncate(args):
    spec = load_checked(args, args.file)
    model = spec.model()
    rows = spectral_convergence(model, args.s, args.ranks)
    return pd.DataFrame([{"m": r.rank, "rho_s": r.rho_s, "error_bound": r.error_bound} for r in rows])


def cmd_kingman(args):
    A = load_checked(args, args.file).cocycle()
    check_envelope(args, A)
    checkpoints = args.checkpoints or [args.length]
    if args.seed < 0:
        raise DomainError(f"--seed must be non-negative, got {args.seed}")
    if max(checkpoints) > args.length:
        raise DomainError(f"checkpoint {max(checkpoints)} exceeds --length {args.length}")
    S = A.subshift
    word = sample_trajectory(S, uniform_weights(S), args.length + A.window - 1, args.seed)
    rows = []
    for s in progress(args.s, args):
        for n, value in kingman_estimate(A, word, s, checkpoints):
            rows.append({"n": n, "s": s, "average": value})
    return pd.DataFrame(rows)


def main(argv=None):
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return e.code
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        df = args.handler(args)
    except EnvelopeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ENVELOPE
    except (SpecFileError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (InternalConsistencyError, NumericError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except MemoryError:
        print("internal error: out of memory; lower --depth or --orbits", file=sys.stderr)
        return EXIT_INTERNAL
    emit(df)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
