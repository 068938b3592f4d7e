"""Command-line entry point.

Exit codes: 0 success, 1 usage or I/O error, 2 a checked inequality failed.
"""

import argparse
import sys

from .contour import QuadSpec
from .errors import (
    ArgumentError,
    ContourError,
    DatasetError,
    EigenConvergenceError,
    MultipletSplitError,
    QuadratureError,
)
from .harness import (
    DEFAULT_RATIOS,
    ExperimentConfig,
    default_levels,
    dp_release,
    load_problem,
    run_beyond_gap,
    run_bound_study,
    run_metric_study,
)
from .ingest import select_rank
from .report import SCHEMA_VERSION, dumps, write_report
from .suites import run_bootstrap_suite, run_theorem_suite

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
NOISE_NAMES = {"gaussian": "wigner_gaussian", "rademacher": "rademacher"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _input_flags(sp, rank=True):
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV data file")
    src.add_argument("--synthetic", help="builtin spectrum, e.g. decay:base=0.8,n=50")
    sp.add_argument("--header", action="store_true", help="skip the first CSV line")
    sp.add_argument("--delimiter", default=",")
    sp.add_argument("--normalize-rows", action="store_true", help="divide M^T M by the row count")
    if rank:
        r = sp.add_mutually_exclusive_group()
        r.add_argument("--p", type=int)
        r.add_argument("--energy", type=float, help="Frobenius energy fraction (default 0.99)")


def _common(sp):
    _input_flags(sp)
    sp.add_argument("--noise", choices=sorted(NOISE_NAMES), default="gaussian")
    sp.add_argument("--goe-diagonal", action="store_true", help="diagonal variance 2")
    sp.add_argument("--levels", type=int, default=20, help="number of levels in (0, 1]")
    sp.add_argument("--include-zero", action="store_true", help="prepend a zero-noise level")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=_u64, default=0)
    sp.add_argument("--out", help="report path (.json or .csv); stdout if omitted")


def build_parser():
    ap = _Parser(prog="lowrank-perturb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, helptext in (("bounds-study", "actual error against the bounds per noise level"),
                           ("metric-study", "spectral, Frobenius and change-in-error metrics")):
        _common(sub.add_parser(name, help=helptext))

    bg = sub.add_parser("beyond-gap", help="bounds at calibrated ||E||/delta_p ratios")
    _common(bg)
    bg.add_argument("--ratios", type=lambda s: [float(x) for x in s.split(",")],
                    default=list(DEFAULT_RATIOS))

    bs = sub.add_parser("bootstrap-suite", help="contour bootstrapping and segment lemmas")
    bs.add_argument("--instances", type=int, default=20)
    bs.add_argument("--n-max", type=int, default=12)
    bs.add_argument("--rel-tol", type=float, default=1e-6)
    bs.add_argument("--seed", type=_u64, default=0)
    bs.add_argument("--out")

    ts = sub.add_parser("theorem-suite", help="every bound on mixed random trials")
    ts.add_argument("--trials", type=int, default=1000)
    ts.add_argument("--n-max", type=int, default=50)
    ts.add_argument("--seed", type=_u64, default=0)
    ts.add_argument("--out")

    dp = sub.add_parser("dp-release", help="Gaussian-mechanism rank-p release")
    _input_flags(dp)
    dp.add_argument("--epsilon", type=float, required=True)
    dp.add_argument("--delta", type=float, required=True)
    dp.add_argument("--sensitivity", type=float, default=1.0)
    dp.add_argument("--noise", choices=sorted(NOISE_NAMES), default="gaussian")
    dp.add_argument("--seed", type=_u64, default=0)
    dp.add_argument("--out")

    rs = sub.add_parser("rank-select", help="smallest p reaching a Frobenius energy fraction")
    _input_flags(rs, rank=False)
    rs.add_argument("--energy", type=float, default=0.99)
    rs.add_argument("--out")
    return ap


def _config(args):
    return ExperimentConfig(
        input=args.input,
        synthetic=args.synthetic,
        p=args.p,
        energy=args.energy,
        noise_kind=NOISE_NAMES[args.noise],
        levels=default_levels(args.levels, args.include_zero),
        trials=args.trials,
        seed=args.seed,
        header=args.header,
        delimiter=args.delimiter,
        normalize_rows=args.normalize_rows,
        goe_diagonal=args.goe_diagonal,
    )


def _emit(report, out):
    if out:
        if out.endswith(".csv") and "levels" not in report:
            raise ArgumentError("CSV output is only available for per-level studies")
        write_report(report, out)
    else:
        sys.stdout.write(dumps(report))


def _run(args):
    cmd = args.command
    if cmd == "bounds-study":
        report = run_bound_study(_config(args))
        bad = report["violations"]
    elif cmd == "metric-study":
        report = run_metric_study(_config(args))
        bad = report["violations"]
    elif cmd == "beyond-gap":
        report = run_beyond_gap(_config(args), args.ratios)
        bad = report["violations"]
    elif cmd == "bootstrap-suite":
        report = run_bootstrap_suite(args.instances, args.seed, args.n_max,
                                     q=QuadSpec(rel_tol=args.rel_tol))
        bad = report["failures"]
    elif cmd == "theorem-suite":
        report = run_theorem_suite(args.trials, args.seed, args.n_max)
        bad = report["violations"]
    elif cmd == "dp-release":
        cfg = ExperimentConfig(input=args.input, synthetic=args.synthetic, p=args.p,
                               energy=args.energy, header=args.header,
                               delimiter=args.delimiter, normalize_rows=args.normalize_rows)
        prob = load_problem(cfg)
        released, cert = dp_release(prob.A, prob.p, args.epsilon, args.delta,
                                    args.sensitivity, args.seed, NOISE_NAMES[args.noise])
        report = {"schema": SCHEMA_VERSION, "kind": "dp-release", "p": prob.p,
                  "epsilon": args.epsilon, "delta": args.delta,
                  "sensitivity": args.sensitivity, "seed": args.seed,
                  "released": released.tolist(), "certificate": cert.to_dict()}
        bad = []
    else:
        cfg = ExperimentConfig(input=args.input, synthetic=args.synthetic, p=1,
                               header=args.header, delimiter=args.delimiter,
                               normalize_rows=args.normalize_rows)
        sel = select_rank(load_problem(cfg).S, args.energy)
        report = {"schema": SCHEMA_VERSION, "kind": "rank-select", "p": sel.p,
                  "energy_fraction": sel.energy_fraction,
                  "achieved_fraction": sel.achieved_fraction}
        bad = []
    _emit(report, args.out)
    if bad:
        sys.stderr.write(f"{len(bad)} inequality check(s) failed\n")
        return EXIT_VIOLATION
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ArgumentError, DatasetError, OSError, EigenConvergenceError,
            MultipletSplitError, ContourError, QuadratureError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
