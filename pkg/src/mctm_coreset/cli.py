"""Command-line entry point: ``mctm-coreset <subcommand> [options]``."""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .basis import expand, fit_bounds
from .bench import ExperimentConfig, load_csv, run_experiment
from .coreset import DEFAULT_ALPHA, DEFAULT_EPSILON, METHODS, CoresetSample, build_coreset
from .dgp import PROCESSES, DgpSpec, generate, resolve_id
from .exceptions import DataLoadError, InvalidConfigError, MCTMError
from .fit import FitConfig, fit
from .model import DEFAULT_ETA, save_params
from .scores import leverage_scores, sampling_probabilities, scores_to_csv

logger = logging.getLogger("mctm_coreset")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so usage problems map to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({"level": record.levelname, "logger": record.name, "msg": record.getMessage()})


def _int_list(text):
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _methods(text):
    out = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; expected from {METHODS}")
    return out


def _dgps(text):
    if text.strip() == "all":
        return list(PROCESSES)
    try:
        return [resolve_id(v) for v in text.split(",") if v.strip()]
    except InvalidConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--degree", type=_positive_int, default=6, help="Bernstein degree (default 6)")
    common.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="hull tolerance")
    common.add_argument("--eta", type=float, default=None,
                        help="log-argument floor (default: 2 * epsilon for coreset runs, else 1e-6)")
    common.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="leverage share of k")
    common.add_argument("--out", help="output file (directory for bench and real)")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                        help="worker pool size (default: available cores)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    data = _Parser(add_help=False)
    data.add_argument("--input", required=True, help="headed CSV file")
    data.add_argument("--columns", help="names, indices or ranges such as 0-9 (default: all)")
    data.add_argument("--max-rows", type=_positive_int, help="uniform subsample size")

    fitting = _Parser(add_help=False)
    fitting.add_argument("--max-iters", type=_positive_int, default=500)
    fitting.add_argument("--tol", type=float, default=1e-6)
    fitting.add_argument("--parametrization", choices=("monotone", "raw"), default="monotone")

    parser = _Parser(prog="mctm-coreset", description="Coresets for multivariate transformation models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="draw a simulated dataset")
    p.add_argument("--dgp", required=True, help="process id 1-14 or name")
    p.add_argument("--n", type=_positive_int, default=10_000)

    sub.add_parser("expand", parents=[common, data], help="basis bounds and expansion arrays (.npz)")

    p = sub.add_parser("scores", parents=[common, data], help="leverage scores as CSV")
    p.add_argument("--score-method", choices=("auto", "exact", "sketched"), default="auto")

    p = sub.add_parser("coreset", parents=[common, data], help="build a weighted coreset")
    p.add_argument("--method", choices=METHODS, default="l2-hull")
    p.add_argument("--k", type=_positive_int, required=True)

    p = sub.add_parser("fit", parents=[common, data, fitting], help="fit the model, optionally on a coreset")
    p.add_argument("--coreset", help="index,weight CSV produced by the coreset subcommand")

    for name, helptext in (("bench", "simulation benchmark"), ("real", "benchmark on a CSV dataset")):
        parents = [common, fitting] + ([data] if name == "real" else [])
        p = sub.add_parser(name, parents=parents, help=helptext)
        p.add_argument("--k", type=_int_list, default=[30, 100], help="comma-separated sizes")
        p.add_argument("--methods", type=_methods, default=list(METHODS))
        p.add_argument("--reps", type=_positive_int, default=10)
        p.add_argument("--no-timings", action="store_true", help="zero timing columns (byte-identical reruns)")
        if name == "bench":
            p.add_argument("--dgps", type=_dgps, default=list(PROCESSES), help="'all' or ids/names")
            p.add_argument("--n", type=_positive_int, default=10_000)
    return parser


def _validate(args):
    if not 0 < args.epsilon < 1:
        raise InvalidConfigError(f"--epsilon must lie in (0, 1), got {args.epsilon}")
    if not 0 < args.alpha <= 1:
        raise InvalidConfigError(f"--alpha must lie in (0, 1], got {args.alpha}")
    if args.eta is None:
        coreset_run = args.subcommand in ("bench", "real") or getattr(args, "coreset", None) is not None
        args.eta = 2.0 * args.epsilon if coreset_run else DEFAULT_ETA
    if args.eta < 0:
        raise InvalidConfigError(f"--eta must be nonnegative, got {args.eta}")
    if getattr(args, "tol", 1.0) <= 0:
        raise InvalidConfigError("--tol must be positive")
    if args.out is None:
        args.out = _default_out(args.subcommand)
    parent = os.path.dirname(os.path.abspath(args.out))
    if not os.path.isdir(parent):
        raise InvalidConfigError(f"parent directory of --out does not exist: {parent}")
    for attr in ("input", "coreset"):
        path = getattr(args, attr, None)
        if path is not None and not os.path.isfile(path):
            raise InvalidConfigError(f"--{attr} file not found: {path}")


def _default_out(subcommand):
    return {
        "simulate": "simulated.csv", "expand": "expansion.npz", "scores": "scores.csv",
        "coreset": "coreset.csv", "fit": "params.json", "bench": "results", "real": "results",
    }[subcommand]


def _echo(args, path):
    doc = {k: v for k, v in sorted(vars(args).items()) if k != "verbose"}
    doc["version"] = __version__
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load(args):
    data = load_csv(args.input, args.columns, args.max_rows, args.seed)
    logger.info("loaded %d x %d from %s", data.n, data.J, args.input)
    return data


def _expansion(args, data):
    return expand(data, fit_bounds(data, args.degree))


def _fit_config(args):
    return FitConfig(max_iters=args.max_iters, tol=args.tol, parametrization=args.parametrization,
                     seed=args.seed, eta=args.eta)


def cmd_simulate(args):
    spec = DgpSpec(resolve_id(args.dgp), args.n, args.seed)
    generate(spec).to_csv(args.out)
    logger.info("wrote %d rows of %s to %s", spec.n, spec.name, args.out)


def cmd_expand(args):
    ex = _expansion(args, _load(args))
    np.savez(args.out, A=ex.A, Aprime=ex.Aprime)
    with open(args.out + ".basis.json", "w", encoding="utf-8") as fh:
        json.dump(ex.config.to_dict(), fh, indent=2)
        fh.write("\n")
    logger.info("expanded %d x %d x %d into %s", ex.n, ex.J, ex.d, args.out)


def cmd_scores(args):
    ex = _expansion(args, _load(args))
    scores = leverage_scores(ex, args.score_method, seed=args.seed)
    scores_to_csv(args.out, scores, sampling_probabilities(scores))
    logger.info("leverage scores (%s, rank %d) written to %s", scores.method, scores.rank, args.out)


def cmd_coreset(args):
    ex = _expansion(args, _load(args))
    sample = build_coreset(ex, args.method, args.k, seed=args.seed, alpha=args.alpha, epsilon=args.epsilon)
    sample.to_csv(args.out, args.out + ".meta.json")
    logger.info("%s coreset: %d points (k=%d) in %.3fs -> %s", args.method, len(sample), args.k,
                sample.sample_time_s, args.out)


def cmd_fit(args):
    data = _load(args)
    ex = _expansion(args, data)
    weights = None
    if args.coreset is not None:
        sample = CoresetSample.from_csv(args.coreset)
        if sample.indices.size and (sample.indices.min() < 0 or sample.indices.max() >= ex.n):
            raise DataLoadError(f"{args.coreset}: indices out of range for {ex.n} rows")
        ex, weights = ex.subset(sample.indices), sample.weights
    result = fit(ex, weights, _fit_config(args))
    save_params(args.out, result.params, ex.config)
    logger.info("fit %s after %d iterations, loss %.6g -> %s", result.status, result.iterations,
                result.loss.total, args.out)


def _bench_config(args, datasets):
    return ExperimentConfig(
        datasets=datasets, n=getattr(args, "n", 0) or 1, ks=args.k, methods=args.methods, reps=args.reps,
        seed=args.seed, degree=args.degree, alpha=args.alpha, epsilon=args.epsilon, eta=args.eta,
        max_iters=args.max_iters, tol=args.tol, parametrization=args.parametrization,
        threads=args.threads, record_timings=not args.no_timings,
    )


def cmd_bench(args):
    config = _bench_config(args, args.dgps)
    report = run_experiment(config)
    paths = report.write(args.out)
    logger.info("wrote %s", ", ".join(sorted(paths.values())))


def cmd_real(args):
    data = _load(args)
    name = os.path.splitext(os.path.basename(args.input))[0]
    report = run_experiment(_bench_config(args, (name,)), {name: data})
    paths = report.write(args.out, prefix="real")
    logger.info("wrote %s", ", ".join(sorted(paths.values())))


COMMANDS = {
    "simulate": cmd_simulate, "expand": cmd_expand, "scores": cmd_scores, "coreset": cmd_coreset,
    "fit": cmd_fit, "bench": cmd_bench, "real": cmd_real,
}


def main(argv=None):
    """Run the CLI; returns 0 on success, 1 on configuration errors and 2 on runtime failures."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonFormatter())
    logger.handlers[:] = [handler]
    logger.propagate = False
    try:
        args = build_parser().parse_args(argv)
        logger.setLevel(logging.DEBUG if args.verbose else logging.INFO)
        _validate(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except InvalidConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    try:
        if args.subcommand in ("bench", "real"):
            os.makedirs(args.out, exist_ok=True)
            _echo(args, os.path.join(args.out, f"{args.subcommand}_cli.json"))
        else:
            _echo(args, args.out + ".config.json")
        COMMANDS[args.subcommand](args)
    except (InvalidConfigError, DataLoadError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (MCTMError, OSError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.error("run failed: %s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
