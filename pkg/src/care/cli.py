"""Command-line interface.

Subcommands: ``simulate``, ``estimate``, ``evaluate``, ``roc``,
``stability``, ``table2`` and ``replay``.  Every subcommand writes a
``manifest.json`` next to its outputs; ``care replay manifest.json``
re-runs it and checks the output digests.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clime import SCHEMES, CvConfig, cross_validate, estimate_columns, hard_threshold, symmetrize
from .compositional import check_composition, clr_transform, sample_clr_covariance, zero_replace_vc
from .exceptions import CareError, DataError, InvalidInput, NotStrictlyPositive, NumericalError
from .io import (
    read_json,
    read_matrix_csv,
    read_precision_json,
    sha256_file,
    write_edges_tsv,
    write_json,
    write_matrix_csv,
    write_precision_json,
)
from .lpsolve import solve_path
from .metrics import network_stability, recovery_report, roc_curve
from .reproduce import FIELDS, METHODS, run_study
from .simgen import MODELS, GraphModelSpec, GroundTruth, gen_omega, sample_counts, sample_logistic_normal

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC, EXIT_MISMATCH = 0, 2, 3, 4, 1
_FILE_OUTPUT = ("evaluate", "roc", "stability")

ZERO_HINT = (
    "input contains zeros; log-ratios need strictly positive data. Pass --counts-vc "
    "to treat the input as counts with the +0.5 correction, or replace zeros upstream "
    "(see 'Zeros' in the README)"
)


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("CARE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise argparse.ArgumentTypeError(f"CARE_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _fraction(s):
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {s}")
    return v


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def manifest_path(out, command):
    """``out/manifest.json`` for directory outputs, ``<stem>.manifest.json``
    beside single-file outputs."""
    out = Path(out)
    if command in _FILE_OUTPUT:
        return out.with_name(out.stem + ".manifest.json")
    return out / "manifest.json"


def _write_manifest(args, argv, inputs=(), outputs=()):
    config = {k: v for k, v in vars(args).items() if k not in ("func", "threads")}
    write_json(
        manifest_path(args.out, args.command),
        {
            "command": args.command,
            "argv": list(argv),
            "config": config,
            "version": __version__,
            "inputs": {str(p): sha256_file(p) for p in inputs},
            "outputs": {Path(p).name: sha256_file(p) for p in outputs},
        },
    )


def _cv_config(args):
    return CvConfig(
        n_folds=args.folds,
        n_grid=args.grid,
        delta=args.delta,
        seed=args.seed,
        scheme=args.cv_scheme,
        train_fraction=args.train_fraction,
    )


def _load_input(args):
    data, header = read_matrix_csv(args.input)
    if getattr(args, "mode", "care") == "oracle":
        return data, header
    if args.counts_vc:
        return clr_transform(zero_replace_vc(data)), header
    _require_positive(data)
    return clr_transform(check_composition(data)), header


def _require_positive(data):
    if np.any(data < 0):
        raise InvalidInput("negative entries are not allowed")
    if np.any(data == 0):
        raise NotStrictlyPositive(ZERO_HINT)


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args, argv):
    spec = GraphModelSpec(args.model, args.p, args.seed, args.edge_count)
    truth = gen_omega(spec)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed).spawn(1)[0])
    mean_high = args.mean_high if args.mean_high is not None else (5.0 if args.counts else 0.0)
    mu = rng.uniform(0.0, mean_high, size=args.p) if mean_high > 0 else None
    Y, X = sample_logistic_normal(truth, args.n, mu, rng)
    out = _out_dir(args)
    names = [f"x{j}" for j in range(args.p)]
    outputs = [out / "truth.json", out / "compositions.csv", out / "basis.csv"]
    write_json(outputs[0], truth.to_dict())
    write_matrix_csv(outputs[1], X, names)
    write_matrix_csv(outputs[2], Y, names)
    if args.counts:
        low = args.depth_low if args.depth_low is not None else 15 * args.p
        high = args.depth_high if args.depth_high is not None else 15 * args.p + 500
        counts = sample_counts(X, low, high, seed=rng)
        outputs.append(out / "counts.csv")
        write_matrix_csv(outputs[-1], counts, names, integer=True)
    _write_manifest(args, argv, outputs=outputs)
    print(f"wrote {', '.join(p.name for p in outputs)} to {out}")
    return EXIT_OK


def cmd_estimate(args, argv):
    data, _ = _load_input(args)
    centered = args.mode == "care"
    p = data.shape[1]
    threads = _threads(args)
    sigma = sample_clr_covariance(data)
    if args.lambda_all is not None or args.lambdas is not None:
        lam = args.lambda_all if args.lambda_all is not None else _read_lambdas(args.lambdas, p)
        est = symmetrize(estimate_columns(sigma, lam, centered, threads))
        scores = None
    else:
        res = cross_validate(data, _cv_config(args), centered, threads)
        est, scores = res.estimate, res.scores
    if args.threshold > 0:
        est = hard_threshold(est, args.threshold)
    out = _out_dir(args)
    outputs = [out / "precision.json", out / "edges.tsv", out / "lambda.csv"]
    write_precision_json(outputs[0], est.matrix, est.lambdas, est.stage, mode=args.mode, tau=est.tau)
    write_edges_tsv(outputs[1], est.matrix)
    write_matrix_csv(outputs[2], np.asarray(est.lambdas)[:, None], ["lambda"])
    if scores is not None:
        outputs.append(out / "cv_scores.csv")
        write_matrix_csv(outputs[-1], scores)
    _write_manifest(args, argv, inputs=[args.input], outputs=outputs)
    n_edges = int(np.count_nonzero(np.triu(est.matrix, 1)))
    print(f"{args.mode}: p={p}, {n_edges} edges, stage={est.stage}; wrote {out}")
    return EXIT_OK


def _read_lambdas(path, p):
    vals = read_matrix_csv(path)[0].ravel()
    if vals.size != p:
        raise DataError(f"{path}: expected {p} lambda values, got {vals.size}")
    return vals


def _truth(path):
    d = read_json(path)
    if "support" in d:
        return GroundTruth.from_dict(d)
    return GroundTruth.from_matrix(np.asarray(d["matrix"], dtype=float))


def cmd_evaluate(args, argv):
    matrix, _ = read_precision_json(args.estimate)
    report = recovery_report(matrix, _truth(args.truth), eps=args.eps).to_dict(percent=True)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_json(out, report)
    _write_manifest(args, argv, inputs=[args.estimate, args.truth], outputs=[out])
    for key in ("spectral_loss", "l1_loss", "frobenius_loss"):
        print(f"{key:>15}: {report[key]:.4f}")
    print(f"{'tpr':>15}: {report['tpr_percent']:.1f}%")
    print(f"{'fpr':>15}: {report['fpr_percent']:.1f}%")
    return EXIT_OK


def cmd_roc(args, argv):
    data, _ = _load_input(args)
    centered = args.mode == "care"
    p = data.shape[1]
    if args.lambdas:
        grid = np.array(sorted(set(args.lambdas), reverse=True))
    else:
        top = args.lambda_max if args.lambda_max is not None else (1.0 - 1.0 / p if centered else 1.0)
        grid = top * np.arange(args.grid, 0, -1) / args.grid
    sigma = sample_clr_covariance(data)
    paths = [solve_path(sigma, j, grid, centered) for j in range(p)]
    curve = roc_curve(paths, _truth(args.truth), eps=args.eps)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out, np.array(curve.rows()).reshape(-1, 3), ["lambda", "fpr", "tpr"])
    _write_manifest(args, argv, inputs=[args.input, args.truth], outputs=[out])
    print(f"{grid.size} ROC points written to {out}" + (" (vacuous tpr)" if curve.vacuous_tpr else ""))
    return EXIT_OK


def cmd_stability(args, argv):
    data, _ = read_matrix_csv(args.input)
    if args.counts_vc:
        x = zero_replace_vc(data)
    else:
        _require_positive(data)
        x = data
    report = network_stability(
        x,
        _cv_config(args),
        subsamples=args.subsamples,
        fraction=args.fraction,
        retain_threshold=args.retain,
        seed=args.seed,
        tau=args.threshold,
        freeze_lambda=args.freeze_lambda,
        n_jobs=_threads(args),
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_json(out, report.to_dict())
    _write_manifest(args, argv, inputs=[args.input], outputs=[out])
    print(
        f"{len(report.edges)} edges, stability {report.stability:.3f}, "
        f"{len(report.stable_edges)} retained at {report.retain_threshold:g}"
    )
    return EXIT_OK


def cmd_table2(args, argv):
    methods = tuple(args.methods.split(","))
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise DataError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
    kwargs = {"n_folds": args.folds, "n_grid": args.grid, "scheme": args.cv_scheme,
              "train_fraction": args.train_fraction, "edge_count": args.edge_count}
    if args.depth_low is not None or args.depth_high is not None:
        kwargs["depth"] = (args.depth_low or 15 * args.p, args.depth_high or 15 * args.p + 500)
    result = run_study(args.model, args.p, args.n, args.reps, args.seed, methods, _threads(args), **kwargs)
    summary = result.summary()
    out = _out_dir(args)
    rows = [
        [r, m_idx] + [getattr(rep[m], f) for f in FIELDS]
        for r, rep in enumerate(result.reports)
        for m_idx, m in enumerate(methods)
    ]
    outputs = [out / "summary.json", out / "replicates.csv"]
    write_json(outputs[0], {"model": result.model, "p": args.p, "n": args.n, "reps": args.reps,
                            "seed": args.seed, "methods": list(methods), "table": summary})
    write_matrix_csv(outputs[1], np.array(rows, dtype=float), ["replicate", "method"] + list(FIELDS))
    _write_manifest(args, argv, outputs=outputs)
    print(f"{result.model} p={args.p} n={args.n}, {args.reps} replicates")
    print(f"{'method':>8} " + " ".join(f"{f:>16}" for f in FIELDS))
    for m in methods:
        cells = " ".join(f"{summary[m][f]['mean']:9.2f} ({summary[m][f]['se']:.2f})" for f in FIELDS)
        print(f"{m:>8} {cells}")
    return EXIT_OK


def cmd_replay(args, argv):
    manifest = read_json(args.manifest)
    if not isinstance(manifest, dict) or not {"argv", "command", "outputs"} <= manifest.keys():
        raise DataError(f"{args.manifest} is not a run manifest")
    old = _split_out(manifest["argv"])
    if old and old[0] == "replay":
        raise DataError("refusing to replay a replay manifest")
    command = manifest["command"]
    target = Path(args.out) if args.out else None
    new = _retarget(old, command, target) if target else old
    code = main(new)
    if code != EXIT_OK:
        return code
    replayed = read_json(manifest_path(new[new.index("--out") + 1], command))
    mismatched = [k for k, v in manifest["outputs"].items() if replayed["outputs"].get(k) != v]
    if mismatched:
        print(f"outputs differ from the manifest: {', '.join(mismatched)}", file=sys.stderr)
        return EXIT_MISMATCH
    print(f"replay reproduced {len(manifest['outputs'])} outputs byte-identically")
    return EXIT_OK


def _split_out(argv):
    # Normalise "--out=X" to "--out X" so the value can be located.
    out = []
    for tok in argv:
        if tok.startswith("--out="):
            out.extend(["--out", tok[len("--out="):]])
        else:
            out.append(tok)
    return out


def _retarget(argv, command, target):
    argv = list(argv)
    i = argv.index("--out")
    if command in _FILE_OUTPUT:
        argv[i + 1] = str(target / Path(argv[i + 1]).name)
    else:
        argv[i + 1] = str(target)
    return argv


# -- parser ------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker count; falls back to $CARE_THREADS, then all cores")


def _add_cv(p, scheme="kfold"):
    g = p.add_argument_group("cross-validation")
    g.add_argument("--folds", type=_positive_int, default=5, help="number of splits B (default 5)")
    g.add_argument("--grid", type=_positive_int, default=50, help="grid points N (default 50)")
    g.add_argument("--delta", type=float, default=None, help="grid ceiling (default 1 - 1/p, or 1 for oracle)")
    g.add_argument("--cv-scheme", choices=SCHEMES, default=scheme,
                   help=f"disjoint folds or repeated random splits (default {scheme})")
    g.add_argument("--train-fraction", type=_fraction, default=0.5,
                   help="training share for random splits (default 0.5)")


def build_parser():
    parser = argparse.ArgumentParser(prog="care", description="Sparse basis precision estimation for compositional data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a ground truth and compositional samples")
    p.add_argument("--model", choices=MODELS + ("a", "b", "c", "d", "sf"), required=True)
    p.add_argument("--p", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--edge-count", type=int, default=None, help="edges for the scale_free model")
    p.add_argument("--mean-high", type=float, default=None,
                   help="basis mean drawn from U(0, MEAN_HIGH); default 0, or 5 with --counts")
    p.add_argument("--counts", action="store_true", help="also write multinomial counts")
    p.add_argument("--depth-low", type=_positive_int, default=None, help="default 15p")
    p.add_argument("--depth-high", type=_positive_int, default=None, help="default 15p + 500")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate the basis precision matrix from a CSV")
    p.add_argument("input", help="CSV: compositions (care) or log-basis values (oracle)")
    p.add_argument("--mode", choices=("care", "oracle"), default="care")
    lam = p.add_mutually_exclusive_group()
    lam.add_argument("--lambda-all", type=float, default=None, help="same lambda for every column")
    lam.add_argument("--lambdas", default=None, help="CSV with one lambda per column")
    lam.add_argument("--cv", action="store_true", help="cross-validate lambda (the default)")
    p.add_argument("--threshold", type=float, default=0.0, help="hard-threshold level tau (default 0)")
    p.add_argument("--counts-vc", action="store_true", help="input is counts; add 0.5 before closure")
    p.add_argument("--out", required=True, help="output directory")
    _add_cv(p)
    _add_common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="score an estimate against a ground truth")
    p.add_argument("estimate", help="precision JSON from 'estimate'")
    p.add_argument("truth", help="truth JSON from 'simulate'")
    p.add_argument("--eps", type=float, default=0.0, help="detection threshold |w| > eps")
    p.add_argument("--out", required=True, help="report JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("roc", help="ROC points along a lambda grid")
    p.add_argument("input")
    p.add_argument("truth")
    p.add_argument("--mode", choices=("care", "oracle"), default="care")
    p.add_argument("--grid", type=_positive_int, default=50, help="grid points (default 50)")
    p.add_argument("--lambda-max", type=float, default=None, help="grid ceiling (default 1 - 1/p)")
    p.add_argument("--lambdas", type=float, nargs="+", default=None, help="explicit grid")
    p.add_argument("--counts-vc", action="store_true")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--out", required=True, help="ROC CSV path")
    _add_common(p)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("stability", help="edge reproduction over row subsamples")
    p.add_argument("input", help="CSV of compositions")
    p.add_argument("--subsamples", type=_positive_int, default=100)
    p.add_argument("--fraction", type=_fraction, default=0.8)
    p.add_argument("--retain", type=float, default=0.8, help="retention threshold (default 0.8)")
    p.add_argument("--freeze-lambda", action="store_true", help="reuse the full-data lambda in subsamples")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--counts-vc", action="store_true")
    p.add_argument("--out", required=True, help="stability JSON path")
    _add_cv(p)
    _add_common(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("table2", help="replicated simulation study")
    p.add_argument("--model", choices=MODELS + ("a", "b", "c", "d", "sf"), default="band")
    p.add_argument("--p", type=_positive_int, default=50)
    p.add_argument("--n", type=_positive_int, default=200)
    p.add_argument("--reps", type=_positive_int, default=20)
    p.add_argument("--methods", default="care,oracle", help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--edge-count", type=int, default=None)
    p.add_argument("--depth-low", type=_positive_int, default=None)
    p.add_argument("--depth-high", type=_positive_int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    _add_cv(p, scheme="split")
    _add_common(p)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="directory for the re-run (default: the recorded location)")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, argv)
    except argparse.ArgumentTypeError as exc:
        print(f"care: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotStrictlyPositive:
        print(f"care: data error: {ZERO_HINT}", file=sys.stderr)
        return EXIT_DATA
    except (DataError, OSError, KeyError, ValueError) as exc:
        print(f"care: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, CareError) as exc:
        print(f"care: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
