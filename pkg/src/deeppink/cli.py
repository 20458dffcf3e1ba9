"""``deeppink`` command line interface.

Commands: ``knockoffs``, ``select``, ``simulate``, ``validate``.

Exit codes: 0 success, 1 diagnostic failure, 2 usage or input error,
3 numerical error, 4 training divergence.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import diagnostics, filter as kfilter, io, knockoffs, net, simgen
from . import rng as rngmod
from .errors import DimensionMismatch, DivergedTraining, NumericalFailure, ZeroVarianceColumn

EXIT_OK = 0
EXIT_DIAGNOSTIC = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_DIVERGED = 4

CSV_HELP = ("CSV files: comma separated, header row of column names required "
            "(optional for y and sigma), one row per observation, decimal numbers, "
            "no quoting.")


class StageError(Exception):
    def __init__(self, stage, exc):
        self.stage = stage
        self.exc = exc
        super().__init__(f"{stage}: {exc}")


def fdr_level(text):
    q = float(text)
    if not 0.0 < q < 1.0:
        raise argparse.ArgumentTypeError(f"q must lie in (0, 1), got {text}")
    return q


def positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _add_training(p):
    p.add_argument("--runs", type=positive_int, default=5, help="networks per ensemble")
    p.add_argument("--epochs", type=positive_int, default=200)
    p.add_argument("--lr", type=float, default=0.001, help="Adam learning rate")
    p.add_argument("--batch", type=positive_int, default=10, help="minibatch size")
    p.add_argument("--l1-multiplier", type=float, default=1.0,
                   help="L1 weight is this times sqrt(2 ln p / n)")
    p.add_argument("--aggregate", choices=("mean_w", "mean_importance"), default="mean_w")


def _train_config(args, seed):
    return net.TrainConfig(learning_rate=args.lr, batch_size=args.batch, epochs=args.epochs,
                           l1_multiplier=args.l1_multiplier, runs=args.runs, seed=seed)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="deeppink", description=__doc__.split("\n")[0], epilog=CSV_HELP)
    sub = parser.add_subparsers(dest="command", required=True)

    k = sub.add_parser("knockoffs", help="generate Gaussian knockoffs for a design CSV",
                       epilog=CSV_HELP)
    k.add_argument("--x", required=True, type=Path, help="design matrix CSV")
    k.add_argument("--sigma", type=Path, help="known p x p covariance CSV")
    k.add_argument("--covariance", choices=("empirical", "shrinkage"), default="shrinkage",
                   help="estimator used when --sigma is absent")
    k.add_argument("--no-scale", action="store_true", help="center but do not scale")
    k.add_argument("--seed", type=nonneg_int, required=True)
    k.add_argument("--out", required=True, type=Path, help="knockoff CSV to write")
    k.add_argument("--report", type=Path, help="JSON sidecar (default: OUT with .json)")

    s = sub.add_parser("select", help="knockoffs + network ensemble + knockoff filter",
                       epilog=CSV_HELP)
    s.add_argument("--x", required=True, type=Path)
    s.add_argument("--y", required=True, type=Path, help="single-column response CSV")
    s.add_argument("--sigma", type=Path)
    s.add_argument("--covariance", choices=("empirical", "shrinkage"), default="shrinkage")
    s.add_argument("--no-scale", action="store_true")
    s.add_argument("--q", type=fdr_level, default=0.2, help="target FDR in (0, 1)")
    s.add_argument("--rule", choices=kfilter.RULES, default="knockoff_plus")
    s.add_argument("--baseline", choices=("deeppink", "naive-mlp"), default="deeppink")
    s.add_argument("--seed", type=nonneg_int, required=True)
    s.add_argument("--out", required=True, type=Path, help="selection report JSON")
    _add_training(s)

    m = sub.add_parser("simulate", help="run a seeded synthetic experiment")
    m.add_argument("--model", choices=simgen.MODELS, default="linear")
    m.add_argument("--n", type=positive_int, default=1000)
    m.add_argument("--p", type=positive_int, default=50)
    m.add_argument("--s", type=nonneg_int, default=None,
                   help="number of true features (default 30 linear, 10 single_index)")
    m.add_argument("--amplitude", type=float, default=1.5)
    m.add_argument("--rho", type=float, default=0.5)
    m.add_argument("--sigma-noise", type=float, default=1.0)
    m.add_argument("--q", type=fdr_level, default=0.2)
    m.add_argument("--rule", choices=kfilter.RULES, default="knockoff_plus")
    m.add_argument("--method", choices=("deeppink", "naive-mlp"), default="deeppink")
    m.add_argument("--reps", type=positive_int, default=10)
    m.add_argument("--seed", type=nonneg_int, required=True)
    m.add_argument("--workers", type=positive_int, default=None,
                   help="parallel repetitions (default: available processors)")
    m.add_argument("--out", required=True, type=Path, help="output directory")
    _add_training(m)

    v = sub.add_parser("validate", help="run a built-in diagnostic")
    v.add_argument("diagnostic", choices=("gradient-check", "exchangeability"))
    v.add_argument("--seed", type=nonneg_int, default=0)
    v.add_argument("--corrupt-s", action="store_true",
                   help="sample with a wrong gap vector (exchangeability must fail)")
    return parser


def _prepare_design(args):
    X = io.read_design(args.x)
    scale = not (args.no_scale or args.sigma is not None)
    Xs = knockoffs.standardize(X, scale=scale)
    if args.sigma is not None:
        sigma = knockoffs.estimate_covariance(Xs, "known", sigma=io.read_sigma(args.sigma, X.p))
        mode = "known"
    else:
        sigma = knockoffs.estimate_covariance(Xs, args.covariance)
        mode = args.covariance
    return X, Xs, sigma, mode


def _knockoff_stage(Xs, sigma, seed):
    try:
        s = knockoffs.equicorrelated_s(sigma)
        model = knockoffs.build_knockoff_model(sigma, s)
    except NumericalFailure as exc:
        raise StageError("knockoff construction", exc) from exc
    aug = knockoffs.sample_knockoffs(Xs, model, rngmod.stream(seed, rngmod.KNOCKOFF))
    return model, aug


def cmd_knockoffs(args):
    X, Xs, sigma, mode = _prepare_design(args)
    model, aug = _knockoff_stage(Xs, sigma, args.seed)
    # back to the input's units; a per-column affine map preserves exchangeability
    ko_raw = aug.knockoff * Xs.scales + Xs.means
    names = [f"{c}_ko" for c in X.column_names]
    report_path = args.report or args.out.with_suffix(".json")
    io.write_matrix(args.out, ko_raw, names)
    doc = {
        "manifest": io.manifest("knockoffs",
                                {"covariance": mode, "scaled": Xs.scaled, "seed": args.seed},
                                args.seed, [args.x] + ([args.sigma] if args.sigma else []),
                                [args.out, report_path]),
        "columns": list(X.column_names),
        "s": model.s,
        "centering": Xs.means,
        "scaling": Xs.scales,
        "diagnostics": knockoffs.exchangeability_diagnostic(aug, model),
    }
    io.write_json(report_path, doc)
    print(f"wrote {args.out} ({X.n} x {X.p}) and {report_path}")
    return EXIT_OK


def cmd_select(args):
    X, Xs, sigma, mode = _prepare_design(args)
    y = io.read_response(args.y, X.n).center()
    model, aug = _knockoff_stage(Xs, sigma, args.seed)
    cfg = _train_config(args, rngmod.derive_seed(args.seed, rngmod.RUNS))
    W = net.run_ensemble(aug, y, cfg, pairwise=args.baseline == "deeppink",
                         aggregate=args.aggregate)
    report = kfilter.select(W, args.q, args.rule)
    config = {
        "q": args.q, "rule": args.rule, "baseline": args.baseline, "covariance": mode,
        "scaled": Xs.scaled, "aggregate": args.aggregate, "train": cfg.to_dict(),
        "l1_lambda": cfg.resolve_lambda(X.n, X.p),
    }
    doc = report.to_dict(column_names=list(X.column_names))
    doc["columns"] = list(X.column_names)
    doc["s"] = model.s
    doc["manifest"] = io.manifest("select", config, args.seed,
                                  [args.x, args.y] + ([args.sigma] if args.sigma else []),
                                  [args.out])
    io.write_json(args.out, doc)
    names = ", ".join(doc["selected_names"]) or "(none)"
    print(f"selected {report.n_selected} of {X.p} at q={args.q}: {names}")
    return EXIT_OK


def cmd_simulate(args):
    tcfg = _train_config(args, 0)
    cfg = simgen.SimConfig(n=args.n, p=args.p, s_sparsity=args.s, amplitude=args.amplitude,
                           rho=args.rho, sigma_noise=args.sigma_noise, model=args.model,
                           q=args.q, repetitions=args.reps, seed=args.seed, rule=args.rule,
                           method=args.method, train=replace(tcfg, seed=args.seed))
    report = simgen.run_experiment(cfg, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    json_path = args.out / "report.json"
    csv_path = args.out / "repetitions.csv"
    report["manifest"] = io.manifest("simulate", cfg.to_dict(), args.seed, [],
                                     [json_path, csv_path])
    io.write_json(json_path, report)
    io.write_rows(csv_path, ["rep", "fdp", "power", "n_selected", "threshold"],
                  [[r["rep"], r["fdp"], r["power"], r["n_selected"], r["threshold"]]
                   for r in report["repetitions"]])
    agg = report["aggregate"]
    print(f"{cfg.model} n={cfg.n} p={cfg.p} reps={cfg.repetitions}: "
          f"FDR={agg['fdr']:.3f} power={agg['power']:.3f}")
    return EXIT_OK


def cmd_validate(args):
    if args.diagnostic == "gradient-check":
        res = diagnostics.gradient_check(seed=args.seed)
        print(f"gradient-check: {res['networks']} networks, max relative error "
              f"{res['max_relative_error']:.3e} (tolerance {res['tolerance']:g})")
    else:
        res = diagnostics.exchangeability_check(seed=args.seed, corrupt_s=args.corrupt_s)
        print(f"exchangeability: joint max deviation {res['joint_max_deviation']:.4f} "
              f"(tolerance {res['joint_tolerance']:g}); cross {res['dev_cov_cross']:.4f}, "
              f"x {res['dev_cov_x']:.4f}, knockoff {res['dev_cov_knockoff']:.4f}")
    print("PASS" if res["passed"] else "FAIL")
    return EXIT_OK if res["passed"] else EXIT_DIAGNOSTIC


COMMANDS = {
    "knockoffs": cmd_knockoffs,
    "select": cmd_select,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except DivergedTraining as exc:
        print(f"error: training: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalFailure as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (io.InputError, DimensionMismatch, ZeroVarianceColumn, OSError, ValueError) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
