"""Command-line interface: ``boostbench {bench,train,eval,predict,tune}``."""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

import numpy as np

from .bayes import GaussianEstimator, NaiveBayesModel
from .bench import FORMATS, RunConfig, emit_report, evaluate_holdout, run_suite, split_learner_list
from .boost import BoostEnsemble
from .dataset import DatasetError, load
from .learners import L5_DEFAULT_FOLDS, L5_DEFAULT_GRID, LearnerSpecError, as_spec, fit_learner
from .select import ParamGrid, grid_select
from .tree import DecisionTreeModel, dump_tree


def describe_model(model) -> str:
    """Human-readable text for any trained model."""
    if isinstance(model, DecisionTreeModel):
        return dump_tree(model)
    if isinstance(model, BoostEnsemble):
        p = model.params
        base = "stump" if p.base == "stump" else "j48"
        lines = [
            f"AdaBoostM1 base={base} I={p.iterations} P={p.weight_threshold} "
            f"Q={'on' if p.use_resampling else 'off'} seed={p.seed}",
            f"rounds: {len(model.rounds)}  stop: {model.stop_reason}",
        ]
        for t, r in enumerate(model.rounds, 1):
            lines += ["", f"round {t}: epsilon={r.epsilon:.6g} vote={r.vote:.6g}", dump_tree(r.model).rstrip()]
        return "\n".join(lines) + "\n"
    if isinstance(model, NaiveBayesModel):
        cls = model.attributes[model.class_index].values
        lines = ["Naive Bayes", "priors: " + ", ".join(f"{c}={p:.4f}" for c, p in zip(cls, model.priors))]
        for est in model.estimators:
            attr = model.attributes[est.attribute]
            lines.append(f"{attr.name}:")
            for c, name in enumerate(cls):
                if isinstance(est, GaussianEstimator):
                    lines.append(f"  {name}: mean={est.means[c]:.6g} std={est.stds[c]:.6g}")
                else:
                    probs = ", ".join(f"{v}={p:.4f}" for v, p in zip(attr.values, est.probs[c]))
                    lines.append(f"  {name}: {probs}")
        return "\n".join(lines) + "\n"
    if hasattr(model, "tune"):
        chosen = ", ".join(f"{k}={v}" for k, v in model.tune.chosen.items())
        return f"tuned ({model.tune.folds}-fold cv): {chosen}\n\n" + describe_model(model.model)
    return repr(model) + "\n"


def cmd_bench(args) -> int:
    files = []
    for suite in args.suite or []:
        files += RunConfig.from_suite(suite).datasets
    files += args.data or []
    if not files:
        raise SystemExit("bench: no dataset files (use --suite DIR or --data FILE)")
    config = RunConfig(
        tuple(files), split=args.split, seed=args.seed, learners=tuple(split_learner_list(args.learners)),
        grid=args.tune, folds=args.folds, jobs=args.jobs,
    )
    report = run_suite(config)
    text = emit_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for s in report.skipped:
        print(f"skipped {s['path']}: {s['error']}", file=sys.stderr)
    if not report.datasets:
        print("bench: no dataset could be evaluated", file=sys.stderr)
        return 1
    if report.skipped and args.strict:
        return 1
    return 0


def cmd_train(args) -> int:
    ds = load(args.data)
    model = fit_learner(_seeded(args.algo, args.seed), ds)
    err = evaluate_holdout(model, ds)
    print(f"trained {args.algo} on {len(ds)} instances; training error {err:.4f}")
    if args.dump_model:
        Path(args.dump_model).write_text(describe_model(model), encoding="utf-8")
    return 0


def cmd_eval(args) -> int:
    train, test = load(args.train), load(args.test)
    if not train.same_schema(test):
        raise DatasetError("train and test files declare different attributes")
    model = fit_learner(_seeded(args.algo, args.seed), train)
    print(f"error {evaluate_holdout(model, test):.6f} on {len(test)} test instances")
    return 0


def cmd_predict(args) -> int:
    train = load(args.train)
    test = load(args.test, allow_missing_class=True)
    if not train.same_schema(test):
        raise DatasetError("train and test files declare different attributes")
    model = fit_learner(_seeded(args.algo, args.seed), train)
    labels = np.asarray(train.class_names)[model.predict(test)]
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        for label in labels:
            w.writerow([label])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_tune(args) -> int:
    ds = load(args.data)
    grid = ParamGrid.parse(args.grid)
    result = grid_select(_seeded(args.algo, args.seed), grid, ds, args.folds, args.seed)
    print(f"{result.folds}-fold cross-validation over {len(grid)} points")
    for point, err in result.cv_errors:
        print("  " + " ".join(f"{k}={v}" for k, v in point.items()) + f"  cv_error={err:.6f}")
    print("chosen: " + " ".join(f"{k}={v}" for k, v in result.chosen.items()))
    return 0


def _seeded(spec_text: str, seed: int | None):
    spec = as_spec(spec_text)
    if seed is not None and spec.accepts("seed") and spec.get("seed") is None:
        spec = spec.with_params(seed=seed)
    return spec


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="boostbench", description="Boosted decision trees versus a Naive Bayes reference.")
    ap.add_argument("-v", "--verbose", action="store_true", help="show warnings such as fold reductions")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run learners on a dataset suite and report error ratios")
    b.add_argument("--suite", action="append", help="directory of .arff/.csv files (repeatable)")
    b.add_argument("--data", action="append", help="single dataset file (repeatable)")
    b.add_argument("--split", type=float, default=2.0 / 3.0, help="training fraction (default 2/3)")
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--learners", default="lb,l5,nb", help="comma-separated learner specs")
    b.add_argument("--tune", default=L5_DEFAULT_GRID, help="L5 grid, e.g. 'P=10:100:10,I=10:50:10'")
    b.add_argument("--folds", type=int, default=L5_DEFAULT_FOLDS)
    b.add_argument("--jobs", type=int, default=1, help="datasets evaluated in parallel")
    b.add_argument("--out", help="output file (default stdout)")
    b.add_argument("--format", choices=FORMATS, default="json")
    b.add_argument("--strict", action="store_true", help="exit nonzero if any dataset is skipped")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("train", help="train a learner on one file")
    t.add_argument("--data", required=True)
    t.add_argument("--algo", default="l5")
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--dump-model", help="write a text rendering of the model")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="train on one file and report the error on another")
    e.add_argument("--train", required=True)
    e.add_argument("--test", required=True)
    e.add_argument("--algo", default="l5")
    e.add_argument("--seed", type=int, default=None)
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="write one predicted label per test row")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True, help="test file; class cells may be '?'")
    p.add_argument("--algo", default="l5")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_predict)

    g = sub.add_parser("tune", help="cross-validated grid search")
    g.add_argument("--data", required=True)
    g.add_argument("--grid", default=L5_DEFAULT_GRID)
    g.add_argument("--algo", default="adaboost(base=j48, Q=on)", help="learner spec whose parameters are tuned")
    g.add_argument("--folds", type=int, default=L5_DEFAULT_FOLDS)
    g.add_argument("--seed", type=int, default=1)
    g.set_defaults(func=cmd_tune)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except (DatasetError, LearnerSpecError, ValueError, OSError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
