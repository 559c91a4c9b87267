"""Command-line entry point: ``croppat generate|train|evaluate|compare``.

Exit status: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name
from .dataset import DataError, SyntheticSpec, fit_normalizer, generate_synthetic, load_csv, write_csv
from .forest import ForestParams
from .harness import MODEL_KINDS, ExperimentConfig, ModelSpec, RunError, compare_models, fit_model
from .metrics import BAND_GAP_RULE, evaluate
from .modelfile import dump_model, load_model
from .naive_bayes import VARIANCE_FLOOR
from .network import DEFAULT_HIDDEN, NumericError, TrainConfig
from .report import (accuracy_csv, kappa_csv, loss_trace_csv, per_class_csv, render_comparison,
                     render_metricset, to_json)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "CROPPAT_SEED"

_F, _T = ForestParams(), TrainConfig()
CONSTANTS = f"""\
constants:
  naive Bayes variance floor   {VARIANCE_FLOOR:g} (applied after min-max scaling)
  network                      hidden layers {list(DEFAULT_HIDDEN)}, He-normal init, ReLU,
                               softmax + cross-entropy, plain SGD
                               lr {_T.learning_rate:g}, batch size {_T.batch_size}, epochs {_T.epochs}
  forest                       ntree {_F.ntree}, mtry {_F.mtry}, Gini, unbounded depth,
                               a node of <= min_node_size ({_F.min_node_size}) samples is a leaf
  split                        stratified, train fraction 0.70, repeats 10
  kappa bands                  {BAND_GAP_RULE}
  seed                         --seed, else ${SEED_ENV}, else 0
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_float(s):
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {s}")
    return v


def _seed(s):
    v = int(s)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _int_list(s):
    try:
        return tuple(int(p) for p in s.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s}") from None


def _add_model_flags(p):
    g = p.add_argument_group("model hyperparameters (flags override --config)")
    g.add_argument("--ntree", type=_positive_int, help=f"forest size (default {_F.ntree})")
    g.add_argument("--mtry", type=_positive_int, help=f"features tried per node (default {_F.mtry})")
    g.add_argument("--max-depth", type=_positive_int, help="tree depth limit (default unbounded)")
    g.add_argument("--min-node-size", type=_positive_int,
                   help=f"nodes this small become leaves (default {_F.min_node_size})")
    g.add_argument("--hidden", type=_int_list,
                   help=f"hidden layer widths, comma-separated (default {','.join(map(str, DEFAULT_HIDDEN))})")
    g.add_argument("--epochs", type=int, help=f"training epochs (default {_T.epochs})")
    g.add_argument("--batch-size", type=_positive_int, help=f"SGD batch size (default {_T.batch_size})")
    g.add_argument("--learning-rate", type=float, help=f"SGD step size (default {_T.learning_rate:g})")
    g.add_argument("--variance-floor", type=float,
                   help=f"naive Bayes minimum variance (default {VARIANCE_FLOOR:g})")


def build_parser():
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="croppat", description="Crop-pattern classifier toolkit.",
                     epilog=CONSTANTS, formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"croppat {__version__} ({backend_name()} kernels)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="write a synthetic NDVI phenology CSV",
                       epilog=CONSTANTS, formatter_class=fmt)
    g.add_argument("--classes", type=int, default=8, help="number of crop classes (default 8)")
    g.add_argument("--per-class", type=_positive_int, default=50, help="samples per class (default 50)")
    g.add_argument("--features", type=int, default=136, help="time steps per series (default 136)")
    g.add_argument("--noise", type=_nonneg_float, default=0.02,
                   help="std. dev. of additive Gaussian noise (default 0.02)")
    g.add_argument("--seed", type=_seed, help=f"random seed (default ${SEED_ENV} or 0)")
    g.add_argument("--out", required=True, help="output CSV path")

    t = sub.add_parser("train", help="fit one model on a CSV and save it as JSON",
                       epilog=CONSTANTS, formatter_class=fmt)
    t.add_argument("--model", required=True, choices=MODEL_KINDS)
    t.add_argument("--data", required=True, help="training CSV")
    t.add_argument("--config", help="JSON config file")
    t.add_argument("--out", required=True, help="model JSON path")
    t.add_argument("--seed", type=_seed, help=f"random seed (default ${SEED_ENV} or 0)")
    t.add_argument("--format", choices=("table", "json", "csv"), default="table",
                   help="stdout format for training-set metrics (default table)")
    t.add_argument("--jobs", type=_positive_int, default=1, help="forest worker threads (default 1)")
    _add_model_flags(t)

    e = sub.add_parser("evaluate", help="score a saved model on a CSV",
                       epilog=CONSTANTS, formatter_class=fmt)
    e.add_argument("--model-file", required=True, help="model JSON written by train")
    e.add_argument("--data", required=True, help="CSV to score")
    e.add_argument("--format", choices=("table", "json", "csv"), default="table",
                   help="output format (default table)")

    c = sub.add_parser("compare", help="repeated holdout comparison of NB, DNN and RF",
                       epilog=CONSTANTS, formatter_class=fmt)
    c.add_argument("--data", required=True, help="dataset CSV")
    c.add_argument("--config", help="JSON config file")
    c.add_argument("--seed", type=_seed, help=f"master seed (default ${SEED_ENV} or 0)")
    c.add_argument("--out-dir", help="directory for tables, per-class series and loss traces")
    c.add_argument("--format", choices=("table", "json", "csv"), default="table",
                   help="stdout format (default table)")
    c.add_argument("--models", help="comma-separated subset of nb,dnn,rf (default all three)")
    c.add_argument("--repeats", type=_positive_int, help="resampling repeats (default 10)")
    c.add_argument("--train-fraction", type=float, help="train share per class (default 0.70)")
    c.add_argument("--jobs", type=_positive_int, default=1,
                   help="concurrent (model, run) jobs; output is identical for any value (default 1)")
    c.add_argument("--timing", action="store_true",
                   help="record wall-clock seconds per run in the JSON report (default off; "
                        "timings make the output non-reproducible)")
    _add_model_flags(c)
    return parser


# --------------------------------------------------------------------------
# configuration

def _read_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must be a JSON object")
    return doc


def _pick(flag, section, key, default):
    if flag is not None:
        return flag
    return section.get(key, default)


def _resolve_seed(args, conf):
    if args.seed is not None:
        return args.seed
    if "seed" in conf:
        return int(conf["seed"])
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _seed(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"${SEED_ENV} must be an unsigned 64-bit integer, got {env!r}") from None
    return 0


def _model_specs(args, conf, kinds):
    fconf = conf.get("forest", {})
    tconf = conf.get("train", {})
    max_depth = args.max_depth if args.max_depth is not None else fconf.get("max_depth")
    forest = ForestParams(
        ntree=_pick(args.ntree, fconf, "ntree", _F.ntree),
        mtry=_pick(args.mtry, fconf, "mtry", _F.mtry),
        max_depth=max_depth,
        min_node_size=_pick(args.min_node_size, fconf, "min_node_size", _F.min_node_size),
        seed=int(fconf.get("seed", 0)),
    )
    train = TrainConfig(
        epochs=_pick(args.epochs, tconf, "epochs", _T.epochs),
        batch_size=_pick(args.batch_size, tconf, "batch_size", _T.batch_size),
        learning_rate=_pick(args.learning_rate, tconf, "learning_rate", _T.learning_rate),
        seed=int(tconf.get("seed", 0)),
    )
    hidden = _pick(args.hidden, conf, "hidden", DEFAULT_HIDDEN)
    floor = _pick(args.variance_floor, conf, "variance_floor", VARIANCE_FLOOR)
    if not floor > 0:
        raise ValueError("variance floor must be positive")
    return tuple(ModelSpec(k, forest, tuple(hidden), train, floor) for k in kinds)


def _parse_kinds(text):
    kinds = tuple(k.strip().lower() for k in text.split(",") if k.strip())
    bad = [k for k in kinds if k not in MODEL_KINDS]
    if bad or not kinds:
        raise UsageError(f"--models must list some of {','.join(MODEL_KINDS)}")
    if len(set(kinds)) != len(kinds):
        raise UsageError("--models lists a model twice")
    return kinds


def _experiment(args, conf):
    if args.models is not None:
        kinds = _parse_kinds(args.models)
    elif "models" in conf:
        kinds = _parse_kinds(",".join(conf["models"]))
    else:
        kinds = MODEL_KINDS
    return ExperimentConfig(
        train_fraction=_pick(args.train_fraction, conf, "train_fraction", 0.70),
        repeats=_pick(args.repeats, conf, "repeats", 10),
        models=_model_specs(args, conf, kinds),
        seed=_resolve_seed(args, conf),
    )


# --------------------------------------------------------------------------
# commands

def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_generate(args):
    try:
        spec = SyntheticSpec(args.classes, args.features, args.per_class, args.noise,
                             _resolve_seed(args, {}))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    d = generate_synthetic(spec)
    write_csv(d, args.out)
    print(f"wrote {len(d)} samples ({d.n_classes} classes x {spec.samples_per_class}, "
          f"{d.feature_count} features) to {args.out}", file=sys.stderr)


def cmd_train(args):
    conf = _read_config(args.config)
    try:
        spec = _model_specs(args, conf, (args.model,))[0]
        seed = _resolve_seed(args, conf)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    d = load_csv(args.data)
    if len(d) == 0:
        raise DataError(f"{args.data}: no samples to train on")
    norm = fit_normalizer(d)
    train = norm.apply(d)
    try:
        model, extras = fit_model(spec, train, seed, jobs=args.jobs)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    dump_model(spec.kind, model, norm, d.class_names, args.out)
    ms = evaluate(train.labels, model.predict(train.features), d.class_names)
    title = f"{spec.name}: training-set metrics ({len(d)} samples)"
    if "oob_error" in extras:
        title += f"\nout-of-bag error: {extras['oob_error']:.4f}"
    sys.stdout.write(render_metricset(ms, args.format, title))


def cmd_evaluate(args):
    try:
        kind, model, norm, names = load_model(args.model_file)
    except FileNotFoundError:
        raise DataError(f"no such model file: {args.model_file}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{args.model_file}: unreadable model ({exc})") from None
    d = load_csv(args.data)
    if len(d) == 0:
        raise DataError(f"{args.data}: no samples to evaluate")
    if d.feature_count != norm.minimum.shape[0]:
        raise DataError(f"{args.data} has {d.feature_count} features, "
                        f"model expects {norm.minimum.shape[0]}")
    index = {n: i for i, n in enumerate(names)}
    unknown = [n for n in d.class_names if n not in index]
    if unknown:
        raise DataError(f"{args.data}: classes unknown to the model: {', '.join(unknown)}")
    truth = np.array([index[d.class_names[y]] for y in d.labels], dtype=np.int64)
    pred = model.predict(norm.transform(d.features))
    ms = evaluate(truth, pred, names)
    sys.stdout.write(render_metricset(ms, args.format, f"{args.model_file} on {args.data}"))


def cmd_compare(args):
    conf = _read_config(args.config)
    try:
        cfg = _experiment(args, conf)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    d = load_csv(args.data)
    report = compare_models(d, cfg, jobs=args.jobs)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "report.json", to_json(report.to_dict(args.timing)))
        _write(out / "accuracy.csv", accuracy_csv(report))
        _write(out / "kappa.csv", kappa_csv(report))
        for r in report.models:
            _write(out / f"per_class_{r.model.kind}.csv", per_class_csv(r.name, r.per_class_series()))
            if r.model.kind == "dnn":
                for run in r.runs:
                    _write(out / f"dnn_loss_run{run.run:02d}.csv",
                           loss_trace_csv(run.extras["loss_trace"]))
    sys.stdout.write(render_comparison(report, args.format, args.timing))


COMMANDS = {"generate": cmd_generate, "train": cmd_train,
            "evaluate": cmd_evaluate, "compare": cmd_compare}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"croppat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"croppat {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RunError as exc:
        print(f"croppat {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc.cause, NumericError) else EXIT_DATA
    except DataError as exc:
        print(f"croppat {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"croppat {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
