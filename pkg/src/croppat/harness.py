"""Repeated stratified holdout evaluation and three-way model comparison.

Run ``r`` (1-based) of an experiment uses the seed
``derive_seed(master_seed, r)`` for its train/test split.  Every model in a
comparison sees the same split for the same ``r``.  Model-internal
randomness is keyed off the run seed as well, so results do not depend on
the order in which (model, run) jobs execute.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dataset import Dataset, SplitSpec, fit_normalizer, split_indices
from .forest import ForestParams, rf_fit
from .metrics import MetricSet, evaluate, kappa_band
from .naive_bayes import VARIANCE_FLOOR, nb_fit
from .network import DEFAULT_HIDDEN, NetArch, TrainConfig, net_init, net_train
from .rng import derive_seed

MODEL_KINDS = ("nb", "dnn", "rf")
DISPLAY_NAMES = {
    "nb": "Naive-Bayes (NB)",
    "dnn": "Deep Neural Network (DNN)",
    "rf": "Random Forest (RF)",
}
# stream keys for model randomness within a run
_MODEL_KEYS = {"nb": 1, "dnn": 2, "rf": 3}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    forest: ForestParams = ForestParams()
    hidden: tuple = DEFAULT_HIDDEN
    train: TrainConfig = TrainConfig()
    variance_floor: float = VARIANCE_FLOOR

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))

    @property
    def name(self):
        return DISPLAY_NAMES[self.kind]

    def to_dict(self):
        if self.kind == "nb":
            return {"kind": "nb", "variance_floor": self.variance_floor}
        if self.kind == "rf":
            return {"kind": "rf", **asdict(self.forest)}
        return {"kind": "dnn", "hidden": list(self.hidden), **asdict(self.train)}


@dataclass(frozen=True)
class ExperimentConfig:
    train_fraction: float = 0.70
    repeats: int = 10
    models: tuple = tuple(ModelSpec(k) for k in MODEL_KINDS)
    seed: int = 0

    def __post_init__(self):
        SplitSpec(self.train_fraction)  # validates the fraction
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not self.models:
            raise ValueError("at least one model spec is required")

    def run_seed(self, run):
        return derive_seed(self.seed, run)

    def to_dict(self):
        return {
            "seed": self.seed,
            "train_fraction": self.train_fraction,
            "repeats": self.repeats,
            "models": [m.to_dict() for m in self.models],
        }


class RunError(RuntimeError):
    def __init__(self, model, run, cause):
        super().__init__(f"{model} run {run}: {cause}")
        self.run = run
        self.cause = cause


# --------------------------------------------------------------------------
# fitting

def fit_model(spec: ModelSpec, train: Dataset, seed: int, jobs: int = 1):
    """Fit one classifier; returns ``(model, extras)``.

    ``extras`` holds model-specific diagnostics: ``oob_error`` for forests,
    ``loss_trace`` for networks.
    """
    key = _MODEL_KEYS[spec.kind]
    if spec.kind == "nb":
        return nb_fit(train, spec.variance_floor), {}
    if spec.kind == "rf":
        p = spec.forest
        params = ForestParams(p.ntree, p.mtry, p.max_depth, p.min_node_size,
                              derive_seed(seed, key, p.seed))
        m = rf_fit(train, params, jobs=jobs)
        return m, {"oob_error": m.oob_error}
    arch = NetArch.for_data(train.feature_count, train.n_classes, spec.hidden)
    t = spec.train
    init = net_init(arch, derive_seed(seed, key, t.seed, 0))
    cfg = TrainConfig(t.epochs, t.batch_size, t.learning_rate, derive_seed(seed, key, t.seed, 1))
    m = net_train(init, train, cfg)
    return m, {"loss_trace": list(m.loss_trace)}


# --------------------------------------------------------------------------
# reports

@dataclass
class RunResult:
    run: int
    metrics: MetricSet
    seconds: float
    train_index: np.ndarray
    test_index: np.ndarray
    extras: dict = field(default_factory=dict)


def _mean_std(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return {"mean": None, "std": None}
    mean = math.fsum(vals) / len(vals)
    std = None
    if len(vals) > 1:
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1))
    return {"mean": mean, "std": std}


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


@dataclass
class EvaluationReport:
    model: ModelSpec
    runs: list
    config: ExperimentConfig

    @property
    def name(self):
        return self.model.name

    @property
    def seconds_per_run(self):
        return [r.seconds for r in self.runs]

    def aggregate(self):
        """Mean and sample standard deviation of every per-run metric."""
        ms = [r.metrics for r in self.runs]
        per_class = []
        for k, rate in enumerate(ms[0].per_class):
            per_class.append({
                "class": rate.name,
                "sensitivity": _mean_std([m.per_class[k].sensitivity for m in ms]),
                "specificity": _mean_std([m.per_class[k].specificity for m in ms]),
            })
        agg = {
            "accuracy": _mean_std([m.accuracy for m in ms]),
            "kappa": _mean_std([m.kappa for m in ms]),
        }
        agg["kappa_band"] = kappa_band(agg["kappa"]["mean"])
        if self.model.kind == "rf":
            agg["oob_error"] = _mean_std([_clean(r.extras["oob_error"]) for r in self.runs])
        agg["per_class"] = per_class
        return agg

    def per_class_series(self):
        return [{"class": c["class"],
                 "sensitivity": c["sensitivity"]["mean"],
                 "specificity": c["specificity"]["mean"]}
                for c in self.aggregate()["per_class"]]

    def to_dict(self, timing=False):
        return {
            "name": self.name,
            "spec": self.model.to_dict(),
            "runs": [r.metrics.to_dict() for r in self.runs],
            "aggregate": self.aggregate(),
            "seconds_per_run": self.seconds_per_run if timing else None,
        }


@dataclass
class ComparisonReport:
    config: ExperimentConfig
    models: list

    def accuracy_table(self):
        return [{"model": r.name, "accuracy": r.aggregate()["accuracy"]["mean"]}
                for r in self.models]

    def kappa_table(self):
        rows = []
        for r in self.models:
            agg = r.aggregate()
            rows.append({"model": r.name, "kappa": agg["kappa"]["mean"],
                         "band": agg["kappa_band"]})
        return rows

    def per_class_series(self):
        return {r.name: r.per_class_series() for r in self.models}

    def to_dict(self, timing=False):
        return {
            "config": self.config.to_dict(),
            "models": [r.to_dict(timing) for r in self.models],
            "tables": {"accuracy": self.accuracy_table(), "kappa": self.kappa_table()},
            "per_class_series": self.per_class_series(),
        }


# --------------------------------------------------------------------------
# protocol

def _one_run(d, cfg, spec, run, split, model_jobs):
    train_idx, test_idx = split
    seed = cfg.run_seed(run)
    t0 = time.perf_counter()
    try:
        train, test = d.subset(train_idx), d.subset(test_idx)
        norm = fit_normalizer(train)
        train, test = norm.apply(train), norm.apply(test)
        model, extras = fit_model(spec, train, seed, jobs=model_jobs)
        pred = model.predict(test.features)
    except (ValueError, ArithmeticError) as exc:
        raise RunError(spec.name, run, exc) from exc
    metrics = evaluate(test.labels, pred, d.class_names)
    return RunResult(run, metrics, time.perf_counter() - t0, train_idx, test_idx, extras)


def _splits(d, cfg):
    return {r: split_indices(d, SplitSpec(cfg.train_fraction, cfg.run_seed(r)))
            for r in range(1, cfg.repeats + 1)}


def _execute(d, cfg, specs, jobs):
    splits = _splits(d, cfg)
    tasks = [(i, r) for i in range(len(specs)) for r in splits]

    def work(task):
        i, r = task
        return _one_run(d, cfg, specs[i], r, splits[r], 1)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]
    by_model = [[] for _ in specs]
    for (i, _), res in zip(tasks, results):
        by_model[i].append(res)
    return [EvaluationReport(spec, runs, cfg) for spec, runs in zip(specs, by_model)]


def run_experiment(d: Dataset, cfg: ExperimentConfig, spec: Optional[ModelSpec] = None,
                   jobs: int = 1) -> EvaluationReport:
    """Repeated holdout for a single model (the first in ``cfg`` if not given)."""
    spec = spec or cfg.models[0]
    return _execute(d, cfg, [spec], jobs)[0]


def compare_models(d: Dataset, cfg: ExperimentConfig, jobs: int = 1) -> ComparisonReport:
    return ComparisonReport(cfg, _execute(d, cfg, list(cfg.models), jobs))
