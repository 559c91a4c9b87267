"""Crop-pattern classification: naive Bayes, deep net and random forest."""

__version__ = "0.1.0"

from .dataset import (DataError, Dataset, Normalizer, Sample, SplitSpec, SyntheticSpec,
                      fit_normalizer, generate_synthetic, load_csv, stratified_split, write_csv)
from .forest import ForestModel, ForestParams, rf_fit, rf_oob_error, rf_predict
from .harness import ExperimentConfig, ModelSpec, compare_models, run_experiment
from .metrics import (ConfusionMatrix, MetricSet, accuracy, confusion, kappa, kappa_band,
                      sensitivity, specificity)
from .naive_bayes import NBModel, nb_fit, nb_posterior, nb_predict
from .network import (NetArch, NetModel, NumericError, TrainConfig, net_forward, net_gradients,
                      net_init, net_predict, net_train)
