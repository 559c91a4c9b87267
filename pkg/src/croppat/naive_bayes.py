"""Gaussian naive Bayes with log-space posteriors."""

from dataclasses import dataclass

import numpy as np

from .dataset import DataError, Dataset

VARIANCE_FLOOR = 1e-9
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class NBModel:
    """Class priors plus per-class, per-feature Gaussian parameters.

    Attributes
    ----------
    priors : (K,) array
        Relative class frequencies in the training data.
    means, variances : (K, F) arrays
        Maximum-likelihood (population) estimates; variances are floored at
        ``VARIANCE_FLOOR``.
    """

    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    class_names: tuple

    @property
    def feature_count(self):
        return self.means.shape[1]

    def joint_log_likelihood(self, X):
        """``log P(C_k) + sum_i log N(x_i; mu_ki, var_ki)`` for each row of X."""
        X = _check_features(X, self.feature_count)
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors)
        diff = X[:, None, :] - self.means[None, :, :]
        ll = -0.5 * (_LOG_2PI + np.log(self.variances)[None] + diff * diff / self.variances[None])
        return log_prior[None, :] + ll.sum(axis=2)

    def posterior(self, X):
        jll = self.joint_log_likelihood(X)
        jll = jll - jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X):
        # argmax returns the first maximum, i.e. the lowest class index on ties
        return np.argmax(self.posterior(X), axis=1)

    def to_dict(self):
        return {
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "class_names": list(self.class_names),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            np.asarray(doc["priors"], dtype=np.float64),
            np.asarray(doc["means"], dtype=np.float64).reshape(len(doc["priors"]), -1),
            np.asarray(doc["variances"], dtype=np.float64).reshape(len(doc["priors"]), -1),
            tuple(doc["class_names"]),
        )


def _check_features(X, n_features):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got shape {X.shape}")
    return X


def nb_fit(train: Dataset, variance_floor: float = VARIANCE_FLOOR) -> NBModel:
    if len(train) == 0:
        raise DataError("cannot fit naive Bayes on an empty training set")
    counts = train.class_counts()
    missing = [train.class_names[k] for k in np.flatnonzero(counts == 0)]
    if missing:
        raise DataError(f"classes absent from training data: {', '.join(missing)}")
    K, F = train.n_classes, train.feature_count
    means = np.empty((K, F))
    variances = np.empty((K, F))
    for k in range(K):
        Xk = train.features[train.labels == k]
        means[k] = Xk.mean(axis=0)
        variances[k] = Xk.var(axis=0)
    np.maximum(variances, variance_floor, out=variances)
    priors = counts / counts.sum()
    return NBModel(priors, means, variances, train.class_names)


def nb_posterior(m: NBModel, x) -> np.ndarray:
    """Posterior class probabilities for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("nb_posterior takes one feature vector")
    return m.posterior(x)[0]


def nb_predict(m: NBModel, x) -> int:
    return int(np.argmax(nb_posterior(m, x)))
