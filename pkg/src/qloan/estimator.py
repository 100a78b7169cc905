"""scikit-learn compatible wrappers around the preprocessing and training core."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import DEFAULT_FEATURES, Dataset, RawRecord, preprocess
from .model import ModelConfig, predict_batch
from .noise import NoiseSpec
from .training import TrainConfig, classify, train


class LoanPreprocessor(TransformerMixin, BaseEstimator):
    """Impute, ordinal-encode and z-score loan records.

    Parameters
    ----------
    feature_set : sequence of str, default=DEFAULT_FEATURES
        Ordered raw column names; one output column per name.

    Attributes
    ----------
    stats_ : NormalizationStats
        Fill values, means and population standard deviations of the
        training records.
    """

    def __init__(self, feature_set=DEFAULT_FEATURES):
        self.feature_set = feature_set

    def fit(self, records, y=None):
        _, self.stats_ = preprocess(_as_records(records), None, self.feature_set, require_labels=False)
        self.n_features_out_ = len(self.stats_.feature_set)
        return self

    def transform(self, records):
        check_is_fitted(self, "stats_")
        samples, _ = preprocess(_as_records(records), self.stats_, self.feature_set, require_labels=False)
        if not samples:
            return np.zeros((0, self.n_features_out_))
        return np.stack([s.features for s in samples])


def _as_records(records):
    # Accept RawRecord lists or a pandas DataFrame with the raw column names.
    if hasattr(records, "to_dict"):
        rows = records.to_dict("records")
        out = []
        for i, row in enumerate(rows):
            values = {k: (None if v is None or v != v or v == "" else str(v)) for k, v in row.items()}
            out.append(RawRecord(str(values.get("Loan_ID") or i), values, values.get("Loan_Status"), i + 2))
        return out
    return list(records)


class QNNClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier backed by a simulated layered rotation circuit.

    Each feature is angle-encoded onto its own qubit, so ``n_features``
    fixes the qubit count. Training is full batch with parameter-shift
    gradients.

    Parameters
    ----------
    depth : int, default=5
        Number of RY/RX + CNOT-ring layers.
    optimizer : {"adam", "gradient_descent", "rmsprop", "adagrad"}, default="adam"
    learning_rate : float or None, default=None
        None selects the optimizer's default step size.
    n_iterations : int, default=100
    dropout : bool, default=True
        Resample a parameter dropout mask every iteration.
    dropout_base, dropout_decrement : float, default=0.2, 0.02
        Layer ``d`` drops each parameter with probability
        ``max(0, dropout_base - d * dropout_decrement)``.
    dropout_granularity : {"gate", "layer"}, default="gate"
    readout_qubit : int, default=0
    noise : NoiseSpec or None, default=None
        Noise applied at prediction time only.
    random_state : int, default=0

    Attributes
    ----------
    theta_ : ndarray of shape (depth, n_features, 2)
    loss_history_ : list of float
    classes_ : ndarray of shape (2,)
    """

    def __init__(self, depth=5, optimizer="adam", learning_rate=None, n_iterations=100, dropout=True,
                 dropout_base=0.2, dropout_decrement=0.02, dropout_granularity="gate",
                 readout_qubit=0, noise=None, random_state=0):
        self.depth = depth
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.n_iterations = n_iterations
        self.dropout = dropout
        self.dropout_base = dropout_base
        self.dropout_decrement = dropout_decrement
        self.dropout_granularity = dropout_granularity
        self.readout_qubit = readout_qubit
        self.noise = noise
        self.random_state = random_state

    def _model_config(self, n_features):
        return ModelConfig(
            n_qubits=n_features,
            depth=self.depth,
            readout_qubit=self.readout_qubit,
            dropout_base=self.dropout_base,
            dropout_decrement=self.dropout_decrement,
            dropout_granularity=self.dropout_granularity,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = unique_labels(y)
        if len(self.classes_) != 2:
            raise ValueError(f"QNNClassifier is binary; got {len(self.classes_)} classes")
        self.n_features_in_ = X.shape[1]
        config = TrainConfig(
            model=self._model_config(X.shape[1]),
            optimizer=self.optimizer,
            lr=self.learning_rate,
            iterations=self.n_iterations,
            seed=self.random_state,
            dropout=self.dropout,
        )
        result = train(Dataset(X, (y == self.classes_[1]).astype(float)), config)
        self.theta_ = result.theta
        self.loss_history_ = result.loss_history
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "theta_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        noise = self.noise
        if isinstance(noise, tuple):
            noise = NoiseSpec(*noise)
        p1 = predict_batch(X, self.theta_, self._model_config(X.shape[1]), noise=noise, evaluation=True)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[classify(proba[:, 1])]
