"""Training loop, evaluation metrics and the two experiment drivers."""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .exceptions import NumericalError, UsageError
from .gradients import cost_and_gradient
from .model import ModelConfig, init_parameters, predict_batch, sample_dropout_mask
from .noise import DEFAULT_GRID, NOISE_KINDS, NoiseSpec
from .optimizers import OPTIMIZER_KINDS, make_optimizer

logger = logging.getLogger(__name__)

# Named random substreams derived from one user seed. Toggling dropout never
# perturbs initialization because each consumer draws from its own stream.
STREAMS = {"init": 0, "dropout": 1, "split": 2}

THRESHOLD = 0.5
# Predictions within this distance below the threshold count as ties, which go to class 1.
TIE_ATOL = 1e-12


def substream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(STREAMS[name],)))


@dataclass
class TrainConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    optimizer: str = "adam"
    lr: Optional[float] = None
    iterations: int = 100
    seed: int = 0
    dropout: bool = True
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; expected one of {OPTIMIZER_KINDS}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        return d


@dataclass
class TrainResult:
    theta: np.ndarray
    theta0: np.ndarray
    loss_history: list
    wall_time: float
    config: TrainConfig
    optimizer: dict = field(default_factory=dict)


@dataclass
class Metrics:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    mse: float

    def to_dict(self) -> dict:
        return asdict(self)


def classify(probabilities) -> np.ndarray:
    return (np.asarray(probabilities) >= THRESHOLD - TIE_ATOL).astype(int)


def compute_metrics(y_true, probabilities) -> Metrics:
    """Confusion counts and derived scores; undefined ratios are reported as None."""
    y_true = np.asarray(y_true).astype(int)
    probabilities = np.asarray(probabilities, dtype=float)
    y_pred = classify(probabilities)
    tp = int(np.sum((y_pred == 1) & (y_true == 1)))
    fp = int(np.sum((y_pred == 1) & (y_true == 0)))
    tn = int(np.sum((y_pred == 0) & (y_true == 0)))
    fn = int(np.sum((y_pred == 0) & (y_true == 1)))
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    total = tp + fp + tn + fn
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=(tp + tn) / total if total else float("nan"),
        tp=tp, fp=fp, tn=tn, fn=fn,
        mse=float(np.mean((y_true - probabilities) ** 2)) if total else float("nan"),
    )


def train(train_set, config: TrainConfig, theta0=None, method: str = "heisenberg") -> TrainResult:
    """Full-batch training with a fresh dropout mask per iteration.

    ``loss_history[t]`` is the cost at iteration ``t`` before the update,
    evaluated under that iteration's mask.
    """
    if len(train_set) == 0:
        raise ValueError("training set is empty")
    model = config.model
    theta = init_parameters(model, substream(config.seed, "init")) if theta0 is None else np.array(theta0, dtype=float)
    start_theta = theta.copy()
    mask_rng = substream(config.seed, "dropout")
    opt = make_optimizer(config.optimizer, config.lr, **config.hyperparameters)

    history = []
    started = time.perf_counter()
    for t in range(config.iterations):
        mask = sample_dropout_mask(model, mask_rng) if config.dropout else None
        loss, grad = cost_and_gradient(train_set, theta, model, mask, method)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise NumericalError(f"non-finite cost at iteration {t}", iteration=t, theta=theta.copy())
        history.append(loss)
        theta = opt.step(theta, grad)
        logger.debug("iteration %d loss %.6f", t, loss)
    return TrainResult(
        theta=theta,
        theta0=start_theta,
        loss_history=history,
        wall_time=time.perf_counter() - started,
        config=config,
        optimizer=opt.hyperparameters(),
    )


def evaluate(test_set, theta, config: ModelConfig, noise: Optional[NoiseSpec] = None, mask=None) -> Metrics:
    """Dropout-free evaluation; passing a mask is a usage error."""
    if mask is not None:
        raise UsageError("evaluation never applies dropout; do not pass a mask")
    if test_set.y is None:
        raise ValueError("evaluation requires a labeled test set")
    probs = predict_batch(test_set.X, theta, config, noise=noise, evaluation=True)
    return compute_metrics(test_set.y, probs)


@dataclass
class ComparisonReport:
    results: dict
    metrics: dict
    best: str

    def table(self) -> list:
        rows = []
        for kind in self.results:
            m = self.metrics[kind]
            rows.append({"optimizer": kind, "precision": m.precision, "recall": m.recall,
                         "f1": m.f1, "accuracy": m.accuracy, "mse": m.mse,
                         "final_train_loss": self.results[kind].loss_history[-1]})
        return rows


def _score(item):
    kind, metrics = item
    return (metrics.mse, -metrics.accuracy, OPTIMIZER_KINDS.index(kind))


def run_optimizer_comparison(train_set, test_set, base_config: TrainConfig,
                             kinds=OPTIMIZER_KINDS, learning_rates=None) -> ComparisonReport:
    """Train every optimizer from the same initial parameters and rank them.

    Best is the lowest test MSE, then the highest accuracy.
    """
    learning_rates = learning_rates or {}
    theta0 = init_parameters(base_config.model, substream(base_config.seed, "init"))
    results, metrics = {}, {}
    for kind in kinds:
        cfg = TrainConfig(
            model=base_config.model,
            optimizer=kind,
            lr=learning_rates.get(kind),
            iterations=base_config.iterations,
            seed=base_config.seed,
            dropout=base_config.dropout,
        )
        results[kind] = train(train_set, cfg, theta0=theta0)
        metrics[kind] = evaluate(test_set, results[kind].theta, base_config.model)
        logger.info("%s: final loss %.4f accuracy %.4f", kind, results[kind].loss_history[-1], metrics[kind].accuracy)
    best = min(metrics.items(), key=_score)[0]
    return ComparisonReport(results, metrics, best)


@dataclass
class NoiseSweepReport:
    kinds: list
    grid: list
    accuracy: np.ndarray
    noiseless_accuracy: float
    p0_max_deviation: float
    class1_fraction: float


def run_noise_sweep(test_set, theta, config: ModelConfig, kinds=NOISE_KINDS, grid=DEFAULT_GRID) -> NoiseSweepReport:
    """Accuracy of a fixed parameter set for every (noise kind, strength) pair."""
    kinds, grid = list(kinds), [float(p) for p in grid]
    specs = [[NoiseSpec(kind, p) for p in grid] for kind in kinds]
    clean = predict_batch(test_set.X, theta, config, evaluation=True)
    noiseless = compute_metrics(test_set.y, clean).accuracy
    accuracy = np.zeros((len(kinds), len(grid)))
    deviation = 0.0
    for i, row in enumerate(specs):
        for j, spec in enumerate(row):
            probs = predict_batch(test_set.X, theta, config, noise=spec, evaluation=True)
            accuracy[i, j] = compute_metrics(test_set.y, probs).accuracy
            if spec.strength == 0.0:
                deviation = max(deviation, float(np.max(np.abs(probs - clean))))
        logger.info("noise %s: %s", kinds[i], np.round(accuracy[i], 3).tolist())
    return NoiseSweepReport(kinds, grid, accuracy, noiseless, deviation, float(np.mean(test_set.y)))
