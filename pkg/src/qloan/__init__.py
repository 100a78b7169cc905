"""Simulated quantum neural network for binary loan-eligibility prediction."""

__version__ = "0.1.0"

from .data import Dataset, NormalizationStats, Sample, load_csv, preprocess, split
from .estimator import LoanPreprocessor, QNNClassifier
from .model import ModelConfig, predict, predict_batch, sample_dropout_mask
from .noise import NOISE_KINDS, NoiseSpec, kraus_for
from .training import TrainConfig, evaluate, run_noise_sweep, run_optimizer_comparison, train

__all__ = [
    "Dataset",
    "LoanPreprocessor",
    "ModelConfig",
    "NOISE_KINDS",
    "NoiseSpec",
    "NormalizationStats",
    "QNNClassifier",
    "Sample",
    "TrainConfig",
    "evaluate",
    "kraus_for",
    "load_csv",
    "predict",
    "predict_batch",
    "preprocess",
    "run_noise_sweep",
    "run_optimizer_comparison",
    "sample_dropout_mask",
    "split",
    "train",
]
