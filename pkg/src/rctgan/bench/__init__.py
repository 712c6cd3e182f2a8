"""Evaluation harness: dataset construction, augmentation, downstream classifiers, metrics."""

from .metrics import ConfusionMatrix, g_mean
from .data import SplitSpec, Split, build_dataset, parse_ratio, BenchmarkSpec, make_synthetic_benchmark
from .smote import smote
from .trees import DecisionTree, RandomForest, fit_dt, fit_rf
from .features import FeatureEncoder
from .mlp import MLPConfig, fit_mlp
from .augment import augment
from .projection import jacobi_eigh, project_2d
from .experiment import ExperimentConfig, ExperimentReport, run_experiment

__all__ = [
    "ConfusionMatrix", "g_mean", "SplitSpec", "Split", "build_dataset", "parse_ratio",
    "BenchmarkSpec", "make_synthetic_benchmark", "smote", "DecisionTree", "RandomForest",
    "fit_dt", "fit_rf", "FeatureEncoder", "MLPConfig", "fit_mlp", "augment",
    "jacobi_eigh", "project_2d", "ExperimentConfig", "ExperimentReport", "run_experiment",
]
