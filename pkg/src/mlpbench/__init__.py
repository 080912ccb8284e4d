"""Single-hidden-layer perceptron benchmark with micro/macro multiclass measures."""

from .data import Dataset, DatasetSpec, load_dataset, load_named, normalize_columns, split
from .harness import ExperimentConfig, derive_run_seed, run_experiment, run_once
from .metrics import MetricsReport, confusion_from_predictions, evaluate
from .network import MlpNetwork, forward, init_weights, predict, sigmoid
from .training import TrainConfig, train

__version__ = "0.1.0"
