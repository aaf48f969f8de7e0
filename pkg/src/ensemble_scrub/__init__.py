"""Ensemble label-noise filtering for text-classification datasets."""
from .config import PipelineConfig
from .dataset_io import LabeledDataset
from .ensemble_filter import DEFAULT_BIAS, BiasVector, weighted_vote
from .models import Hyperparameters, ModelKind

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig", "LabeledDataset", "DEFAULT_BIAS", "BiasVector", "weighted_vote",
    "Hyperparameters", "ModelKind",
]
