"""Multitaper spectral features and classical learners for EEG epilepsy detection."""
from .errors import EpispecError
from .features import FEATURE_NAMES, ExtractionConfig, FeatureMatrix, build_matrix, extract_all
from .ingest import ClassLabel, DatasetManifest, TimeSeriesSegment, load_dataset, load_segment
from .tapers import dpss

__version__ = "0.1.0"

__all__ = [
    "EpispecError", "FEATURE_NAMES", "ExtractionConfig", "FeatureMatrix", "build_matrix",
    "extract_all", "ClassLabel", "DatasetManifest", "TimeSeriesSegment", "load_dataset",
    "load_segment", "dpss",
]
