"""Hierarchical graph-signal-processing features for multichannel time series."""

from .errors import BatchError, ConfigError, ConvergenceError, DimensionError, FormatError, SizeError
from .evaluation import DataParams, ExperimentReport, auc, generate_synthetic, run_experiment
from .forest import ForestConfig, train_forest
from .graph_learning import (
    SpatialGraph,
    VertexIndexMap,
    WeightTensor,
    center_spatial,
    center_temporal,
    collapse_autocovariance,
    dense_adjacency,
    estimate_dense_bytes,
    learn_weights,
    threshold_graph,
)
from .gsp import LaplacianSpectrum, band_energies, gft, laplacian, quadratic_form, sgwt_features, spectrum
from .pipeline import FeatureVector, PipelineConfig, extract_batch, extract_features, feature_count
from .signal_core import SpatiotemporalSignal, bandpass, downsample, filter_bank, load_signal, partition
from .topology import TopologyEmbedding, topology_embedding

__version__ = "0.1.0"
